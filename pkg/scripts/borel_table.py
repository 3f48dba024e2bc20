"""Print Borel, Deligne and Cheeger-Simons groups for every built-in space."""

import argparse
from dataclasses import dataclass

from orbichar.chain_core import CoefficientRing, cohomology
from orbichar.cheeger_simons import cs_cohomology
from orbichar.deligne import DeligneComplex
from orbichar.orbifold import EquivariantComplex
from orbichar.scenarios import SPACES


@dataclass
class Config:
    top: int = 4
    q: int = 2
    spaces: tuple[str, ...] = tuple(sorted(SPACES))


def main(cfg: Config) -> None:
    p_max = cfg.top + 2
    for name in cfg.spaces:
        base = EquivariantComplex(SPACES[name](), name=name)
        total = base.nerve(p_max).total
        dc = DeligneComplex(base, cfg.q, p_max)
        rows = {
            "H(Z)": [cohomology(total, n) for n in range(cfg.top + 1)],
            "H(Q/Z)": [cohomology(total, n, CoefficientRing.RATIONALS_MOD_1) for n in range(cfg.top + 1)],
            f"Deligne q={cfg.q}": [dc.cohomology(n) for n in range(cfg.top + 1)],
            f"CS q={cfg.q}": [cs_cohomology(base, cfg.q, n, p_max) for n in range(cfg.top)],
        }
        print(f"== {name}  (|G| = {base.group.order})")
        for label, groups in rows.items():
            print(f"  {label:<14}" + "  ".join(f"{str(g):<12}" for g in groups))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--top", type=int, default=Config.top)
    ap.add_argument("--q", type=int, default=Config.q)
    ap.add_argument("--space", action="append", choices=sorted(SPACES))
    a = ap.parse_args()
    main(Config(a.top, a.q, tuple(a.space) if a.space else Config.spaces))
