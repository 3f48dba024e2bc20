"""Compare volume integrals of dB with transport around box boundaries in the cube-grid 3-torus."""

import argparse
import random
from dataclasses import dataclass

from orbichar.chain_core import format_rational
from orbichar.deligne import random_gerbe
from orbichar.loop_string import LineBundleCocycle, box_chain, boundary_surface, segal_check
from orbichar.orbifold import EquivariantComplex, cube_torus, trivial_action


@dataclass
class Config:
    seed: int = 3
    trials: int = 10
    n: int = 3


def main(cfg: Config) -> None:
    rng = random.Random(cfg.seed)
    base = EquivariantComplex(trivial_action(cube_torus(cfg.n)), name="t3")
    bad = 0
    for t in range(cfg.trials):
        b = LineBundleCocycle(random_gerbe(base, rng))
        origin = tuple(rng.randrange(cfg.n) for _ in range(3))
        size = tuple(rng.randint(1, cfg.n - 1) for _ in range(3))
        v = box_chain(base.complex, origin, size, cfg.n)
        r = segal_check(b, v, boundary_surface(base, v))
        bad += not r.holds
        print(f"{t:>3} box {origin} + {size}: <dB, v> = {format_rational(r.volume):<6} U = {format_rational(r.transport):<6} {'ok' if r.holds else 'MISMATCH'}")
    print(f"{cfg.trials - bad}/{cfg.trials} agree")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--trials", type=int, default=Config.trials)
    a = ap.parse_args()
    main(Config(a.seed, a.trials))
