"""Cut a torus in T^2/Z2 into cylinders and watch transport add up under gluing."""

import argparse
import random
from dataclasses import dataclass

from orbichar.chain_core import format_rational, mod1
from orbichar.deligne import random_gerbe
from orbichar.loop_string import LineBundleCocycle, check_equivariance, glue, self_glue, torus_cylinder, transport_U
from orbichar.orbifold import EquivariantComplex, torus_rotation


@dataclass
class Config:
    seed: int = 7
    pieces: tuple[int, ...] = (1, 1, 1)
    column: int = 0


def main(cfg: Config) -> None:
    base = EquivariantComplex(torus_rotation(3), name="torus-z2")
    b = LineBundleCocycle(random_gerbe(base, random.Random(cfg.seed)))
    col = cfg.column
    pieces = []
    for k, layers in enumerate(cfg.pieces):
        pieces.append(torus_cylinder(base, col, layers, name=f"c{k}"))
        col = (col + layers) % 3
    running = pieces[0]
    height = cfg.pieces[0]
    expected = transport_U(b, running).log_value
    for s, layers in zip(pieces[1:], cfg.pieces[1:]):
        u = transport_U(b, s).log_value
        running = glue(running, 0, s, 0, {v: (v[0], 0) for v in running.outgoing[0].loop.Q.vertices})
        height += layers
        expected = mod1(expected + u)
        got = transport_U(b, running).log_value
        print(f"glue {s.name:<4} U(piece) = {format_rational(u):<6} U(total) = {format_rational(got):<6} sum = {format_rational(expected)}")
    for g in base.group.elements:
        r = check_equivariance(b, running, g)
        print(f"equivariance g={base.group.names[g]}: surface side {r.lhs}, loop side {r.rhs}")
    if height % 3 == 0:
        loop = running.outgoing[0].loop
        closed = self_glue(running, 0, 0, {v: (v[0], 0) for v in loop.Q.vertices})
        print(f"closed torus: U = {format_rational(transport_U(b, closed).log_value)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--pieces", type=int, nargs="+", default=list(Config.pieces))
    ap.add_argument("--column", type=int, default=Config.column)
    a = ap.parse_args()
    main(Config(a.seed, tuple(a.pieces), a.column))
