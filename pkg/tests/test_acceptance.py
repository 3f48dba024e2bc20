"""The seven acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line with its wall time; the
lines are repeated in the terminal summary.  Run with
``pytest tests/test_acceptance.py -s``.
"""

import ast
import json
import os
import random
import re
import subprocess
import sys
import time
from contextlib import contextmanager

from orbichar.chain_core import Chain, CoefficientRing, coboundary, cohomology
from orbichar.cheeger_simons import CSComplex, character_from_cs_cocycle, character_from_gerbe
from orbichar.deligne import (
    DeligneComplex,
    GerbeCocycle,
    check_gerbe_cocycle,
    curvature,
    flat_generators,
    gauge_shift,
    kappa,
    perturb_gerbe,
    random_cochain,
    random_gerbe,
    sigma,
)
from orbichar.loop_string import (
    LineBundleCocycle,
    box_chain,
    boundary_surface,
    check_equivariance,
    closed_surface_from_map,
    cover_loop,
    cover_surface,
    glue,
    groupoid_defect,
    random_walk_loop,
    reparametrize,
    segal_check,
    self_glue,
    torus_cylinder,
    transport_U,
    twisted_hexagon_orbifold,
    twisted_loop,
    validate_surface,
)
from orbichar.chain_core import mod1
from orbichar.orbifold import EquivariantComplex, SimplicialComplex, torus_rotation
from orbichar.scenarios import BUILTINS, builtin, discrete_torsion_gerbe, klein_torsion_cocycle

import oracles

QZ = CoefficientRing.RATIONALS_MOD_1
SEED = 20240229


@contextmanager
def criterion(log, number, title, limit=None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        in_time = limit is None or elapsed < limit
        tag = "PASS" if ok and in_time else "FAIL"
        budget = f" / {limit:.0f}s" if limit is not None else ""
        note = "" if in_time else " (over time budget)"
        line = f"[{tag}] criterion {number}: {title} ({elapsed:.2f}s{budget}){note}"
        print("\n" + line)
        log.append(line)
    assert in_time, line


def test_criterion_1_cohomology_oracles(acceptance_log, pt_z2):
    from orbichar.orbifold import cycle_complex, torus_complex, trivial_action

    with criterion(acceptance_log, 1, "Borel cohomology of pt/Z2, circle and torus", 5):
        total = pt_z2.nerve(6).total
        assert [str(cohomology(total, n)) for n in range(5)] == oracles.BZ2_INTEGRAL
        circle = EquivariantComplex(trivial_action(cycle_complex(3))).nerve(3).total
        assert [str(cohomology(circle, n)) for n in range(2)] == oracles.CIRCLE_INTEGRAL
        torus = EquivariantComplex(trivial_action(torus_complex(3))).nerve(4).total
        assert [str(cohomology(torus, n)) for n in range(3)] == oracles.TORUS_INTEGRAL


def test_criterion_2_differentials_square_to_zero(acceptance_log, t3, torus_z2):
    per_regime = 500
    with criterion(acceptance_log, 2, f"d^2 = 0 on {per_regime} random inputs per degree regime", 30):
        rng = random.Random(SEED)
        simplicial = t3.complex.cochain_complex
        for n in (0, 1):
            for _ in range(per_regime):
                assert coboundary(coboundary(random_cochain(simplicial, n, rng))).is_zero()
        total = torus_z2.nerve(5).total
        for n in range(4):
            for _ in range(per_regime):
                assert coboundary(coboundary(random_cochain(total, n, rng))).is_zero()
        cs = CSComplex(torus_z2, 2, 5)
        # below, at and above the weight
        for n in range(4):
            for _ in range(per_regime):
                x = cs.random(n, rng)
                assert cs.differential(cs.differential(x)).is_zero()


WITNESS = re.compile(r"(?:simplex|edge|vertex) (\(.*?\))(?: \(defect|$)")


def _witness_hits(base, perturbed, violation):
    """The failing simplex contains some translate of the perturbed one."""
    m = WITNESS.search(violation.detail)
    if not m:
        return False
    where = set(ast.literal_eval(m.group(1)))
    return any(set(base.action.act(perturbed, g)[0]) <= where for g in base.group.elements)


def test_criterion_3_gerbe_cocycles(acceptance_log, pt_klein, torus_z2):
    with criterion(acceptance_log, 3, "gerbe relations: trivial, discrete torsion, 20 valid, 20 perturbed", 10):
        assert check_gerbe_cocycle(GerbeCocycle.trivial(pt_klein)) == []
        assert check_gerbe_cocycle(GerbeCocycle.trivial(torus_z2)) == []
        assert check_gerbe_cocycle(discrete_torsion_gerbe(pt_klein, klein_torsion_cocycle(pt_klein.group))) == []
        rng = random.Random(SEED)
        valid = [random_gerbe(torus_z2, rng) for _ in range(20)]
        for xi in valid:
            assert check_gerbe_cocycle(xi) == []
        for xi in valid:
            bad, where = perturb_gerbe(xi, rng)
            report = check_gerbe_cocycle(bad)
            assert report, where
            perturbed = ast.literal_eval(where.split(" at ", 1)[1])
            assert any(_witness_hits(torus_z2, perturbed, v) for v in report), (where, report[:3])


def test_criterion_4_string_connection_identities(acceptance_log, t3):
    n = 100
    torus = EquivariantComplex(torus_rotation(3), name="torus-z2")
    hexagon = twisted_hexagon_orbifold()
    G = torus.group
    with criterion(acceptance_log, 4, f"groupoid, equivariance, gluing, self-gluing, Segal ({n} each)", 60):
        rng = random.Random(SEED)
        for i in range(n):
            if i % 5 == 4:
                b = LineBundleCocycle(random_gerbe(hexagon, rng))
                loop, group = twisted_loop(hexagon), hexagon.group
            else:
                b = LineBundleCocycle(random_gerbe(torus, rng))
                loop, group = random_walk_loop(torus, rng, length=rng.randint(3, 7)), G
                if rng.random() < 0.5:
                    loop = cover_loop(loop, 1)
            for g in group.elements:
                for h in group.elements:
                    assert groupoid_defect(b, loop, g, h) == 0

        for _ in range(n):
            b = LineBundleCocycle(random_gerbe(torus, rng))
            s = torus_cylinder(torus, rng.randrange(3), rng.randint(1, 3))
            if rng.random() < 0.5:
                s = cover_surface(s, 1)
            r = check_equivariance(b, s, rng.choice(G.elements))
            assert r.holds and r.lhs == r.rhs, r.report

        for _ in range(n):
            b = LineBundleCocycle(random_gerbe(torus, rng))
            col, la, lb = rng.randrange(3), rng.randint(1, 2), rng.randint(1, 2)
            s1 = torus_cylinder(torus, col, la, name="a")
            s2 = torus_cylinder(torus, (col + la) % 3, lb, name="b")
            ident = {(i, la): (i, 0) for i in range(3)}
            if rng.random() < 0.5:
                s1, s2 = cover_surface(s1, 1), cover_surface(s2, 1)
                ident = {(j, v): (j, w) for (v, w) in ident.items() for j in range(2)}
            glued = glue(s1, 0, s2, 0, ident)
            assert validate_surface(glued) == []
            u1, u2 = transport_U(b, s1).log_value, transport_U(b, s2).log_value
            assert transport_U(b, glued).log_value == mod1(u1 + u2)

        for _ in range(n):
            b = LineBundleCocycle(random_gerbe(torus, rng))
            layers = 3 * rng.randint(1, 2)
            s = torus_cylinder(torus, rng.randrange(3), layers)
            closed = self_glue(s, 0, 0, {(i, layers): (i, 0) for i in range(3)})
            assert closed.closed
            assert transport_U(b, closed).log_value == transport_U(b, s).log_value

        for _ in range(n):
            b = LineBundleCocycle(random_gerbe(t3, rng))
            origin = tuple(rng.randrange(3) for _ in range(3))
            size = tuple(rng.randint(1, 2) for _ in range(3))
            v = box_chain(t3.complex, origin, size, 3)
            r = segal_check(b, v, boundary_surface(t3, v))
            assert r.holds, r.report


def test_criterion_5_short_exact_sequence(acceptance_log, pt_z2, circle_z3, torus_z2):
    with criterion(acceptance_log, 5, "kappa o sigma = 0, curvature kernel, curvature forms realized", 60):
        for base, q in ((pt_z2, 2), (circle_z3, 2), (torus_z2, 3)):
            p = q + 2
            dc = DeligneComplex(base, q, p)
            cs = CSComplex(base, q, p)
            for f in flat_generators(dc, q - 1):
                _, x = sigma(f, q, dc)
                assert dc.is_cocycle(x) and dc.curvature_of(x).is_zero()
            flat = cohomology(dc.total, q - 1, QZ)
            kernel = cs.curvature_kernel()
            assert kernel.order == flat.order
            assert kernel.torsion == flat.torsion
            assert kernel.divisible_rank == flat.divisible_rank
        # every curvature form in the example corpus is the curvature of an explicit gerbe
        for name in sorted(BUILTINS):
            sc = builtin(name)
            if sc.gerbe is None or check_gerbe_cocycle(sc.gerbe):
                continue
            omega = curvature(sc.gerbe)
            assert kappa(sc.gerbe) == omega
            cs = CSComplex(sc.orbifold, 3, 4)
            y = cs.realize_form(omega)
            assert cs.is_cocycle(y) and y.omega == omega


def _closed_test_surfaces(torus):
    out = []
    for col in range(3):
        c = torus_cylinder(torus, col, 3, name=f"cyl{col}")
        out.append(self_glue(c, 0, 0, {(i, 3): (i, 0) for i in range(3)}))
    for col in range(2):
        c = cover_surface(torus_cylinder(torus, col, 3, name=f"cover{col}"), 1)
        out.append(self_glue(c, 0, 0, {(j, (i, 3)): (j, (i, 0)) for j in range(2) for i in range(3)}))
    P = torus.complex
    out.append(closed_surface_from_map(torus, P, {v: v for v in P.vertices}, "identity"))
    out.append(closed_surface_from_map(torus, P, {v: torus.action.act_vertex(v, 1) for v in P.vertices}, "rotated"))
    t = out[0]
    labels = sorted(t.P.vertices, key=repr)
    shifted = labels[5:] + labels[:5]
    out.append(reparametrize(t, {v: ("r", i) for i, v in enumerate(shifted)}, "relabelled"))
    sphere = SimplicialComplex([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)], name="sphere")
    a, b, c = P.simplices[2][0]
    out.append(closed_surface_from_map(torus, sphere, {0: a, 1: b, 2: c, 3: b}, "sphere"))
    # coordinate swap reverses orientation
    out.append(closed_surface_from_map(torus, P, {(i, j): (j, i) for (i, j) in P.vertices}, "swapped"))
    return out


def test_criterion_6_main_theorem_desk_scale(acceptance_log, pt_z2, torus_z2):
    with criterion(acceptance_log, 6, "Deligne classes vs characters on pt/Z2; gauge invariance on 10 surfaces", 60):
        dc = DeligneComplex(pt_z2, 2, 4)
        assert dc.cohomology(2).order == 2
        cs = CSComplex(pt_z2, 2, 4)
        assert cs.cohomology(2).order == 2
        z = Chain(cs.total, 1, {cs.nerve.id((1,), (0,)): 1})
        (gen,) = flat_generators(dc, 1)
        classes = [dc.zero(2), sigma(gen, 2, dc)[1]]
        values = [character_from_cs_cocycle(cs, cs.from_deligne(dc, x))(z) for x in classes]
        assert sorted(values) == oracles.PT_Z2_CHARACTER_VALUES
        assert len(set(values)) == 2

        surfaces = _closed_test_surfaces(torus_z2)
        assert len(surfaces) == 10
        for s in surfaces:
            assert s.closed and validate_surface(s) == [], s.name
        rng = random.Random(SEED)
        nonzero = 0
        for _ in range(3):
            xi = random_gerbe(torus_z2, rng)
            chi = character_from_gerbe(xi)
            for _ in range(2):
                other = character_from_gerbe(gauge_shift(xi, rng))
                for s in surfaces:
                    assert chi(s) == other(s), s.name
            nonzero += sum(chi(s) != 0 for s in surfaces)
        assert nonzero


def test_criterion_7_determinism(acceptance_log, tmp_path):
    with criterion(acceptance_log, 7, "verify reports are byte-identical across runs"):
        outputs = {}
        for name in sorted(BUILTINS):
            runs = []
            for hashseed in ("0", "1"):
                env = dict(os.environ, PYTHONHASHSEED=hashseed)
                proc = subprocess.run(
                    [sys.executable, "-m", "orbichar.cli", "verify", "--scenario", name, "--seed", str(SEED),
                     "--report", "json"],
                    capture_output=True, env=env, check=False,
                )
                runs.append(proc.stdout)
            assert runs[0] == runs[1], name
            json.loads(runs[0])
            outputs[name] = runs[0]
        assert len(outputs) == len(BUILTINS)
