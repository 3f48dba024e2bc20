import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from orbichar.chain_core import Cochain, CoefficientRing, coboundary, pair
from orbichar.deligne import (
    DeligneCochain,
    DeligneComplex,
    DeligneComplexSpec,
    GerbeCocycle,
    InvalidGerbe,
    NotClosed,
    Variant,
    add,
    check_gerbe_cocycle,
    circle_differential,
    curvature,
    deligne_cohomology,
    deligne_to_gerbe,
    exp_comparison,
    flat_generators,
    gauge_shift,
    gerbe_to_deligne,
    kappa,
    neg,
    normalize_gerbe,
    periods_integral,
    perturb_gerbe,
    random_cochain,
    random_gerbe,
    sigma,
    trivialize,
)
from orbichar.scenarios import discrete_torsion_gerbe, klein_torsion_cocycle

import oracles

Z, Q, QZ = CoefficientRing.INTEGERS, CoefficientRing.RATIONALS, CoefficientRing.RATIONALS_MOD_1


@pytest.mark.parametrize("q", [1, 2, 3])
def test_point_z2_deligne_groups(pt_z2, q):
    spec = DeligneComplexSpec(q, Variant.INTEGRAL, 5)
    got = [str(deligne_cohomology(pt_z2, spec, n)) for n in range(5)]
    assert got == oracles.PT_Z2_DELIGNE


def test_circle_variant_shifts_degree(pt_z2):
    spec = DeligneComplexSpec(2, Variant.CIRCLE, 5)
    assert str(deligne_cohomology(pt_z2, spec, 0)) == "Q/Z"
    assert str(deligne_cohomology(pt_z2, spec, 1)) == "Z/2"


def test_trivial_group_circle_weight2():
    from orbichar.orbifold import EquivariantComplex, rotation_action, trivial_action
    circle = EquivariantComplex(trivial_action(rotation_action(3).complex))
    spec = DeligneComplexSpec(2, Variant.CIRCLE, 4)
    # smooth circle-valued functions modulo constants have no discrete shadow: H^0 is the constants
    assert str(deligne_cohomology(circle, spec, 0)) == "Q/Z"


def _random_deligne(dc, n, rng):
    c = random_cochain(dc.total, n, rng, den=1)
    h = random_cochain(dc.total, n - 1, rng)
    return DeligneCochain(c.as_ring(Z), h)


@given(st.integers(0, 2**32), st.integers(1, 3))
def test_deligne_differential_squares_to_zero(seed, n):
    from orbichar.orbifold import EquivariantComplex, torus_rotation
    rng = random.Random(seed)
    dc = DeligneComplex(EquivariantComplex(torus_rotation(3)), 2, 5)
    x = _random_deligne(dc, n, rng)
    dd = dc.differential(dc.differential(x))
    assert dd.c.is_zero() and dd.h.is_zero()


def test_trivial_gerbe_passes(torus_z2):
    assert check_gerbe_cocycle(GerbeCocycle.trivial(torus_z2)) == []


def test_discrete_torsion_gerbe(pt_klein):
    xi = discrete_torsion_gerbe(pt_klein, klein_torsion_cocycle(pt_klein.group))
    assert check_gerbe_cocycle(xi) == []
    dc, x = gerbe_to_deligne(xi)
    assert dc.is_cocycle(x)
    res = trivialize(dc, x)
    assert not res.trivial
    assert res.holonomy == oracles.KLEIN_TORUS_HOLONOMY
    assert pair(x.h, res.witness) % 1 == Fraction(1, 2)


def test_discrete_torsion_sign_flip_is_cohomologous(pt_klein):
    # a coboundary cocycle rho = f(a) + f(b) - f(ab) is trivial
    G = pt_klein.group
    f = {g: Fraction(g, 5) for g in G.elements}
    f[G.identity] = Fraction(0)
    cocycle = {(a, b): (f[a] + f[b] - f[G.mul(a, b)]) % 1 for a in G.elements for b in G.elements}
    xi = discrete_torsion_gerbe(pt_klein, cocycle)
    dc, x = gerbe_to_deligne(xi)
    assert trivialize(dc, x).trivial


def test_random_gerbes_pass(torus_z2):
    rng = random.Random(11)
    for _ in range(5):
        xi = random_gerbe(torus_z2, rng)
        assert check_gerbe_cocycle(xi) == []
        dc, x = gerbe_to_deligne(xi)
        assert dc.is_cocycle(x)
        assert dc.curvature_of(x) == curvature(xi)
        back = deligne_to_gerbe(dc, x)
        assert back.B == xi.B and back.A == xi.A and back.rho == xi.rho


def _orbit_reprs(base, key):
    a = base.action
    out = set()
    for g in base.group.elements:
        t, _ = a.act(key, g)
        out.add(repr(t))
    return out


def test_perturbations_are_caught_with_location(torus_z2):
    rng = random.Random(3)
    for _ in range(10):
        xi = random_gerbe(torus_z2, rng)
        bad, where = perturb_gerbe(xi, rng)
        report = check_gerbe_cocycle(bad)
        assert report
        simplex = eval(where.split(" at ", 1)[1])
        names = _orbit_reprs(torus_z2, simplex)
        assert any(any(n in v.detail for n in names) for v in report), (where, report[:3])


def test_create_normalizes(torus_z2, rng):
    xi = random_gerbe(torus_z2, rng)
    cx = torus_z2.complex.cochain_complex
    f = Cochain(cx, 0, {(v,): Fraction(1, 3) for v in torus_z2.complex.vertices}, Q)
    G = torus_z2.group
    A = {g: xi.A[g] - coboundary(f) for g in G.elements}
    rho = {k: (r.as_ring(Q) + f).as_ring(QZ) for k, r in xi.rho.items()}
    raw = GerbeCocycle.raw(torus_z2, xi.B, A, rho)
    assert any(v.kind == "Normalization" for v in check_gerbe_cocycle(raw))
    fixed, note = normalize_gerbe(raw)
    assert check_gerbe_cocycle(fixed) == []
    assert note


def test_create_rejects_invalid(torus_z2, rng):
    bad, _ = perturb_gerbe(random_gerbe(torus_z2, rng), rng)
    with pytest.raises(InvalidGerbe):
        GerbeCocycle.create(torus_z2, bad.B, bad.A, bad.rho)


def test_gerbe_json_roundtrip(torus_z2, rng):
    xi = random_gerbe(torus_z2, rng)
    back = GerbeCocycle.from_json(torus_z2, xi.to_json())
    assert back.B == xi.B and back.A == xi.A and back.rho == xi.rho


def test_gauge_shift_preserves_class(torus_z2, rng):
    xi = random_gerbe(torus_z2, rng)
    ys = gauge_shift(xi, rng)
    assert check_gerbe_cocycle(ys) == []
    dc, x = gerbe_to_deligne(xi)
    _, y = gerbe_to_deligne(ys)
    assert trivialize(dc, add(x, neg(y))).trivial


def test_coboundary_gerbe_on_circle_is_trivial(circle_z3, rng):
    xi = random_gerbe(circle_z3, rng)
    dc, x = gerbe_to_deligne(xi)
    assert trivialize(dc, x).trivial


def test_t3_curvature_periods(t3, rng):
    xi = random_gerbe(t3, rng)
    omega = kappa(xi)
    assert not omega.is_zero()
    assert periods_integral(omega, t3.nerve(4)).integral


def test_nonintegral_period_detected(t3):
    cx = t3.complex.cochain_complex
    tet = cx.bases[3][0]
    omega = Cochain(cx, 3, {tet: Fraction(1, 2)}, Q)
    res = periods_integral(omega, t3.nerve(4))
    assert not res.integral and res.value % 1 == Fraction(1, 2)


def test_periods_need_closed_form(torus_z2):
    cx = torus_z2.complex.cochain_complex
    from orbichar.orbifold import average
    c = average(torus_z2.action, Cochain(cx, 1, {cx.bases[1][0]: 1}, Q))
    with pytest.raises(NotClosed):
        periods_integral(c, torus_z2.nerve(4))


@pytest.mark.parametrize("q", [2, 3])
def test_kappa_sigma_vanishes(pt_z2, q):
    dc = DeligneComplex(pt_z2, q, q + 2)
    gens = flat_generators(dc, q - 1)
    if q == 2:
        assert len(gens) == 1
    for f in gens:
        _, x = sigma(f, q, dc)
        assert dc.is_cocycle(x)
        assert dc.curvature_of(x).is_zero()


def test_exp_comparison_is_chain_map(torus_z2, rng):
    dc = DeligneComplex(torus_z2, 2, 4)
    x = _random_deligne(dc, 2, rng)
    lhs = exp_comparison(dc, dc.differential(x))
    rhs = circle_differential(dc, exp_comparison(dc, x))
    assert lhs == rhs
