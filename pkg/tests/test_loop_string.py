import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from orbichar.chain_core import Cochain, CoefficientRing, mod1
from orbichar.deligne import GerbeCocycle, gauge_shift, random_gerbe
from orbichar.loop_string import (
    BoundaryMismatch,
    LineBundleCocycle,
    OrbifoldLoop,
    OrbifoldSurface,
    act_on_loop,
    box_chain,
    boundary_surface,
    check_equivariance,
    cover_loop,
    cover_surface,
    glue,
    groupoid_defect,
    loop_from_walk,
    oriented_cylinder,
    random_walk_loop,
    reparametrize,
    same_loop_data,
    segal_check,
    self_glue,
    surface_from_map,
    torus_cylinder,
    transgress_F,
    transport_U,
    twisted_hexagon_orbifold,
    twisted_loop,
    validate_loop,
    validate_surface,
)
from orbichar.orbifold import (
    EquivariantComplex,
    GroupAction,
    cyclic_group,
    cycle_complex,
    cylinder_complex,
    orient,
    torus_complex,
    torus_rotation,
    trivial_action,
)

Q = CoefficientRing.RATIONALS
TORUS = EquivariantComplex(torus_rotation(3), name="torus-z2")


def edge_value(c, a, b):
    """Value of a 1-cochain on the oriented edge a -> b, read directly off its table."""
    if a == b:
        return Fraction(0)
    t, sign = orient([a, b])
    return sign * c[t]


def triangle_value(c, a, b, d):
    t, sign = orient([a, b, d])
    return sign * c[t] if sign else Fraction(0)


# -- loops ------------------------------------------------------------------


def test_constant_loop_valid(pt_z2):
    l = loop_from_walk(pt_z2, [0, 0, 0])
    assert validate_loop(l) == []


def test_twisted_hexagon_loop_valid():
    H = twisted_hexagon_orbifold()
    l = twisted_loop(H)
    assert validate_loop(l) == []
    for tau in (0, 1):
        for x in range(6):
            assert l.phi[l.gamma_action.act_vertex(x, tau)] == H.action.act_vertex(l.phi[x], l.phi_sharp[tau])


def test_fixed_point_action_reported():
    H = twisted_hexagon_orbifold()
    reflect = {0: {v: v for v in range(6)}, 1: {v: (-v) % 6 for v in range(6)}}
    l = OrbifoldLoop("reflected", cyclic_group(2), cycle_complex(6), reflect, {v: v for v in range(6)}, (0, 1), H)
    kinds = {v.kind for v in validate_loop(l)}
    assert "FreeActionViolation" in kinds


def test_non_equivariant_map_reported():
    H = twisted_hexagon_orbifold()
    good = twisted_loop(H)
    bad = OrbifoldLoop("bad", good.gamma, good.Q, good.gamma_maps, {v: v for v in range(6)}, (0, 0), H, good.orientation)
    assert any(v.kind == "EquivarianceViolation" for v in validate_loop(bad))


def test_act_on_loop_laws():
    H = twisted_hexagon_orbifold()
    l = twisted_loop(H)
    assert same_loop_data(act_on_loop(l, 0), l)
    lh = act_on_loop(l, 1)
    assert lh.phi_sharp == l.phi_sharp
    assert lh.phi != l.phi
    assert validate_loop(lh) == []
    assert same_loop_data(act_on_loop(lh, 1), l)


@given(st.integers(0, 2**32))
def test_act_on_loop_is_right_action(seed):
    rng = random.Random(seed)
    l = cover_loop(random_walk_loop(TORUS, rng), 1)
    G = TORUS.group
    for g in G.elements:
        for h in G.elements:
            assert same_loop_data(act_on_loop(act_on_loop(l, g), h), act_on_loop(l, G.mul(g, h)))


# -- transgression ------------------------------------------------------------


def test_trivial_gerbe_transgresses_to_zero():
    b = LineBundleCocycle(GerbeCocycle.trivial(TORUS))
    l = loop_from_walk(TORUS, [(0, 0), (0, 1), (0, 2)])
    assert all(transgress_F(b, l, g) == 0 for g in TORUS.group.elements)


def test_meridian_against_edge_sum():
    rng = random.Random(8)
    xi = random_gerbe(TORUS, rng)
    b = LineBundleCocycle(xi)
    walk = [(0, 0), (0, 1), (0, 2)]
    l = loop_from_walk(TORUS, walk)
    for g in TORUS.group.elements:
        direct = sum(edge_value(xi.A[g], walk[i], walk[(i + 1) % 3]) for i in range(3))
        assert transgress_F(b, l, g) == mod1(direct)
    assert transgress_F(b, l, TORUS.group.identity) == 0
    G = TORUS.group
    for g in G.elements:
        for h in G.elements:
            assert groupoid_defect(b, l, g, h) == 0


@given(st.integers(0, 2**32), st.booleans())
def test_groupoid_identity_random(seed, covered):
    rng = random.Random(seed)
    b = LineBundleCocycle(random_gerbe(TORUS, rng))
    l = random_walk_loop(TORUS, rng, length=rng.randint(3, 7))
    if covered:
        l = cover_loop(l, 1)
    G = TORUS.group
    assert all(groupoid_defect(b, l, g, h) == 0 for g in G.elements for h in G.elements)


def test_twisted_loop_groupoid():
    H = twisted_hexagon_orbifold()
    b = LineBundleCocycle(random_gerbe(H, random.Random(2)))
    l = twisted_loop(H)
    assert all(groupoid_defect(b, l, g, h) == 0 for g in (0, 1) for h in (0, 1))


# -- transport --------------------------------------------------------------


def test_trivial_gerbe_transport_zero():
    b = LineBundleCocycle(GerbeCocycle.trivial(TORUS))
    assert transport_U(b, torus_cylinder(TORUS, 0, 2)).log_value == 0


def test_identity_torus_half_mass():
    base = EquivariantComplex(trivial_action(torus_complex(3)))
    P = base.complex
    s = surface_from_map(base, P, {v: v for v in P.vertices}, "T")
    assert validate_surface(s) == [] and s.closed
    tri = sorted(s.orientation.coeffs)[0]
    B = Cochain(P.cochain_complex, 2, {tri: Fraction(s.orientation.coeffs[tri], 2)}, Q)
    xi = GerbeCocycle.create(base, B, {}, {})
    assert transport_U(LineBundleCocycle(xi), s).log_value == Fraction(1, 2)


def test_cylinder_against_triangle_sum():
    rng = random.Random(5)
    xi = random_gerbe(TORUS, rng)
    s = torus_cylinder(TORUS, 1, 2)
    direct = Fraction(0)
    for tri, c in s.orientation.coeffs.items():
        direct += c * triangle_value(xi.B, *(s.Phi[v] for v in tri))
    assert transport_U(LineBundleCocycle(xi), s).log_value == mod1(direct)


def test_reparametrization_invariance():
    rng = random.Random(9)
    b = LineBundleCocycle(random_gerbe(TORUS, rng))
    s = torus_cylinder(TORUS, 0, 2)
    labels = list(s.P.vertices)
    shuffled = labels[:]
    rng.shuffle(shuffled)
    relabel = {v: ("p", i) for v, i in zip(labels, range(len(labels)))}
    relabel = {v: relabel[w] for v, w in zip(labels, shuffled)}
    s2 = reparametrize(s, relabel)
    assert validate_surface(s2) == []
    assert transport_U(b, s2).log_value == transport_U(b, s).log_value


def test_surface_validation_catches_wrong_orientation():
    s = torus_cylinder(TORUS, 0, 1)
    flipped = OrbifoldSurface(s.name, s.gamma, s.P, s.gamma_maps, s.Phi, s.Phi_sharp, s.target,
                              s.orientation.scale(-1), s.incoming, s.outgoing)
    assert any(v.kind == "OrientationViolation" for v in validate_surface(flipped))


def test_surface_validation_catches_missing_boundary():
    s = torus_cylinder(TORUS, 0, 1)
    partial = OrbifoldSurface(s.name, s.gamma, s.P, s.gamma_maps, s.Phi, s.Phi_sharp, s.target,
                              s.orientation, s.incoming, [])
    assert any(v.kind == "BoundaryViolation" for v in validate_surface(partial))


# -- equivariance -------------------------------------------------------------


def test_equivariance_trivial_cases():
    s = torus_cylinder(TORUS, 0, 2)
    b0 = LineBundleCocycle(GerbeCocycle.trivial(TORUS))
    r = check_equivariance(b0, s, 1)
    assert r.holds and r.lhs == r.rhs == 0
    b = LineBundleCocycle(random_gerbe(TORUS, random.Random(1)))
    r = check_equivariance(b, s, 0)
    assert r.holds and r.lhs == 0


@given(st.integers(0, 2**32), st.integers(0, 2), st.integers(1, 3), st.booleans())
def test_equivariance_exact(seed, column, layers, covered):
    rng = random.Random(seed)
    b = LineBundleCocycle(random_gerbe(TORUS, rng))
    s = torus_cylinder(TORUS, column, layers)
    if covered:
        s = cover_surface(s, 1)
    for g in TORUS.group.elements:
        r = check_equivariance(b, s, g)
        assert r.holds, r.report


def test_equivariance_detects_broken_gerbe():
    rng = random.Random(4)
    xi = random_gerbe(TORUS, rng)
    cx = TORUS.complex.cochain_complex
    s = torus_cylinder(TORUS, 0, 2)
    A = dict(xi.A)
    # an edge of the incoming ring; interior edges do not enter the identity
    t, _ = orient([(0, 0), (0, 1)])
    A[1] = A[1] + Cochain(cx, 1, {t: Fraction(1, 5)}, Q)
    bad = GerbeCocycle(TORUS, xi.B, A, xi.rho)
    assert not check_equivariance(LineBundleCocycle(bad), s, 1).holds


def _hexagon_cylinder(layers=2):
    P = cylinder_complex(6, layers)
    G = cyclic_group(2)
    maps = {g: {(i, h): ((i + 3 * g) % 6, h) for (i, h) in P.vertices} for g in G.elements}
    base = EquivariantComplex(GroupAction(P, G, maps), name="hex-cylinder")
    s = oriented_cylinder(base, 6, layers, {v: v for v in P.vertices}, "hex", G, maps, (0, 1))
    return base, s


def test_connected_twisted_surface():
    base, s = _hexagon_cylinder()
    assert validate_surface(s) == []
    b = LineBundleCocycle(random_gerbe(base, random.Random(6)))
    for g in (0, 1):
        assert check_equivariance(b, s, g).holds
    direct = sum(c * triangle_value(b.gerbe.B, *tri) for tri, c in s.orientation.coeffs.items())
    assert transport_U(b, s).log_value == mod1(direct / 2)


# -- gluing -----------------------------------------------------------------


def test_glue_two_cylinders():
    b = LineBundleCocycle(random_gerbe(TORUS, random.Random(7)))
    s1, s2 = torus_cylinder(TORUS, 0, 2, name="a"), torus_cylinder(TORUS, 2, 1, name="b")
    g = glue(s1, 0, s2, 0, {(i, 2): (i, 0) for i in range(3)})
    assert validate_surface(g) == []
    assert len(g.incoming) == len(g.outgoing) == 1
    assert transport_U(b, g).log_value == mod1(transport_U(b, s1).log_value + transport_U(b, s2).log_value)
    b0 = LineBundleCocycle(GerbeCocycle.trivial(TORUS))
    assert transport_U(b0, g).log_value == 0


def test_glue_covers():
    b = LineBundleCocycle(random_gerbe(TORUS, random.Random(17)))
    s1 = cover_surface(torus_cylinder(TORUS, 0, 1, name="a"), 1)
    s2 = cover_surface(torus_cylinder(TORUS, 1, 2, name="b"), 1)
    ident = {(j, (i, 1)): (j, (i, 0)) for j in range(2) for i in range(3)}
    g = glue(s1, 0, s2, 0, ident)
    assert validate_surface(g) == []
    assert transport_U(b, g).log_value == mod1(transport_U(b, s1).log_value + transport_U(b, s2).log_value)


def test_glue_rejects_mismatch():
    s1, s2 = torus_cylinder(TORUS, 0, 2), torus_cylinder(TORUS, 2, 1)
    with pytest.raises(BoundaryMismatch):
        glue(s1, 0, s2, 0, {(i, 2): ((i + 1) % 3, 0) for i in range(3)})
    s3 = torus_cylinder(TORUS, 1, 1)
    with pytest.raises(BoundaryMismatch):
        glue(s1, 0, s3, 0, {(i, 2): (i, 0) for i in range(3)})


def test_self_glue_preserves_transport():
    b = LineBundleCocycle(random_gerbe(TORUS, random.Random(12)))
    s = torus_cylinder(TORUS, 0, 3)
    t = self_glue(s, 0, 0, {(i, 3): (i, 0) for i in range(3)})
    assert t.closed and validate_surface(t) == []
    assert transport_U(b, t).log_value == transport_U(b, s).log_value


def test_closed_transport_is_gauge_invariant():
    rng = random.Random(13)
    xi = random_gerbe(TORUS, rng)
    t = self_glue(torus_cylinder(TORUS, 0, 3), 0, 0, {(i, 3): (i, 0) for i in range(3)})
    a = transport_U(LineBundleCocycle(xi), t).log_value
    assert a == transport_U(LineBundleCocycle(gauge_shift(xi, rng)), t).log_value


# -- Segal ------------------------------------------------------------------


def test_segal_trivial(t3):
    b = LineBundleCocycle(GerbeCocycle.trivial(t3))
    v = box_chain(t3.complex, (0, 0, 0), (1, 1, 1), 3)
    r = segal_check(b, v, boundary_surface(t3, v))
    assert r.holds and r.volume == 0


@given(st.integers(0, 2**32), st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
       st.tuples(st.integers(1, 2), st.integers(1, 2), st.integers(1, 2)))
def test_segal_random_boxes(t3, seed, origin, size):
    b = LineBundleCocycle(random_gerbe(t3, random.Random(seed)))
    v = box_chain(t3.complex, origin, size, 3)
    r = segal_check(b, v, boundary_surface(t3, v))
    assert r.holds, r.report


def test_segal_rejects_wrong_surface(t3):
    b = LineBundleCocycle(random_gerbe(t3, random.Random(2)))
    v = box_chain(t3.complex, (0, 0, 0), (1, 1, 1), 3)
    w = box_chain(t3.complex, (1, 1, 1), (1, 1, 1), 3)
    with pytest.raises(BoundaryMismatch):
        segal_check(b, v, boundary_surface(t3, w))


# -- serialization -----------------------------------------------------------


def test_loop_and_surface_json_roundtrip():
    s = cover_surface(torus_cylinder(TORUS, 0, 2), 1)
    back = OrbifoldSurface.from_json(s.to_json(), TORUS)
    assert validate_surface(back) == []
    assert back.orientation.coeffs == s.orientation.coeffs
    l = twisted_loop(twisted_hexagon_orbifold())
    back_l = OrbifoldLoop.from_json(l.to_json(), l.target)
    assert same_loop_data(back_l, l) and back_l.cycle.coeffs == l.cycle.coeffs
