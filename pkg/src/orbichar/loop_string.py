"""Loops and surfaces in ``[M/G]``, transgression and surface transport.

A loop is a circle total space ``Q`` with a free right action of a finite
group Gamma, an equivariant simplicial map ``phi: Q -> M`` and a homomorphism
``phi_sharp: Gamma -> G``.  Surfaces are the same with a compact oriented
``P`` whose boundary circles are listed as incoming or outgoing loops, and
the stored orientation chain satisfies ``d[P] = sum_in [Q] - sum_out [Q]``.

Holonomies are cycle-unit rationals:

    F(phi, g) = <phi^* A_g, [Q]> / |Gamma|    mod 1
    U(Phi)    = <Phi^* B, [P]> / |Gamma|      mod 1
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Sequence

from .chain_core import Chain, ChainError, Cochain, CoefficientRing, boundary, coboundary, mod1, pair
from .deligne import GerbeCocycle, curvature
from .orbifold import (
    EquivariantComplex,
    FiniteGroup,
    GroupAction,
    NonOrientable,
    NotPseudomanifold,
    SimplicialComplex,
    SimplicialMap,
    Violation,
    cyclic_group,
    fundamental_cycle,
    group_pullback,
    orient,
    pseudomanifold_info,
    pullback,
    trivial_group,
    validate_action,
)

Q_ = CoefficientRing.RATIONALS


class LoopError(ChainError):
    pass


class InvalidLoop(LoopError):
    pass


class InvalidSurface(LoopError):
    pass


class BoundaryMismatch(LoopError):
    pass


def _free_violations(action: GroupAction) -> list[Violation]:
    out = []
    G = action.group
    cx = action.complex
    for g in G.elements:
        if g == G.identity:
            continue
        for k in range(cx.dim + 1):
            for s in cx.simplices[k]:
                t, _ = action.act(s, g)
                if t == s:
                    out.append(Violation("FreeActionViolation", f"element {G.names[g]} fixes {s!r}"))
                    break
    return out


def _hom_violations(gamma: FiniteGroup, G: FiniteGroup, sharp: Sequence[int]) -> list[Violation]:
    if len(sharp) != gamma.order:
        return [Violation("HomomorphismViolation", "phi_sharp must have one entry per element of Gamma")]
    out = []
    if sharp[gamma.identity] != G.identity:
        out.append(Violation("HomomorphismViolation", "identity not sent to identity"))
    for a, b in itertools.product(gamma.elements, repeat=2):
        if sharp[gamma.mul(a, b)] != G.mul(sharp[a], sharp[b]):
            out.append(Violation("HomomorphismViolation", f"phi_sharp fails on ({gamma.names[a]},{gamma.names[b]})"))
            break
    return out


def _equivariance_violations(action: GroupAction, phi: dict, target: GroupAction, sharp: Sequence[int]) -> list[Violation]:
    out = []
    for tau in action.group.elements:
        for x in action.complex.vertices:
            lhs = phi[action.act_vertex(x, tau)]
            rhs = target.act_vertex(phi[x], sharp[tau])
            if lhs != rhs:
                out.append(Violation("EquivarianceViolation", f"phi(x.tau) != phi(x).phi_sharp(tau) at x={x!r}, tau={action.group.names[tau]}"))
    return out


def equivariant_orientation(cx: SimplicialComplex, action: GroupAction, relative: bool = False,
                            seed: tuple | None = None) -> Chain:
    """Fundamental chain whose orientation is transported between components by the action.

    Raises NonOrientable when the action reverses the orientation of a component.
    """
    base = fundamental_cycle(cx, relative=relative, seed=seed)
    d = cx.dim
    comp = _components(cx)
    fixed: dict = {}
    order = sorted(set(comp.values()), key=lambda c: (0 if seed and comp[tuple(sorted(seed[0]))] == c else 1, c))
    for c in order:
        if any(comp[s] == c for s in fixed):
            continue
        rep = {s: v for s, v in base.coeffs.items() if comp[s] == c}
        for tau in action.group.elements:
            for s, v in rep.items():
                t, sign = action.act(s, tau)
                want = v * sign
                if t in fixed and fixed[t] != want:
                    raise NonOrientable("the action does not preserve orientation")
                fixed[t] = want
    return Chain(cx.cochain_complex, d, fixed)


def _components(cx: SimplicialComplex) -> dict:
    """Top simplex -> index of its connected component (through shared vertices)."""
    parent = {v: v for v in cx.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in cx.simplices[1] if cx.dim >= 1 else ():
        a, b = find(e[0]), find(e[1])
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = sorted({find(v) for v in cx.vertices})
    index = {r: i for i, r in enumerate(roots)}
    return {s: index[find(s[0])] for s in cx.simplices[cx.dim]}


# ---------------------------------------------------------------------------
# Loops


@dataclass
class OrbifoldLoop:
    name: str
    gamma: FiniteGroup
    Q: SimplicialComplex
    gamma_maps: dict
    phi: dict
    phi_sharp: tuple
    target: EquivariantComplex
    orientation: Chain | None = None

    def __post_init__(self):
        self.phi_sharp = tuple(self.phi_sharp)
        if self.orientation is None:
            try:
                self.orientation = equivariant_orientation(self.Q, self.gamma_action)
            except (NonOrientable, NotPseudomanifold, KeyError):
                self.orientation = None

    @cached_property
    def gamma_action(self) -> GroupAction:
        return GroupAction(self.Q, self.gamma, self.gamma_maps)

    @cached_property
    def phi_map(self) -> SimplicialMap:
        return SimplicialMap(self.Q, self.target.complex, self.phi)

    @property
    def cycle(self) -> Chain:
        if self.orientation is None:
            raise InvalidLoop(f"loop {self.name} has no orientation")
        return self.orientation

    def to_json(self) -> dict:
        from .orbifold import _jsonable
        return {
            "name": self.name,
            "gamma": self.gamma.to_json(),
            "total_space": self.Q.to_json(),
            "action": {self.gamma.names[t]: [[_jsonable(v), _jsonable(m[v])] for v in self.Q.vertices]
                       for t, m in self.gamma_maps.items()},
            "map": [[_jsonable(v), _jsonable(self.phi[v])] for v in self.Q.vertices],
            "phi_sharp": {self.gamma.names[t]: self.target.group.names[g] for t, g in enumerate(self.phi_sharp)},
            "orientation": [[[_jsonable(v) for v in s], c] for s, c in sorted(self.cycle.coeffs.items())],
        }

    @classmethod
    def from_json(cls, obj: dict, target: EquivariantComplex) -> OrbifoldLoop:
        from .orbifold import _unjson
        gamma = FiniteGroup.from_json(obj["gamma"])
        Q = SimplicialComplex.from_json(obj["total_space"])
        maps = {gamma.element(t): {_unjson(a): _unjson(b) for a, b in pairs} for t, pairs in obj["action"].items()}
        phi = {_unjson(a): _unjson(b) for a, b in obj["map"]}
        sharp = [target.group.identity] * gamma.order
        for t, g in obj["phi_sharp"].items():
            sharp[gamma.element(t)] = target.group.element(g)
        orientation = None
        if "orientation" in obj:
            orientation = Chain(Q.cochain_complex, Q.dim, {tuple(_unjson(v) for v in s): c for s, c in obj["orientation"]})
        return cls(obj.get("name", "loop"), gamma, Q, maps, phi, tuple(sharp), target, orientation)


def validate_loop(l: OrbifoldLoop) -> list[Violation]:
    report = [Violation("GroupViolation", p) for p in l.gamma.validate()]
    if report:
        return report
    try:
        pseudomanifold_info(l.Q, 1)
    except NotPseudomanifold as exc:
        return [Violation("NotACircle", str(exc))]
    if l.Q.dim != 1:
        return [Violation("NotACircle", "total space must be one-dimensional")]
    report += validate_action(l.gamma_action)
    if report:
        return report
    report += _free_violations(l.gamma_action)
    comps = set(_components(l.Q).values())
    orbit = {0}
    comp = _components(l.Q)
    rep = [s for s in l.Q.simplices[1] if comp[s] == 0][0]
    for t in l.gamma.elements:
        orbit.add(comp[l.gamma_action.act(rep, t)[0]])
    if orbit != comps:
        report.append(Violation("NotACircle", "Gamma does not permute the components transitively"))
    report += _hom_violations(l.gamma, l.target.group, l.phi_sharp)
    report += l.phi_map.validate()
    if report:
        return report
    report += _equivariance_violations(l.gamma_action, l.phi, l.target.action, l.phi_sharp)
    if l.orientation is None:
        report.append(Violation("OrientationViolation", "no Gamma-invariant orientation"))
    else:
        report += _orientation_violations(l.gamma_action, l.orientation, closed=True)
    return report


def _orientation_violations(action: GroupAction, z: Chain, closed: bool) -> list[Violation]:
    out = []
    cx = action.complex
    d = cx.dim
    if set(z.coeffs) != set(cx.simplices[d]) or any(abs(v) != 1 for v in z.coeffs.values()):
        out.append(Violation("OrientationViolation", "orientation must be +-1 on every top simplex"))
        return out
    if closed and not boundary(z).is_zero():
        out.append(Violation("OrientationViolation", "orientation is not a cycle"))
    for tau in action.group.elements:
        for s, v in z.coeffs.items():
            t, sign = action.act(s, tau)
            if z.coeffs.get(t) != v * sign:
                out.append(Violation("OrientationViolation", f"Gamma element {action.group.names[tau]} reverses orientation at {s!r}"))
                return out
    return out


def act_on_loop(l: OrbifoldLoop, h: int) -> OrbifoldLoop:
    """``phi -> phi . h`` and ``phi_sharp -> h^-1 phi_sharp h``."""
    G = l.target.group
    a = l.target.action
    hinv = G.inv(h)
    phi = {x: a.act_vertex(y, h) for x, y in l.phi.items()}
    sharp = tuple(G.mul(G.mul(hinv, g), h) for g in l.phi_sharp)
    return OrbifoldLoop(f"{l.name}.{G.names[h]}", l.gamma, l.Q, l.gamma_maps, phi, sharp, l.target, l.orientation)


def same_loop_data(a: OrbifoldLoop, b: OrbifoldLoop) -> bool:
    return (a.Q.simplices == b.Q.simplices and a.phi == b.phi and a.phi_sharp == b.phi_sharp
            and a.gamma_maps == b.gamma_maps)


# ---------------------------------------------------------------------------
# Transgression


@dataclass(frozen=True)
class LineBundleCocycle:
    """The transgressed cocycle ``F`` of a validated gerbe."""

    gerbe: GerbeCocycle

    def __call__(self, l: OrbifoldLoop, g: int) -> Fraction:
        return transgress_F(self, l, g)


def loop_integral(c: Cochain, l: OrbifoldLoop) -> Fraction:
    """``<phi^* c, [Q]>`` before dividing by ``|Gamma|``."""
    return pair(pullback(l.phi_map, c), l.cycle)


def transgress_F(b: LineBundleCocycle, l: OrbifoldLoop, g: int) -> Fraction:
    if l.target is not b.gerbe.base:
        raise InvalidLoop("loop does not map into the gerbe's orbifold")
    if l.orientation is None:
        raise InvalidLoop(f"loop {l.name} is not oriented")
    return mod1(loop_integral(b.gerbe.A[g], l) / l.gamma.order)


def groupoid_defect(b: LineBundleCocycle, l: OrbifoldLoop, g: int, h: int) -> Fraction:
    """``F(phi, g) + F(phi.g, h) - F(phi, gh)`` mod 1; zero when the groupoid identity holds."""
    G = l.target.group
    return mod1(transgress_F(b, l, g) + transgress_F(b, act_on_loop(l, g), h) - transgress_F(b, l, G.mul(g, h)))


def winding_obstruction(b: LineBundleCocycle, l: OrbifoldLoop, g: int, h: int) -> int:
    """Integer ``<phi^*(A_g + g^*A_h - A_gh - d rho~), [Q]>``.

    The groupoid identity holds exactly when this is divisible by ``|Gamma|``.
    """
    xi = b.gerbe
    a = xi.base.action
    G = xi.base.group
    n = xi.A[g] + group_pullback(a, g, xi.A[h]) - xi.A[G.mul(g, h)] - coboundary(xi.rho[(g, h)].as_ring(Q_))
    v = loop_integral(n, l)
    if v.denominator != 1:
        raise InvalidLoop("gerbe relation fails: defect is not integral")
    return int(v)


# ---------------------------------------------------------------------------
# Surfaces


@dataclass
class BoundaryLoop:
    loop: OrbifoldLoop
    inclusion: dict  # Q vertex -> P vertex


@dataclass
class OrbifoldSurface:
    name: str
    gamma: FiniteGroup
    P: SimplicialComplex
    gamma_maps: dict
    Phi: dict
    Phi_sharp: tuple
    target: EquivariantComplex
    orientation: Chain
    incoming: list = field(default_factory=list)
    outgoing: list = field(default_factory=list)

    @cached_property
    def gamma_action(self) -> GroupAction:
        return GroupAction(self.P, self.gamma, self.gamma_maps)

    @cached_property
    def Phi_map(self) -> SimplicialMap:
        return SimplicialMap(self.P, self.target.complex, self.Phi)

    @property
    def closed(self) -> bool:
        return not self.incoming and not self.outgoing

    def to_json(self) -> dict:
        from .orbifold import _jsonable
        def bl(x: BoundaryLoop) -> dict:
            return {"loop": x.loop.to_json(), "inclusion": [[_jsonable(a), _jsonable(b)] for a, b in sorted(x.inclusion.items())]}
        return {
            "name": self.name,
            "gamma": self.gamma.to_json(),
            "total_space": self.P.to_json(),
            "action": {self.gamma.names[t]: [[_jsonable(v), _jsonable(m[v])] for v in self.P.vertices]
                       for t, m in self.gamma_maps.items()},
            "map": [[_jsonable(v), _jsonable(self.Phi[v])] for v in self.P.vertices],
            "phi_sharp": {self.gamma.names[t]: self.target.group.names[g] for t, g in enumerate(self.Phi_sharp)},
            "orientation": [[[_jsonable(v) for v in s], c] for s, c in sorted(self.orientation.coeffs.items())],
            "boundary": {"incoming": [bl(x) for x in self.incoming], "outgoing": [bl(x) for x in self.outgoing]},
        }

    @classmethod
    def from_json(cls, obj: dict, target: EquivariantComplex) -> OrbifoldSurface:
        from .orbifold import _unjson
        gamma = FiniteGroup.from_json(obj["gamma"])
        P = SimplicialComplex.from_json(obj["total_space"])
        maps = {gamma.element(t): {_unjson(a): _unjson(b) for a, b in pairs} for t, pairs in obj["action"].items()}
        Phi = {_unjson(a): _unjson(b) for a, b in obj["map"]}
        sharp = [target.group.identity] * gamma.order
        for t, g in obj["phi_sharp"].items():
            sharp[gamma.element(t)] = target.group.element(g)
        orient_ = Chain(P.cochain_complex, P.dim, {tuple(_unjson(v) for v in s): c for s, c in obj["orientation"]})

        def bl(x: dict) -> BoundaryLoop:
            return BoundaryLoop(OrbifoldLoop.from_json(x["loop"], target), {_unjson(a): _unjson(b) for a, b in x["inclusion"]})
        bd = obj.get("boundary", {})
        return cls(obj.get("name", "surface"), gamma, P, maps, Phi, tuple(sharp), target, orient_,
                   [bl(x) for x in bd.get("incoming", [])], [bl(x) for x in bd.get("outgoing", [])])


def _pushed_cycle(x: BoundaryLoop, P: SimplicialComplex) -> Chain:
    out = {}
    for s, v in x.loop.cycle.coeffs.items():
        t, sign = orient([x.inclusion[u] for u in s])
        if sign == 0:
            raise BoundaryMismatch("boundary inclusion collapses an edge")
        out[t] = out.get(t, 0) + sign * v
    return Chain(P.cochain_complex, 1, out)


def validate_surface(s: OrbifoldSurface) -> list[Violation]:
    report = [Violation("GroupViolation", p) for p in s.gamma.validate()]
    if report:
        return report
    try:
        info = pseudomanifold_info(s.P, 2, relative=True)
    except NotPseudomanifold as exc:
        return [Violation("NotASurface", str(exc))]
    report += validate_action(s.gamma_action)
    if report:
        return report
    report += _free_violations(s.gamma_action)
    report += _hom_violations(s.gamma, s.target.group, s.Phi_sharp)
    report += s.Phi_map.validate()
    if report:
        return report
    report += _equivariance_violations(s.gamma_action, s.Phi, s.target.action, s.Phi_sharp)
    report += _orientation_violations(s.gamma_action, s.orientation, closed=False)
    if report:
        return report
    expected = Chain(s.P.cochain_complex, 1, {})
    covered: set = set()
    for sign, group in ((1, s.incoming), (-1, s.outgoing)):
        for x in group:
            lr = validate_loop(x.loop)
            report += [Violation(v.kind, f"boundary loop {x.loop.name}: {v.detail}") for v in lr]
            if lr:
                continue
            if x.loop.gamma.table != s.gamma.table:
                report.append(Violation("BoundaryViolation", f"loop {x.loop.name} has a different Gamma"))
                continue
            if x.loop.phi_sharp != s.Phi_sharp:
                report.append(Violation("BoundaryViolation", f"loop {x.loop.name} has different phi_sharp"))
            for v in x.loop.Q.vertices:
                p = x.inclusion.get(v)
                if p is None or not s.P.contains((p,)):
                    report.append(Violation("BoundaryViolation", f"loop {x.loop.name} vertex {v!r} has no image"))
                    break
                if s.Phi[p] != x.loop.phi[v]:
                    report.append(Violation("BoundaryViolation", f"loop {x.loop.name} map disagrees with Phi at {v!r}"))
                    break
                for tau in s.gamma.elements:
                    if x.inclusion[x.loop.gamma_action.act_vertex(v, tau)] != s.gamma_action.act_vertex(p, tau):
                        report.append(Violation("BoundaryViolation", f"loop {x.loop.name} inclusion is not Gamma-equivariant"))
                        break
            if report:
                continue
            try:
                pushed = _pushed_cycle(x, s.P)
            except BoundaryMismatch as exc:
                report.append(Violation("BoundaryViolation", str(exc)))
                continue
            if covered & set(pushed.coeffs):
                report.append(Violation("BoundaryViolation", f"loop {x.loop.name} overlaps another boundary loop"))
            covered |= set(pushed.coeffs)
            expected = expected + pushed.scale(sign)
    if report:
        return report
    if covered != set(info.boundary_faces):
        report.append(Violation("BoundaryViolation", "listed loops do not cover the boundary exactly"))
    if boundary(s.orientation) != expected:
        report.append(Violation("OrientationViolation", "d[P] != sum_in [Q] - sum_out [Q]"))
    return report


@dataclass(frozen=True)
class TransportOperator:
    log_value: Fraction
    source: tuple = ()
    target: tuple = ()

    def compose(self, other: TransportOperator) -> TransportOperator:
        return TransportOperator(mod1(self.log_value + other.log_value), self.source + other.source, self.target + other.target)


def surface_integral(c: Cochain, s: OrbifoldSurface) -> Fraction:
    """``<Phi^* c, [P]>`` before dividing by ``|Gamma|``."""
    return pair(pullback(s.Phi_map, c), s.orientation)


def transport_U(b: LineBundleCocycle, s: OrbifoldSurface) -> TransportOperator:
    if s.target is not b.gerbe.base:
        raise InvalidSurface("surface does not map into the gerbe's orbifold")
    val = surface_integral(b.gerbe.B, s) / s.gamma.order
    return TransportOperator(mod1(val), tuple(x.loop.name for x in s.incoming), tuple(x.loop.name for x in s.outgoing))


@dataclass
class EquivarianceCheck:
    lhs: Fraction
    rhs: Fraction
    report: list

    @property
    def holds(self) -> bool:
        return not self.report


def check_equivariance(b: LineBundleCocycle, s: OrbifoldSurface, g: int) -> EquivarianceCheck:
    """``<Phi^*(g^*B - B), [P]> = sum_in <phi^*A_g, [Q]> - sum_out <phi^*A_g, [Q]>`` exactly."""
    xi = b.gerbe
    a = xi.base.action
    lhs = surface_integral(group_pullback(a, g, xi.B) - xi.B, s)
    rhs = sum((loop_integral(xi.A[g], x.loop) for x in s.incoming), Fraction(0))
    rhs -= sum((loop_integral(xi.A[g], x.loop) for x in s.outgoing), Fraction(0))
    report = []
    if lhs != rhs:
        report.append(Violation("EquivarianceViolation", f"surface side {lhs} != loop side {rhs} for g={xi.base.group.names[g]}"))
    return EquivarianceCheck(lhs, rhs, report)


def act_on_surface(s: OrbifoldSurface, h: int) -> OrbifoldSurface:
    G = s.target.group
    a = s.target.action
    hinv = G.inv(h)
    Phi = {x: a.act_vertex(y, h) for x, y in s.Phi.items()}
    sharp = tuple(G.mul(G.mul(hinv, g), h) for g in s.Phi_sharp)
    inc = [BoundaryLoop(act_on_loop(x.loop, h), x.inclusion) for x in s.incoming]
    out = [BoundaryLoop(act_on_loop(x.loop, h), x.inclusion) for x in s.outgoing]
    return OrbifoldSurface(f"{s.name}.{G.names[h]}", s.gamma, s.P, s.gamma_maps, Phi, sharp, s.target,
                           s.orientation, inc, out)


# ---------------------------------------------------------------------------
# Gluing


def _check_ident(out: BoundaryLoop, inc: BoundaryLoop, ident: dict) -> None:
    lo, li = out.loop, inc.loop
    if set(ident) != set(lo.Q.vertices) or set(ident.values()) != set(li.Q.vertices):
        raise BoundaryMismatch("identification is not a bijection of loop vertices")
    if lo.gamma.table != li.gamma.table:
        raise BoundaryMismatch("loops have different Gamma")
    if lo.phi_sharp != li.phi_sharp:
        raise BoundaryMismatch("phi_sharp data disagree")
    for x in lo.Q.vertices:
        if li.phi[ident[x]] != lo.phi[x]:
            raise BoundaryMismatch(f"maps to M disagree at {x!r}")
        for tau in lo.gamma.elements:
            if ident[lo.gamma_action.act_vertex(x, tau)] != li.gamma_action.act_vertex(ident[x], tau):
                raise BoundaryMismatch("identification is not Gamma-equivariant")
    pushed = {}
    for s, v in lo.cycle.coeffs.items():
        t, sign = orient([ident[u] for u in s])
        if sign == 0 or not li.Q.contains(t):
            raise BoundaryMismatch("identification is not simplicial")
        pushed[t] = sign * v
    if pushed != li.cycle.coeffs:
        raise BoundaryMismatch("identification reverses orientation")


def glue(s1: OrbifoldSurface, out_index: int, s2: OrbifoldSurface, in_index: int, ident: dict) -> OrbifoldSurface:
    """Identify outgoing loop ``out_index`` of ``s1`` with incoming loop ``in_index`` of ``s2``."""
    if s1.target is not s2.target:
        raise BoundaryMismatch("surfaces map into different orbifolds")
    if s1.gamma.table != s2.gamma.table or s1.Phi_sharp != s2.Phi_sharp:
        raise BoundaryMismatch("surfaces carry different Gamma data")
    out, inc = s1.outgoing[out_index], s2.incoming[in_index]
    _check_ident(out, inc, ident)
    merge = {inc.inclusion[ident[x]]: ("a", out.inclusion[x]) for x in out.loop.Q.vertices}
    rename = {("a", v): ("a", v) for v in s1.P.vertices}
    for v in s2.P.vertices:
        rename[("b", v)] = merge.get(v, ("b", v))
    faces = [[rename[("a", v)] for v in t] for t in s1.P.simplices[2]] + \
            [[rename[("b", v)] for v in t] for t in s2.P.simplices[2]]
    return _assemble(f"{s1.name}+{s2.name}", s1, s2, rename, faces,
                     [(s1, "a", x) for x in s1.incoming] + [(s2, "b", x) for i, x in enumerate(s2.incoming) if i != in_index],
                     [(s1, "a", x) for i, x in enumerate(s1.outgoing) if i != out_index] + [(s2, "b", x) for x in s2.outgoing])


def self_glue(s: OrbifoldSurface, out_index: int, in_index: int, ident: dict) -> OrbifoldSurface:
    """Identify an outgoing loop of ``s`` with one of its incoming loops."""
    out, inc = s.outgoing[out_index], s.incoming[in_index]
    _check_ident(out, inc, ident)
    merge = {inc.inclusion[ident[x]]: ("a", out.inclusion[x]) for x in out.loop.Q.vertices}
    rename = {("a", v): merge.get(v, ("a", v)) for v in s.P.vertices}
    faces = [[rename[("a", v)] for v in t] for t in s.P.simplices[2]]
    return _assemble(f"{s.name}*", s, None, rename, faces,
                     [(s, "a", x) for i, x in enumerate(s.incoming) if i != in_index],
                     [(s, "a", x) for i, x in enumerate(s.outgoing) if i != out_index])


def _assemble(name, s1, s2, rename, faces, incoming, outgoing) -> OrbifoldSurface:
    labels = sorted(set(rename.values()), key=repr)
    final = {lab: i for i, lab in enumerate(labels)}
    full = {k: final[v] for k, v in rename.items()}
    P = SimplicialComplex([[final[v] for v in f] for f in faces], name=name)
    if P.count(2) != len(faces) or any(len(set(f)) < 3 for f in faces):
        raise BoundaryMismatch("gluing collapses triangles")
    sources = [("a", s1)] + ([("b", s2)] if s2 is not None else [])
    Phi, maps, orient_vals = {}, {t: {} for t in s1.gamma.elements}, {}
    for tag, s in sources:
        for v in s.P.vertices:
            w = full[(tag, v)]
            if w in Phi and Phi[w] != s.Phi[v]:
                raise BoundaryMismatch("maps to M disagree after gluing")
            Phi[w] = s.Phi[v]
            for t in s.gamma.elements:
                img = full[(tag, s.gamma_maps[t][v])]
                if maps[t].get(w, img) != img:
                    raise BoundaryMismatch("Gamma actions disagree after gluing")
                maps[t][w] = img
        for tri, c in s.orientation.coeffs.items():
            t, sign = orient([full[(tag, v)] for v in tri])
            orient_vals[t] = sign * c

    def moved(entries):
        out = []
        for s, tag, x in entries:
            out.append(BoundaryLoop(x.loop, {q: full[(tag, p)] for q, p in x.inclusion.items()}))
        return out

    return OrbifoldSurface(name, s1.gamma, P, maps, Phi, s1.Phi_sharp, s1.target,
                           Chain(P.cochain_complex, 2, orient_vals), moved(incoming), moved(outgoing))


# ---------------------------------------------------------------------------
# Segal's formula


@dataclass
class SegalCheck:
    volume: Fraction
    transport: Fraction
    report: list

    @property
    def holds(self) -> bool:
        return not self.report


def segal_check(b: LineBundleCocycle, v: Chain, s: OrbifoldSurface) -> SegalCheck:
    """``<omega, v> = U(s)`` mod 1 for a closed surface with ``Phi_*[P] = |Gamma| dv``."""
    xi = b.gerbe
    M = xi.base.complex
    if not s.closed:
        raise BoundaryMismatch("Segal's formula needs a closed surface")
    if v.space is not M.cochain_complex or v.degree != 3:
        raise BoundaryMismatch("v must be a 3-chain on M")
    pushed = s.Phi_map.push(s.orientation)
    if pushed != boundary(v).scale(s.gamma.order):
        raise BoundaryMismatch("surface does not realize the boundary of v")
    omega = curvature(xi)
    vol = mod1(pair(omega, v))
    tr = transport_U(b, s).log_value
    report = [] if vol == tr else [Violation("SegalViolation", f"volume {vol} != transport {tr}")]
    return SegalCheck(vol, tr, report)


# ---------------------------------------------------------------------------
# Builders


def _identity_gamma(vertices) -> tuple[FiniteGroup, dict]:
    return trivial_group(), {0: {v: v for v in vertices}}


def loop_from_walk(target: EquivariantComplex, walk: Sequence[Hashable], name: str = "loop") -> OrbifoldLoop:
    """Trivial-Gamma loop tracing the closed walk ``walk[0] -> walk[1] -> ... -> walk[0]``."""
    n = len(walk)
    Q = SimplicialComplex([[i, (i + 1) % n] for i in range(n)], name=name)
    gamma, maps = _identity_gamma(Q.vertices)
    orientation = _cycle_orientation(Q, list(range(n)))
    return OrbifoldLoop(name, gamma, Q, maps, {i: walk[i] for i in range(n)}, (target.group.identity,), target, orientation)


def _cycle_orientation(Q: SimplicialComplex, order: Sequence[Hashable]) -> Chain:
    vals = {}
    n = len(order)
    for i in range(n):
        t, sign = orient([order[i], order[(i + 1) % n]])
        vals[t] = sign
    return Chain(Q.cochain_complex, 1, vals)


def cover_loop(l: OrbifoldLoop, g: int, m: int | None = None) -> OrbifoldLoop:
    """Trivial ``Z/m``-cover of a trivial-Gamma loop with ``phi_sharp(1) = g``."""
    G = l.target.group
    a = l.target.action
    if m is None:
        m, x = 1, g
        while x != G.identity:
            x, m = G.mul(x, g), m + 1
    powers = [G.identity]
    for _ in range(m - 1):
        powers.append(G.mul(powers[-1], g))
    if G.mul(powers[-1], g) != G.identity:
        raise InvalidLoop("g^m must be the identity")
    gamma = cyclic_group(m)
    Q = SimplicialComplex([[(j, u) for u in s] for j in range(m) for s in l.Q.simplices[1]], name=f"{l.name}x{m}")
    maps = {k: {(j, u): ((j + k) % m, u) for j in range(m) for u in l.Q.vertices} for k in range(m)}
    phi = {(j, u): a.act_vertex(l.phi[u], powers[j]) for j in range(m) for u in l.Q.vertices}
    orientation = Chain(Q.cochain_complex, 1, {tuple((j, u) for u in s): c for j in range(m) for s, c in l.cycle.coeffs.items()})
    return OrbifoldLoop(f"{l.name}^{G.names[g]}", gamma, Q, maps, phi, tuple(powers), l.target, orientation)


def twisted_hexagon_orbifold() -> EquivariantComplex:
    """Hexagon with Z/2 rotating by three steps (a free action)."""
    from .orbifold import rotation_action
    return EquivariantComplex(rotation_action(6, 3, 2), name="hexagon-z2")


def twisted_loop(target: EquivariantComplex) -> OrbifoldLoop:
    """Identity hexagon over the hexagon orbifold with the nontrivial phi_sharp."""
    Q = target.complex
    gamma = cyclic_group(2)
    maps = {t: dict(target.action.vertex_maps[t]) for t in gamma.elements}
    return OrbifoldLoop("twisted", gamma, Q, maps, {v: v for v in Q.vertices}, (0, 1), target,
                        _cycle_orientation(Q, list(range(6))))


def surface_from_map(target: EquivariantComplex, P: SimplicialComplex, Phi: dict, name: str,
                     incoming: Sequence[Sequence[Sequence[Hashable]]] = (),
                     outgoing: Sequence[Sequence[Sequence[Hashable]]] = (),
                     gamma: FiniteGroup | None = None, gamma_maps: dict | None = None,
                     Phi_sharp: tuple | None = None, seed: tuple | None = None) -> OrbifoldSurface:
    """Surface whose boundary loops are given as lists of rings (cyclic vertex lists in P).

    Each loop's own vertices are the P labels it passes through, and its
    orientation is read off ``d[P]``.
    """
    if gamma is None:
        gamma, gamma_maps = _identity_gamma(P.vertices)
        Phi_sharp = (target.group.identity,)
    action = GroupAction(P, gamma, gamma_maps)
    orientation = equivariant_orientation(P, action, relative=True, seed=seed)
    bd = boundary(orientation)

    def make(rings, sign, tag):
        loops = []
        for k, comps in enumerate(rings):
            Q = SimplicialComplex([[c[i], c[(i + 1) % len(c)]] for c in comps for i in range(len(c))], name=f"{name}-{tag}{k}")
            vals = {e: sign * bd.coeffs.get(e, 0) for e in Q.simplices[1]}
            lmaps = {t: {v: gamma_maps[t][v] for v in Q.vertices} for t in gamma.elements}
            loop = OrbifoldLoop(f"{name}-{tag}{k}", gamma, Q, lmaps, {v: Phi[v] for v in Q.vertices},
                                tuple(Phi_sharp), target, Chain(Q.cochain_complex, 1, vals))
            loops.append(BoundaryLoop(loop, {v: v for v in Q.vertices}))
        return loops

    return OrbifoldSurface(name, gamma, P, gamma_maps, Phi, tuple(Phi_sharp), target, orientation,
                           make(incoming, 1, "in"), make(outgoing, -1, "out"))


def oriented_cylinder(target: EquivariantComplex, n: int, layers: int, Phi: dict, name: str,
                      gamma: FiniteGroup | None = None, gamma_maps: dict | None = None,
                      Phi_sharp: tuple | None = None) -> OrbifoldSurface:
    """``n``-gon cylinder with incoming bottom ring and outgoing top ring."""
    from .orbifold import cylinder_complex
    P = cylinder_complex(n, layers)
    bottom = [[(i, 0) for i in range(n)]]
    top = [[(i, layers) for i in range(n)]]
    # seed chosen so that the bottom ring appears positively in d[P]
    seed_tri = ((0, 0), (1, 0), (1, 1))
    s = surface_from_map(target, P, Phi, name, [bottom], [top], gamma, gamma_maps, Phi_sharp, seed=(seed_tri, 1))
    ring = s.incoming[0].loop.cycle
    e = tuple(sorted(((0, 0), (1, 0))))
    if ring.coeffs.get(e) != 1:
        s = surface_from_map(target, P, Phi, name, [bottom], [top], gamma, gamma_maps, Phi_sharp, seed=(seed_tri, -1))
    return s


def torus_cylinder(target: EquivariantComplex, column: int, layers: int, n: int = 3, name: str = "cyl") -> OrbifoldSurface:
    """Meridian ``b -> (column, b)`` swept ``layers`` steps in the first coordinate of an n x n torus."""
    from .orbifold import cylinder_complex
    P = cylinder_complex(n, layers)
    Phi = {(i, h): ((column + h) % n, i) for (i, h) in P.vertices}
    return oriented_cylinder(target, n, layers, Phi, name)


def cover_surface(s: OrbifoldSurface, g: int, m: int | None = None) -> OrbifoldSurface:
    """Trivial ``Z/m``-cover of a trivial-Gamma surface with ``Phi_sharp(1) = g``."""
    G = s.target.group
    a = s.target.action
    if s.gamma.order != 1:
        raise InvalidSurface("cover_surface expects a trivial-Gamma surface")
    if m is None:
        m, x = 1, g
        while x != G.identity:
            x, m = G.mul(x, g), m + 1
    powers = [G.identity]
    for _ in range(m - 1):
        powers.append(G.mul(powers[-1], g))
    gamma = cyclic_group(m)
    P = SimplicialComplex([[(j, u) for u in t] for j in range(m) for t in s.P.simplices[2]], name=f"{s.name}x{m}")
    maps = {k: {(j, u): ((j + k) % m, u) for j in range(m) for u in s.P.vertices} for k in range(m)}
    Phi = {(j, u): a.act_vertex(s.Phi[u], powers[j]) for j in range(m) for u in s.P.vertices}
    orientation = Chain(P.cochain_complex, 2, {tuple((j, u) for u in t): c for j in range(m) for t, c in s.orientation.coeffs.items()})

    def lift(x: BoundaryLoop) -> BoundaryLoop:
        cl = cover_loop(x.loop, g, m)
        return BoundaryLoop(cl, {(j, u): (j, x.inclusion[u]) for j in range(m) for u in x.loop.Q.vertices})

    return OrbifoldSurface(f"{s.name}^{G.names[g]}", gamma, P, maps, Phi, tuple(powers), s.target, orientation,
                           [lift(x) for x in s.incoming], [lift(x) for x in s.outgoing])


def closed_surface_from_map(target: EquivariantComplex, P: SimplicialComplex, Phi: dict, name: str,
                            seed: tuple | None = None) -> OrbifoldSurface:
    return surface_from_map(target, P, Phi, name, seed=seed)


def box_chain(M: SimplicialComplex, origin: Sequence[int], size: Sequence[int], n: int) -> Chain:
    """Sum of the positively oriented tetrahedra of a box of cubes in the cube-grid 3-torus."""
    from .orbifold import orient as _orient
    vals = {}
    for off in itertools.product(*(range(s) for s in size)):
        base = [origin[k] + off[k] for k in range(3)]
        for perm in itertools.permutations(range(3)):
            v = list(base)
            path = [tuple(x % n for x in v)]
            for axis in perm:
                v[axis] += 1
                path.append(tuple(x % n for x in v))
            t, sign = _orient(path)
            vals[t] = vals.get(t, 0) + sign * _perm_sign(perm)
    return Chain(M.cochain_complex, 3, vals)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def boundary_surface(target: EquivariantComplex, v: Chain, name: str = "dv") -> OrbifoldSurface:
    """Closed surface: the support of ``dv`` mapped by inclusion, oriented by ``dv``."""
    bd = boundary(v)
    if any(abs(c) != 1 for c in bd.coeffs.values()):
        raise BoundaryMismatch("boundary is not a +-1 chain")
    P = SimplicialComplex(list(bd.coeffs), name=name)
    gamma, maps = _identity_gamma(P.vertices)
    orientation = Chain(P.cochain_complex, 2, dict(bd.coeffs))
    return OrbifoldSurface(name, gamma, P, maps, {u: u for u in P.vertices}, (target.group.identity,),
                           target, orientation)


def random_walk_loop(target: EquivariantComplex, rng: random.Random, length: int = 6, name: str = "walk") -> OrbifoldLoop:
    """Closed walk on the 1-skeleton: random steps out, then the same steps back in reverse."""
    M = target.complex
    nbrs: dict = {v: [] for v in M.vertices}
    for a, b in M.simplices[1]:
        nbrs[a].append(b)
        nbrs[b].append(a)
    for v in nbrs:
        nbrs[v].sort(key=repr)
    while True:
        start = rng.choice(M.vertices)
        walk = [start]
        for _ in range(length - 1):
            walk.append(rng.choice(nbrs[walk[-1]]))
        # close up along a shortest path back to the start
        path = _shortest_path(nbrs, walk[-1], start)
        full = walk + path[1:-1]
        if len(full) >= 3:
            return loop_from_walk(target, full, name)


def _shortest_path(nbrs: dict, a, b) -> list:
    from collections import deque
    prev = {a: None}
    dq = deque([a])
    while dq:
        x = dq.popleft()
        if x == b:
            break
        for y in nbrs[x]:
            if y not in prev:
                prev[y] = x
                dq.append(y)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def reparametrize(s: OrbifoldSurface, relabel: dict, name: str | None = None) -> OrbifoldSurface:
    """Precompose with the simplicial isomorphism ``P' -> P`` inverse to ``relabel``.

    ``relabel`` must be a bijection on vertices; the Gamma action is conjugated
    and the boundary identifications follow along.
    """
    if sorted(map(repr, relabel)) != sorted(map(repr, s.P.vertices)) or len(set(relabel.values())) != len(relabel):
        raise BoundaryMismatch("relabel must be a bijection of the vertices of P")
    P = SimplicialComplex([[relabel[v] for v in t] for t in s.P.simplices[2]], name=name or f"{s.name}'")
    maps = {t: {relabel[v]: relabel[m[v]] for v in s.P.vertices} for t, m in s.gamma_maps.items()}
    Phi = {relabel[v]: s.Phi[v] for v in s.P.vertices}
    vals = {}
    for tri, c in s.orientation.coeffs.items():
        t, sign = orient([relabel[v] for v in tri])
        vals[t] = sign * c

    def move(xs):
        return [BoundaryLoop(x.loop, {q: relabel[p] for q, p in x.inclusion.items()}) for x in xs]

    return OrbifoldSurface(name or f"{s.name}'", s.gamma, P, maps, Phi, s.Phi_sharp, s.target,
                           Chain(P.cochain_complex, 2, vals), move(s.incoming), move(s.outgoing))
