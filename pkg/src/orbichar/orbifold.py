"""Triangulated spaces with a finite right group action, and the nerve model.

Simplices are sorted vertex tuples; a sorted tuple carries the positive
orientation.  Group elements are the integers ``0..|G|-1`` with a
multiplication table, and ``x.g`` denotes the right action, so that
``x.(gh) = (x.g).h`` and pullbacks compose as ``(gh)^* = g^* h^*``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Sequence

from .chain_core import (
    Chain,
    ChainError,
    Cochain,
    CoefficientRing,
    DoubleComplex,
    FiniteComplex,
    Matrix,
    RingMismatch,
    total_complex,
)


class OrbifoldError(ChainError):
    pass


class ComplexMismatch(OrbifoldError):
    pass


class NotInvariant(OrbifoldError):
    pass


class NonOrientable(OrbifoldError):
    pass


class NotPseudomanifold(OrbifoldError):
    pass


class AutomorphismViolation(OrbifoldError):
    pass


def orient(vertices: Sequence[Hashable]) -> tuple[tuple, int]:
    """Sorted simplex and the sign of the sorting permutation (0 if degenerate)."""
    vs = list(vertices)
    if len(set(vs)) < len(vs):
        return tuple(sorted(set(vs))), 0
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(vs)):
        j = i
        while j > 0 and vs[j - 1] > vs[j]:
            vs[j - 1], vs[j] = vs[j], vs[j - 1]
            sign = -sign
            j -= 1
    return tuple(vs), sign


# ---------------------------------------------------------------------------
# Complexes

PAD_DEGREE = 4


class SimplicialComplex:
    """Abstract simplicial complex given by its maximal faces (closed under faces)."""

    def __init__(self, faces: Iterable[Iterable[Hashable]], name: str = ""):
        simplices: set[tuple] = set()
        for f in faces:
            f = tuple(sorted(set(f)))
            if not f:
                continue
            for k in range(1, len(f) + 1):
                simplices.update(itertools.combinations(f, k))
        dim = max((len(s) for s in simplices), default=0) - 1
        self.simplices: tuple[tuple[tuple, ...], ...] = tuple(
            tuple(sorted(s for s in simplices if len(s) == k + 1)) for k in range(dim + 1)
        )
        self.vertices = tuple(s[0] for s in self.simplices[0]) if self.simplices else ()
        self.name = name
        self._sets = [frozenset(s) for s in self.simplices]

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def contains(self, simplex: Sequence[Hashable]) -> bool:
        s = tuple(sorted(simplex))
        k = len(s) - 1
        return 0 <= k <= self.dim and s in self._sets[k]

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if 0 <= k <= self.dim else 0

    @cached_property
    def cochain_complex(self) -> FiniteComplex:
        """Simplicial cochain complex; ``D_k[tau, sigma] = (-1)^i`` when ``sigma = d_i tau``.

        Degrees up to ``PAD_DEGREE`` always exist (empty above ``dim``) so that
        gerbe data and curvature make sense on low-dimensional spaces.
        """
        top = max(self.dim, PAD_DEGREE)
        bases = list(self.simplices) + [()] * (top - self.dim)
        diffs = []
        for k in range(top):
            if k >= self.dim:
                diffs.append(Matrix(len(bases[k + 1]), len(bases[k])))
                continue
            index = {s: i for i, s in enumerate(self.simplices[k])}
            entries = []
            for r, tau in enumerate(self.simplices[k + 1]):
                for i in range(len(tau)):
                    entries.append((r, index[tau[:i] + tau[i + 1:]], -1 if i % 2 else 1))
            diffs.append(Matrix.from_triplets(self.count(k + 1), self.count(k), entries))
        return FiniteComplex(bases, diffs)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.count(k) for k in range(self.dim + 1))

    def to_json(self) -> dict:
        return {
            "vertices": [_jsonable(v) for v in self.vertices],
            "simplices": {
                str(k): [[_jsonable(v) for v in s] for s in self.simplices[k]]
                for k in range(1, self.dim + 1)
            },
        }

    @classmethod
    def from_json(cls, obj: dict, name: str = "") -> SimplicialComplex:
        faces = [[_unjson(v)] for v in obj.get("vertices", [])]
        for _, group in sorted(obj.get("simplices", {}).items()):
            faces += [[_unjson(v) for v in s] for s in group]
        return cls(faces, name=name)

    def __repr__(self) -> str:
        counts = ", ".join(str(self.count(k)) for k in range(self.dim + 1))
        return f"SimplicialComplex({self.name or 'unnamed'}: {counts})"


def _jsonable(v):
    return list(_jsonable(x) for x in v) if isinstance(v, tuple) else v


def _unjson(v):
    return tuple(_unjson(x) for x in v) if isinstance(v, list) else v


# ---------------------------------------------------------------------------
# Groups and actions


@dataclass(frozen=True)
class FiniteGroup:
    """Finite group on ``0..n-1`` given by a multiplication table."""

    table: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.table)
        object.__setattr__(self, "table", tuple(tuple(r) for r in self.table))
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i) for i in range(n)))
        if len(self.names) != n or any(len(r) != n for r in self.table):
            raise ValueError("multiplication table must be square and match names")

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> range:
        return range(self.order)

    @cached_property
    def identity(self) -> int:
        for e in self.elements:
            if all(self.table[e][g] == g and self.table[g][e] == g for g in self.elements):
                return e
        raise ValueError("no identity element")

    @cached_property
    def _inverses(self) -> tuple[int, ...]:
        e = self.identity
        return tuple(next(h for h in self.elements if self.table[g][h] == e) for g in self.elements)

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inv(self, g: int) -> int:
        return self._inverses[g]

    def element(self, name: str | int) -> int:
        if isinstance(name, int):
            return name
        return self.names.index(name)

    def is_abelian(self) -> bool:
        return all(self.table[g][h] == self.table[h][g] for g in self.elements for h in self.elements)

    def validate(self) -> list[str]:
        problems = []
        n = self.order
        for row in self.table:
            if any(not 0 <= x < n for x in row):
                problems.append("table entry out of range")
                return problems
        try:
            self.identity
        except ValueError:
            return ["no identity element"]
        for g in self.elements:
            if not any(self.table[g][h] == self.identity for h in self.elements):
                problems.append(f"element {self.names[g]} has no inverse")
        for g, h, k in itertools.product(self.elements, repeat=3):
            if self.mul(self.mul(g, h), k) != self.mul(g, self.mul(h, k)):
                problems.append(f"associativity fails at ({self.names[g]},{self.names[h]},{self.names[k]})")
                break
        return problems

    def to_json(self) -> dict:
        return {"elements": list(self.names), "table": [list(r) for r in self.table]}

    @classmethod
    def from_json(cls, obj: dict) -> FiniteGroup:
        return cls(tuple(tuple(r) for r in obj["table"]), tuple(obj["elements"]))


def trivial_group() -> FiniteGroup:
    return FiniteGroup(((0,),), ("e",))


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)))


def product_group(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Direct product; the element ``(g, h)`` has index ``g * |H| + h``."""
    m = H.order
    n = G.order * m
    table = tuple(
        tuple(G.mul(a // m, b // m) * m + H.mul(a % m, b % m) for b in range(n)) for a in range(n)
    )
    names = tuple(f"({G.names[a // m]},{H.names[a % m]})" for a in range(n))
    return FiniteGroup(table, names)


def symmetric_group(n: int) -> FiniteGroup:
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    # (p q)(x) = q(p(x)), so a right action on positions composes left to right
    table = tuple(tuple(index[tuple(q[p[x]] for x in range(n))] for q in perms) for p in perms)
    return FiniteGroup(table, tuple("".join(map(str, p)) for p in perms))


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class GroupAction:
    """Right action of ``group`` on ``complex`` by vertex permutations."""

    def __init__(self, complex: SimplicialComplex, group: FiniteGroup, vertex_maps: dict[int, dict]):
        self.complex = complex
        self.group = group
        self.vertex_maps = {g: dict(vertex_maps[g]) for g in group.elements}

    def act_vertex(self, v: Hashable, g: int) -> Hashable:
        return self.vertex_maps[g][v]

    def act(self, simplex: Sequence[Hashable], g: int) -> tuple[tuple, int]:
        """``simplex . g`` as a sorted simplex together with the orientation sign."""
        m = self.vertex_maps[g]
        return orient([m[v] for v in simplex])

    @cached_property
    def _act_tables(self) -> dict:
        """``(k, g) -> [(target index, sign)]`` for fast pullbacks."""
        cx = self.complex.cochain_complex
        out = {}
        for k in range(cx.top + 1):
            for g in self.group.elements:
                row = []
                for s in cx.bases[k]:
                    t, sign = self.act(s, g)
                    row.append((cx.index(k, t), sign))
                out[(k, g)] = row
        return out

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "action": {
                self.group.names[g]: [[_jsonable(v), _jsonable(self.vertex_maps[g][v])] for v in self.complex.vertices]
                for g in self.group.elements
            },
        }

    @classmethod
    def from_json(cls, obj: dict, name: str = "") -> GroupAction:
        cx = SimplicialComplex.from_json(obj, name=name)
        G = FiniteGroup.from_json(obj["group"])
        maps = {}
        for gname, pairs in obj["action"].items():
            maps[G.element(gname)] = {_unjson(a): _unjson(b) for a, b in pairs}
        for g in G.elements:
            maps.setdefault(g, {})
        return cls(cx, G, maps)


def validate_action(a: GroupAction) -> list[Violation]:
    """Every broken axiom of a right action by simplicial automorphisms."""
    report = [Violation("GroupViolation", p) for p in a.group.validate()]
    if report:
        return report
    verts = set(a.complex.vertices)
    G = a.group
    for g in G.elements:
        m = a.vertex_maps.get(g, {})
        if set(m) != verts or set(m.values()) != verts:
            report.append(Violation("NotAPermutation", f"element {G.names[g]} does not permute the vertices"))
    if report:
        return report
    for v in a.complex.vertices:
        if a.act_vertex(v, G.identity) != v:
            report.append(Violation("IdentityViolation", f"identity moves vertex {v!r}"))
    for g in G.elements:
        for k in range(1, a.complex.dim + 1):
            for s in a.complex.simplices[k]:
                t, sign = a.act(s, g)
                if sign == 0 or not a.complex.contains(t):
                    report.append(Violation("AutomorphismViolation", f"element {G.names[g]} sends {s!r} to non-simplex {t!r}"))
    for g, h in itertools.product(G.elements, repeat=2):
        gh = G.mul(g, h)
        for v in a.complex.vertices:
            if a.act_vertex(a.act_vertex(v, g), h) != a.act_vertex(v, gh):
                report.append(Violation("CompositionViolation", f"(x.{G.names[g]}).{G.names[h]} != x.{G.names[gh]} at {v!r}"))
                break
    return report


class EquivariantComplex:
    """A validated action, i.e. the global quotient ``[M/G]``."""

    def __init__(self, action: GroupAction, name: str = ""):
        problems = validate_action(action)
        if problems:
            raise AutomorphismViolation("; ".join(map(str, problems[:5])))
        self.action = action
        self.name = name or action.complex.name

    @property
    def complex(self) -> SimplicialComplex:
        return self.action.complex

    @property
    def group(self) -> FiniteGroup:
        return self.action.group

    @cached_property
    def _nerves(self) -> dict:
        return {}

    def nerve(self, p_max: int) -> NerveModel:
        """Memoized nerve model; concurrent population just recomputes the same value."""
        cache = self._nerves
        if p_max not in cache:
            cache[p_max] = build_nerve(self.action, p_max)
        return cache[p_max]


# ---------------------------------------------------------------------------
# Maps and pullbacks


@dataclass
class SimplicialMap:
    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: dict

    def image(self, simplex: Sequence[Hashable]) -> tuple[tuple, int]:
        return orient([self.vertex_map[v] for v in simplex])

    def validate(self) -> list[Violation]:
        out = []
        for v in self.source.vertices:
            if v not in self.vertex_map or not self.target.contains((self.vertex_map[v],)):
                out.append(Violation("MapViolation", f"vertex {v!r} has no image in the target"))
        if out:
            return out
        for k in range(1, self.source.dim + 1):
            for s in self.source.simplices[k]:
                t, _ = self.image(s)
                if not self.target.contains(t):
                    out.append(Violation("MapViolation", f"{s!r} maps to non-simplex {t!r}"))
        return out

    def push(self, z: Chain) -> Chain:
        """Pushforward of a chain (degenerate images vanish)."""
        if z.space is not self.source.cochain_complex:
            raise ComplexMismatch("chain does not live on the map's source")
        out: dict = {}
        for s, v in z.coeffs.items():
            t, sign = self.image(s)
            if sign:
                out[t] = out.get(t, 0) + sign * v
        return Chain(self.target.cochain_complex, z.degree, out)


def pullback(f: SimplicialMap, c: Cochain) -> Cochain:
    if c.space is not f.target.cochain_complex:
        raise ComplexMismatch("cochain does not live on the map's target")
    k = c.degree
    vals = {}
    if k <= f.source.dim:
        for s in f.source.simplices[k]:
            t, sign = f.image(s)
            if sign:
                v = c[t]
                if v:
                    vals[s] = sign * v
    return Cochain(f.source.cochain_complex, k, vals, c.ring)


def group_pullback(a: GroupAction, g: int, c: Cochain) -> Cochain:
    """``(g^* c)(sigma) = c(sigma . g)``."""
    if c.space is not a.complex.cochain_complex:
        raise ComplexMismatch("cochain does not live on the acted complex")
    k = c.degree
    basis = c.space.bases[k]
    vec = c.vector()
    vals = {}
    for s, (t, sign) in zip(basis, a._act_tables[(k, g)]):
        v = vec[t]
        if v:
            vals[s] = sign * v
    return Cochain(c.space, k, vals, c.ring)


def average(a: GroupAction, c: Cochain) -> Cochain:
    """``(1/|G|) sum_g g^* c``."""
    total: dict = {}
    for g in a.group.elements:
        for s, v in group_pullback(a, g, c).values.items():
            total[s] = total.get(s, 0) + v
    n = a.group.order
    vals = {s: Fraction(v) / n for s, v in total.items()}
    if c.ring is CoefficientRing.INTEGERS and any(v.denominator != 1 for v in vals.values()):
        raise RingMismatch("integer average is not integral")
    return Cochain(c.space, c.degree, vals, c.ring)


def is_invariant(a: GroupAction, c: Cochain) -> bool:
    return all(group_pullback(a, g, c) == c for g in a.group.elements)


def invariant_cochains(a: GroupAction, degree: int, ring: CoefficientRing = CoefficientRing.RATIONALS) -> list[Cochain]:
    """Integer-valued basis of the invariant cochains, one per orientable orbit."""
    cx = a.complex.cochain_complex
    if degree > a.complex.dim:
        return []
    seen: set = set()
    basis = []
    for s in a.complex.simplices[degree]:
        if s in seen:
            continue
        vals: dict = {}
        for g in a.group.elements:
            t, sign = a.act(s, g)
            seen.add(t)
            vals[t] = vals.get(t, 0) + sign
        vals = {t: v for t, v in vals.items() if v}
        if vals:
            ref = abs(next(iter(vals.values())))
            basis.append(Cochain(cx, degree, {t: v // ref for t, v in vals.items()}, ring))
    return basis


# ---------------------------------------------------------------------------
# Nerve of the action groupoid


class NerveModel:
    """Levels ``M x G^p`` for ``p <= p_max`` with the bar face maps.

    A level-``p`` simplex is ``(gs, sigma)`` with ``gs`` a ``p``-tuple of
    group elements.  ``d_0`` moves ``sigma`` by ``g_1``, ``d_i`` multiplies
    ``g_i g_{i+1}``, ``d_p`` forgets ``g_p``.
    """

    def __init__(self, action: GroupAction, p_max: int):
        if p_max < 0:
            raise ValueError("p_max must be non-negative")
        self.action = action
        self.p_max = p_max

    @property
    def group(self) -> FiniteGroup:
        return self.action.group

    @property
    def base(self) -> SimplicialComplex:
        return self.action.complex

    def words(self, p: int) -> list[tuple[int, ...]]:
        return list(itertools.product(self.group.elements, repeat=p))

    def face(self, i: int, gs: tuple[int, ...], simplex: tuple) -> tuple[tuple[int, ...], tuple, int]:
        p = len(gs)
        if not 0 <= i <= p or p == 0:
            raise ValueError("face index out of range")
        if i == 0:
            t, sign = self.action.act(simplex, gs[0])
            return gs[1:], t, sign
        if i == p:
            return gs[:-1], simplex, 1
        return gs[: i - 1] + (self.group.mul(gs[i - 1], gs[i]),) + gs[i + 1:], simplex, 1

    def check_simplicial_identities(self) -> list[str]:
        """``d_i d_j = d_{j-1} d_i`` for ``i < j`` on the vertex level of every ``M x G^p``."""
        bad = []
        for p in range(2, self.p_max + 1):
            for gs in self.words(p):
                for v in self.base.simplices[0]:
                    for j in range(p + 1):
                        for i in range(j):
                            a = self.face(j, gs, v)
                            a = self.face(i, a[0], a[1])
                            b = self.face(i, gs, v)
                            b = self.face(j - 1, b[0], b[1])
                            if a[:2] != b[:2]:
                                bad.append(f"d_{i} d_{j} != d_{j - 1} d_{i} at {gs}, {v}")
        return bad

    def id(self, gs: tuple[int, ...], simplex: tuple) -> tuple:
        """Basis id of ``(gs, simplex)`` in the total complex."""
        return (len(gs), len(simplex) - 1, (tuple(gs), tuple(simplex)))

    @cached_property
    def double_complex(self) -> DoubleComplex:
        return nerve_double_complex(self)

    @cached_property
    def total(self) -> FiniteComplex:
        """Total complex truncated at degree ``p_max`` (valid below ``p_max``)."""
        return total_complex(self.double_complex, max_degree=self.p_max)

    @property
    def valid_degree(self) -> int:
        return self.p_max - 1


def build_nerve(a: GroupAction, p_max: int) -> NerveModel:
    return NerveModel(a, p_max)


def nerve_double_complex(n: NerveModel, ring: CoefficientRing = CoefficientRing.INTEGERS) -> DoubleComplex:
    """Bar direction ``sum (-1)^i d_i^*`` and simplicial coboundary on each copy of M.

    The entries are integers, so one complex serves every coefficient ring.
    """
    M = n.base
    cx = M.cochain_complex
    bases = {}
    for p in range(n.p_max + 1):
        words = n.words(p)
        for j in range(M.dim + 1):
            bases[(p, j)] = tuple((w, s) for w in words for s in M.simplices[j])
    bar, inner = {}, {}
    for p in range(n.p_max + 1):
        words = n.words(p)
        word_index = {w: i for i, w in enumerate(words)}
        for j in range(M.dim + 1):
            cj = M.count(j)
            if j < M.dim:
                D = cx.differential(j)
                cj1 = M.count(j + 1)
                entries = []
                for wi in range(len(words)):
                    for r, row in enumerate(D.data):
                        for c, v in row.items():
                            entries.append((wi * cj1 + r, wi * cj + c, v))
                inner[(p, j)] = Matrix.from_triplets(len(words) * cj1, len(words) * cj, entries)
            if p < n.p_max:
                entries = []
                for wi, w in enumerate(n.words(p + 1)):
                    for si, s in enumerate(M.simplices[j]):
                        row = wi * cj + si
                        for i in range(p + 2):
                            gw, t, sign = n.face(i, w, s)
                            if sign:
                                col = word_index[gw] * cj + cx.index(j, t)
                                entries.append((row, col, sign * (-1 if i % 2 else 1)))
                bar[(p, j)] = Matrix.from_triplets(len(words) * len(n.group.elements) * cj, len(words) * cj, entries)
    return DoubleComplex(bases, bar, inner)


def lift_invariant_form(n: NerveModel, omega: Cochain) -> Cochain:
    """Put an invariant cochain of M into the ``p = 0`` column of the total complex."""
    if omega.space is not n.base.cochain_complex:
        raise ComplexMismatch("form does not live on the nerve's base")
    if not is_invariant(n.action, omega):
        raise NotInvariant("cochain is not G-invariant")
    tot = n.total
    if omega.degree > tot.top:
        raise ComplexMismatch(f"nerve truncated below degree {omega.degree}")
    return Cochain(tot, omega.degree, {n.id((), s): v for s, v in omega.values.items()}, omega.ring)


def column_chain(n: NerveModel, z: Chain) -> Chain:
    """Image of a chain of M in the ``p = 0`` column."""
    return Chain(n.total, z.degree, {n.id((), s): v for s, v in z.coeffs.items()})


def restrict_column(n: NerveModel, c: Cochain, p: int) -> dict:
    """``{(gs, simplex): value}`` for the ``(p, deg - p)`` slot of a total cochain."""
    return {k[2]: v for k, v in c.values.items() if k[0] == p}


# ---------------------------------------------------------------------------
# Orientation


@dataclass
class PseudomanifoldInfo:
    top: tuple
    boundary_faces: tuple


def _incidence(simplex: tuple, face: tuple) -> int:
    for i in range(len(simplex)):
        if simplex[:i] + simplex[i + 1:] == face:
            return -1 if i % 2 else 1
    raise ValueError("not a face")


def pseudomanifold_info(c: SimplicialComplex, d: int, relative: bool = False) -> PseudomanifoldInfo:
    if c.dim != d:
        raise NotPseudomanifold(f"complex has dimension {c.dim}, expected {d}")
    counts: dict = {}
    for s in c.simplices[d]:
        for i in range(d + 1):
            f = s[:i] + s[i + 1:]
            counts[f] = counts.get(f, 0) + 1
    boundary = []
    for f in c.simplices[d - 1] if d > 0 else ():
        k = counts.get(f, 0)
        if k > 2 or k == 0:
            raise NotPseudomanifold(f"face {f!r} lies in {k} top simplices")
        if k == 1:
            if not relative:
                raise NotPseudomanifold(f"face {f!r} lies in only one top simplex")
            boundary.append(f)
    return PseudomanifoldInfo(c.simplices[d], tuple(boundary))


def boundary_complex(c: SimplicialComplex) -> SimplicialComplex | None:
    info = pseudomanifold_info(c, c.dim, relative=True)
    if not info.boundary_faces:
        return None
    return SimplicialComplex(info.boundary_faces, name=f"boundary of {c.name}")


def fundamental_cycle(c: SimplicialComplex, d: int | None = None, relative: bool = False,
                      seed: tuple[tuple, int] | None = None) -> Chain:
    """Consistently oriented sum of top simplices.

    ``seed = (simplex, sign)`` fixes the orientation of the component holding
    that simplex; other components start from their first simplex with +1.
    """
    d = c.dim if d is None else d
    info = pseudomanifold_info(c, d, relative)
    faces_of: dict = {}
    for s in info.top:
        for i in range(d + 1):
            faces_of.setdefault(s[:i] + s[i + 1:], []).append(s)
    sign: dict = {}
    order = list(info.top)
    if seed is not None:
        s0, e0 = tuple(sorted(seed[0])), seed[1]
        if s0 not in set(info.top) or e0 not in (1, -1):
            raise ValueError("seed must be a top simplex with sign +-1")
        order.remove(s0)
        order.insert(0, s0)
    for start in order:
        if start in sign:
            continue
        sign[start] = seed[1] if (seed is not None and start == tuple(sorted(seed[0]))) else 1
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for i in range(d + 1):
                f = s[:i] + s[i + 1:]
                for t in faces_of[f]:
                    if t == s:
                        continue
                    want = -sign[s] * _incidence(s, f) * _incidence(t, f)
                    if t in sign:
                        if sign[t] != want:
                            raise NonOrientable(f"orientation clash across face {f!r}")
                    else:
                        sign[t] = want
                        queue.append(t)
    return Chain(c.cochain_complex, d, sign)


# ---------------------------------------------------------------------------
# Builders


def point() -> SimplicialComplex:
    return SimplicialComplex([[0]], name="point")


def cycle_complex(n: int) -> SimplicialComplex:
    """Circle as an ``n``-gon on vertices ``0..n-1``."""
    if n < 3:
        raise ValueError("a simplicial circle needs at least 3 vertices")
    return SimplicialComplex([[i, (i + 1) % n] for i in range(n)], name=f"circle{n}")


def rotation_action(n: int, k: int = 1, order: int | None = None) -> GroupAction:
    """Cyclic group generated by ``v -> v + k`` on the ``n``-gon."""
    cx = cycle_complex(n)
    if order is None:
        from math import gcd
        order = n // gcd(n, k)
    G = cyclic_group(order)
    return GroupAction(cx, G, {g: {v: (v + g * k) % n for v in range(n)} for g in G.elements})


def trivial_action(cx: SimplicialComplex) -> GroupAction:
    return GroupAction(cx, trivial_group(), {0: {v: v for v in cx.vertices}})


def point_quotient(G: FiniteGroup) -> GroupAction:
    return GroupAction(point(), G, {g: {0: 0} for g in G.elements})


def torus_complex(n: int = 3, m: int | None = None) -> SimplicialComplex:
    """Torus from an ``n x m`` grid, each square cut along its main diagonal."""
    m = n if m is None else m
    faces = []
    for a in range(n):
        for b in range(m):
            p00, p10 = (a, b), ((a + 1) % n, b)
            p01, p11 = (a, (b + 1) % m), ((a + 1) % n, (b + 1) % m)
            faces += [[p00, p10, p11], [p00, p01, p11]]
    return SimplicialComplex(faces, name=f"torus{n}x{m}")


def torus_rotation(n: int = 3) -> GroupAction:
    """Z/2 acting on the torus by ``(i, j) -> (-i, -j)``."""
    cx = torus_complex(n)
    G = cyclic_group(2)
    maps = {0: {v: v for v in cx.vertices}, 1: {(i, j): ((-i) % n, (-j) % n) for i, j in cx.vertices}}
    return GroupAction(cx, G, maps)


def cylinder_complex(n: int = 3, layers: int = 1) -> SimplicialComplex:
    """``S^1 x [0, layers]``; vertices ``(i, level)``."""
    faces = []
    for h in range(layers):
        for i in range(n):
            j = (i + 1) % n
            faces += [[(i, h), (j, h), (j, h + 1)], [(i, h), (i, h + 1), (j, h + 1)]]
    return SimplicialComplex(faces, name=f"cylinder{n}x{layers}")


def moebius_complex() -> SimplicialComplex:
    """Five-vertex Moebius strip."""
    return SimplicialComplex([[i, (i + 1) % 5, (i + 2) % 5] for i in range(5)], name="moebius")


def cube_torus(n: int = 3) -> SimplicialComplex:
    """3-torus from an ``n^3`` grid with the six-tetrahedron (Freudenthal) cut."""
    faces = []
    for base in itertools.product(range(n), repeat=3):
        for perm in itertools.permutations(range(3)):
            v = list(base)
            path = [tuple(v)]
            for axis in perm:
                v[axis] += 1
                path.append(tuple(v))
            faces.append([tuple(x % n for x in p) for p in path])
    return SimplicialComplex(faces, name=f"threetorus{n}")


def sphere_complex(dim: int = 2) -> SimplicialComplex:
    """Boundary of the standard ``(dim+1)``-simplex."""
    return SimplicialComplex(itertools.combinations(range(dim + 2), dim + 1), name=f"sphere{dim}")
