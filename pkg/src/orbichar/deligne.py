"""Weight-q Deligne complexes over the action groupoid, and global gerbes.

The weight-q complex is modeled as a cone.  Its degree-n piece is

    C^n(nerve; Z)  (+)  T^{n-1},      T = rational nerve cochains with form degree j < q,

with differential ``D(c, h) = (Dc, -(c + Dh)|_T)``.  Here ``D`` is the total
differential of the nerve double complex and ``|_T`` drops every slot with
``j >= q``.  For a cocycle, ``c + Dh`` is supported on the ``(0, q)`` slot and
is the lift of an invariant closed cochain: the curvature.

Circle-valued data is stored additively in cycle units.  A gerbe
``(B, A_g, rho_{g,h})`` sits in degree 3 as ``h = (B, A, -rho~)`` where
``rho~`` is the representative in ``[0, 1)``, and ``c = omega~ - Dh`` is then
integral exactly when the gerbe relations hold.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .chain_core import (
    Chain,
    ChainError,
    Cochain,
    CoefficientRing,
    CohomologyGroup,
    FiniteComplex,
    Matrix,
    MixedComplex,
    coboundary,
    format_rational,
    integer_kernel,
    left_annihilator,
    mixed_cohomology,
    mod1,
    pair,
    parse_rational,
    solve,
    solve_integer,
)
from .orbifold import (
    EquivariantComplex,
    GroupAction,
    NerveModel,
    NotInvariant,
    NonOrientable,
    NotPseudomanifold,
    OrbifoldError,
    Violation,
    fundamental_cycle,
    group_pullback,
    is_invariant,
    lift_invariant_form,
)

Z = CoefficientRing.INTEGERS
Q = CoefficientRing.RATIONALS
QZ = CoefficientRing.RATIONALS_MOD_1


class DeligneError(ChainError):
    pass


class TruncationTooSmall(DeligneError):
    pass


class NotClosed(DeligneError):
    pass


class PeriodsNotIntegral(DeligneError):
    pass


class NotACocycle(DeligneError):
    pass


class InvalidGerbe(DeligneError):
    pass


class Variant(enum.Enum):
    INTEGRAL = "Z"
    CIRCLE = "U1"


@dataclass(frozen=True)
class DeligneComplexSpec:
    q: int
    variant: Variant = Variant.INTEGRAL
    p_max: int | None = None

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("weight must be at least 1")
        if self.p_max is not None and self.p_max < 1:
            raise ValueError("p_max must be at least 1")


def _as_action(x: EquivariantComplex | GroupAction) -> EquivariantComplex:
    return x if isinstance(x, EquivariantComplex) else EquivariantComplex(x)


@dataclass(frozen=True)
class DeligneCochain:
    """A cone element ``(c, h)``: integral total cochain and rational total cochain one degree lower."""

    c: Cochain
    h: Cochain

    @property
    def degree(self) -> int:
        return self.c.degree


class DeligneComplex:
    """The weight-``q`` cone over the nerve of ``[M/G]``, truncated at ``p_max``."""

    def __init__(self, base: EquivariantComplex | GroupAction, q: int, p_max: int | None = None):
        self.base = _as_action(base)
        self.q = q
        self.p_max = q + 1 if p_max is None else p_max
        if self.p_max < 1:
            raise TruncationTooSmall("p_max must be at least 1")

    @property
    def nerve(self) -> NerveModel:
        return self.base.nerve(self.p_max)

    @property
    def total(self) -> FiniteComplex:
        return self.nerve.total

    def truncate(self, c: Cochain) -> Cochain:
        """Drop slots of form degree ``>= q``."""
        return Cochain(c.space, c.degree, {k: v for k, v in c.values.items() if k[1] < self.q}, c.ring)

    def zero(self, degree: int) -> DeligneCochain:
        return DeligneCochain(Cochain.zero(self.total, degree, Z), Cochain.zero(self.total, degree - 1, Q))

    def differential(self, x: DeligneCochain) -> DeligneCochain:
        if x.degree + 1 > self.total.top:
            raise TruncationTooSmall(f"need p_max >= {x.degree + 1}")
        dc = coboundary(x.c)
        dh = coboundary(x.h) if x.h.degree >= 0 else Cochain.zero(self.total, x.degree, Q)
        return DeligneCochain(dc, -self.truncate(x.c.as_ring(Q) + dh))

    def is_cocycle(self, x: DeligneCochain) -> bool:
        d = self.differential(x)
        return d.c.is_zero() and d.h.is_zero()

    def curvature_of(self, x: DeligneCochain) -> Cochain:
        """The ``(0, q)`` slot of ``c + Dh`` as a cochain on M."""
        M = self.base.complex
        if x.degree != self.q:
            raise DegreeMismatchError(f"curvature needs a degree-{self.q} element")
        full = x.c.as_ring(Q) + coboundary(x.h)
        vals = {k[2][1]: v for k, v in full.values.items() if k[0] == 0 and k[1] == self.q}
        return Cochain(M.cochain_complex, self.q, vals, Q)

    @cached_property
    def mixed(self) -> MixedComplex:
        tot = self.total
        top = tot.top
        t_index = []  # per total degree: positions kept in T
        for n in range(top + 1):
            t_index.append([i for i, k in enumerate(tot.bases[n]) if k[1] < self.q])
        rat_bases = [()] + [tuple(tot.bases[n][i] for i in t_index[n]) for n in range(top)]
        rat_diffs = []
        for n in range(top):
            # Q^n = T^{n-1} -> Q^{n+1} = T^n, acting by -D_{n-1}
            if n == 0:
                rat_diffs.append(Matrix(len(rat_bases[1]), 0))
                continue
            D = tot.differential(n - 1)
            keep_cols = {i: a for a, i in enumerate(t_index[n - 1])}
            rows = [{keep_cols[j]: -v for j, v in D.data[i].items() if j in keep_cols} for i in t_index[n]]
            rat_diffs.append(Matrix(len(t_index[n]), len(t_index[n - 1]), rows))
        rational = FiniteComplex(rat_bases, rat_diffs)
        link = {}
        for n in range(top):
            rows = [{i: -1} for i in t_index[n]]
            link[n] = Matrix(len(t_index[n]), tot.dim(n), rows)
        return MixedComplex(tot, rational, link)

    def cohomology(self, n: int) -> CohomologyGroup:
        if n > self.p_max - 1:
            raise TruncationTooSmall(f"degree {n} needs p_max >= {n + 1}")
        return mixed_cohomology(self.mixed, n)


class DegreeMismatchError(DeligneError):
    pass


def deligne_cohomology(a: EquivariantComplex | GroupAction, spec: DeligneComplexSpec, n: int) -> CohomologyGroup:
    """``H^n`` of the weight-q complex; the circle variant is read off one degree up."""
    if n < 0:
        return CohomologyGroup()
    need = n + 1 if spec.variant is Variant.INTEGRAL else n + 2
    p_max = spec.p_max if spec.p_max is not None else need
    if p_max < need:
        raise TruncationTooSmall(f"degree {n} of the {spec.variant.value} variant needs p_max >= {need}")
    dc = DeligneComplex(a, spec.q, p_max)
    return dc.cohomology(n if spec.variant is Variant.INTEGRAL else n + 1)


# ---------------------------------------------------------------------------
# Comparison with circle coefficients


def exp_comparison(dc: DeligneComplex, x: DeligneCochain) -> Cochain:
    """Forget the integral part and reduce the rational part mod 1."""
    return x.h.reduce_mod1()


def circle_differential(dc: DeligneComplex, u: Cochain) -> Cochain:
    """``-D`` on mod-1 reduced truncated cochains (well defined since D is integral)."""
    return dc.truncate(-coboundary(u.as_ring(QZ))).as_ring(QZ)


# ---------------------------------------------------------------------------
# Gerbes


@dataclass(frozen=True)
class GerbeCocycle:
    """``(B, {A_g}, {rho_{g,h}})`` on ``[M/G]``; rho is circle valued."""

    base: EquivariantComplex
    B: Cochain
    A: dict
    rho: dict

    @classmethod
    def create(cls, base: EquivariantComplex | GroupAction, B: Cochain, A: dict, rho: dict,
               normalize: bool = True) -> GerbeCocycle:
        """Validating constructor; raises InvalidGerbe listing the violations."""
        base = _as_action(base)
        xi = cls.raw(base, B, A, rho)
        if normalize:
            xi = normalize_gerbe(xi)[0]
        report = check_gerbe_cocycle(xi)
        if report:
            raise InvalidGerbe("; ".join(map(str, report[:5])))
        return xi

    @classmethod
    def raw(cls, base: EquivariantComplex | GroupAction, B: Cochain, A: dict, rho: dict) -> GerbeCocycle:
        """Unchecked constructor; fills absent entries with zero."""
        base = _as_action(base)
        cx = base.complex.cochain_complex
        G = base.group
        A = {g: A.get(g, Cochain.zero(cx, 1, Q)) for g in G.elements}
        rho = {(g, h): rho.get((g, h), Cochain.zero(cx, 0, QZ)).as_ring(QZ)
               for g in G.elements for h in G.elements}
        return cls(base, B, A, rho)

    @classmethod
    def trivial(cls, base: EquivariantComplex | GroupAction) -> GerbeCocycle:
        base = _as_action(base)
        return cls.raw(base, Cochain.zero(base.complex.cochain_complex, 2, Q), {}, {})

    def to_json(self) -> dict:
        names = self.base.group.names
        return {
            "B": _cochain_json(self.B),
            "A": {names[g]: _cochain_json(a) for g, a in self.A.items() if a.values},
            "rho": {f"{names[g]},{names[h]}": _cochain_json(r) for (g, h), r in self.rho.items() if r.values},
        }

    @classmethod
    def from_json(cls, base: EquivariantComplex | GroupAction, obj: dict, validate: bool = True) -> GerbeCocycle:
        base = _as_action(base)
        G = base.group
        cx = base.complex.cochain_complex
        B = _cochain_from_json(cx, 2, obj.get("B", {}), Q)
        A = {G.element(g): _cochain_from_json(cx, 1, v, Q) for g, v in obj.get("A", {}).items()}
        rho = {}
        for key, v in obj.get("rho", {}).items():
            g, h = _split_pair(key, G)
            rho[(g, h)] = _cochain_from_json(cx, 0, v, QZ)
        if validate:
            return cls.create(base, B, A, rho)
        return cls.raw(base, B, A, rho)


def _split_pair(key: str, G) -> tuple[int, int]:
    for i, ch in enumerate(key):
        if ch == "," and key.count("(", 0, i) == key.count(")", 0, i):
            return G.element(key[:i].strip()), G.element(key[i + 1:].strip())
    raise ValueError(f"cannot split group pair {key!r}")


def _key(simplex: tuple) -> str:
    return json.dumps([list(v) if isinstance(v, tuple) else v for v in simplex], separators=(",", ":"))


def _unkey(s: str) -> tuple:
    return tuple(tuple(v) if isinstance(v, list) else v for v in json.loads(s))


def _cochain_json(c: Cochain) -> dict:
    return {_key(s): format_rational(v) for s, v in sorted(c.values.items())}


def _cochain_from_json(cx: FiniteComplex, degree: int, obj: dict, ring) -> Cochain:
    return Cochain(cx, degree, {_unkey(k): parse_rational(v) for k, v in obj.items()}, ring)


def _lift(r: Cochain) -> Cochain:
    return r.as_ring(Q)


def check_gerbe_cocycle(xi: GerbeCocycle) -> list[Violation]:
    """Every failing gerbe relation, with witnesses, ordered by group elements then simplex."""
    a = xi.base.action
    G = xi.base.group
    report: list[Violation] = []
    e = G.identity
    names = G.names
    if xi.B.degree != 2:
        return [Violation("Shape", "B must be a 2-cochain")]
    dB_transition = {}
    for g in G.elements:
        lhs = group_pullback(a, g, xi.B) - xi.B
        rhs = coboundary(xi.A[g])
        diff = lhs - rhs
        for s in sorted(diff.values):
            report.append(Violation("ConnectionTransition", f"g*B - B != dA_g at g={names[g]}, simplex {s!r} (defect {diff[s]})"))
        dB_transition[g] = diff
    for g, h in itertools.product(G.elements, repeat=2):
        gh = G.mul(g, h)
        lhs = xi.A[g] + group_pullback(a, g, xi.A[h]) - xi.A[gh]
        defect = (lhs - coboundary(_lift(xi.rho[(g, h)]))).reduce_mod1()
        for s in sorted(defect.values):
            report.append(Violation("ConnectionCocycle", f"A_g + g*A_h - A_gh != dlog rho at (g,h)=({names[g]},{names[h]}), edge {s!r}"))
    for g, h, k in itertools.product(G.elements, repeat=3):
        val = (group_pullback(a, g, xi.rho[(h, k)]) - xi.rho[(G.mul(g, h), k)]
               + xi.rho[(g, G.mul(h, k))] - xi.rho[(g, h)])
        for s in sorted(val.values):
            report.append(Violation("RhoCocycle", f"delta rho != 0 at ({names[g]},{names[h]},{names[k]}), vertex {s!r}"))
    if not xi.A[e].is_zero():
        report.append(Violation("Normalization", "A_e != 0"))
    for g in G.elements:
        if not (xi.rho[(e, g)].is_zero() and xi.rho[(g, e)].is_zero()):
            report.append(Violation("Normalization", f"rho_(e,{names[g]}) or rho_({names[g]},e) != 0"))
            break
    return report


def normalize_gerbe(xi: GerbeCocycle) -> tuple[GerbeCocycle, str]:
    """Shift by the coboundary of ``f_g = rho~_{e,e}`` so that ``A_e = 0`` and rho is normalized."""
    G = xi.base.group
    a = xi.base.action
    e = G.identity
    f = _lift(xi.rho[(e, e)])
    if f.is_zero() and xi.A[e].is_zero():
        return xi, "already normalized"
    df = coboundary(f)
    A = {g: (xi.A[g] - df) for g in G.elements}
    A[e] = Cochain.zero(xi.A[e].space, 1, Q)
    rho = {(g, h): xi.rho[(g, h)] - group_pullback(a, g, f).as_ring(QZ) for g, h in xi.rho}
    return GerbeCocycle(xi.base, xi.B, A, rho), "shifted by the coboundary of f_g = rho_(e,e)"


def gerbe_to_deligne(xi: GerbeCocycle, p_max: int = 4) -> tuple[DeligneComplex, DeligneCochain]:
    """Degree-3 cone element ``(omega~ - Dh, h)`` with ``h = (B, A, -rho~)``."""
    dc = DeligneComplex(xi.base, 3, p_max)
    n = dc.nerve
    tot = dc.total
    hv = {}
    for s, v in xi.B.values.items():
        hv[n.id((), s)] = v
    for g, A in xi.A.items():
        for s, v in A.values.items():
            hv[n.id((g,), s)] = v
    for (g, h), r in xi.rho.items():
        for s, v in r.values.items():
            hv[n.id((g, h), s)] = -v
    h = Cochain(tot, 2, hv, Q)
    omega = curvature(xi)
    full = -coboundary(h)
    vals = dict(full.values)
    for s, v in omega.values.items():
        k = n.id((), s)
        vals[k] = vals.get(k, 0) + v
    c = Cochain(tot, 3, vals, Q)
    if not c.is_integral():
        raise InvalidGerbe("gerbe relations fail: integral part is not integral")
    return dc, DeligneCochain(c.as_ring(Z), h)


def deligne_to_gerbe(dc: DeligneComplex, x: DeligneCochain) -> GerbeCocycle:
    """Read ``(B, A, rho)`` off the rational part of a degree-3 element."""
    if dc.q != 3 or x.degree != 3:
        raise DeligneError("gerbe data lives in weight 3, degree 3")
    cx = dc.base.complex.cochain_complex
    G = dc.base.group
    B: dict = {}
    A: dict = {g: {} for g in G.elements}
    rho: dict = {}
    for (p, j, (gs, s)), v in x.h.values.items():
        if p == 0:
            B[s] = v
        elif p == 1:
            A[gs[0]][s] = v
        else:
            rho.setdefault(gs, {})[s] = -v
    return GerbeCocycle.raw(
        dc.base,
        Cochain(cx, 2, B, Q),
        {g: Cochain(cx, 1, vals, Q) for g, vals in A.items()},
        {k: Cochain(cx, 0, vals, QZ) for k, vals in rho.items()},
    )


def curvature(xi: GerbeCocycle) -> Cochain:
    """``dB`` as a rational 3-cochain on M (zero when M has no 3-simplices)."""
    omega = coboundary(xi.B)
    if not is_invariant(xi.base.action, omega):
        raise NotInvariant("dB is not invariant; the gerbe relations fail")
    return omega


# ---------------------------------------------------------------------------
# Periods


@dataclass
class PeriodsResult:
    integral: bool
    witness: Chain | None = None
    value: Fraction | None = None

    def __bool__(self) -> bool:
        return self.integral


def integral_cycles(total: FiniteComplex, degree: int) -> list[Chain]:
    """Z-basis of integral cycles of the given total degree."""
    if degree == 0:
        return [Chain.from_vector(total, 0, [1 if i == k else 0 for i in range(total.dim(0))]) for k in range(total.dim(0))]
    bd = total.differential(degree - 1).transpose()
    return [Chain.from_vector(total, degree, v) for v in integer_kernel(bd)]


def periods_integral(omega: Cochain, n: NerveModel) -> PeriodsResult:
    """Do the lift of ``omega`` and every integral cycle pair to integers?"""
    M = n.base
    if omega.space is not M.cochain_complex:
        raise OrbifoldError("form does not live on the nerve's base")
    if omega.degree < omega.space.top and not coboundary(omega).is_zero():
        raise NotClosed("cochain is not closed")
    if not is_invariant(n.action, omega):
        raise NotInvariant("cochain is not G-invariant")
    if omega.degree > n.valid_degree:
        raise TruncationTooSmall(f"need p_max >= {omega.degree + 1}")
    lifted = lift_invariant_form(n, omega)
    candidates = []
    if omega.degree == M.dim:
        try:
            z = fundamental_cycle(M)
            candidates.append(Chain(n.total, z.degree, {n.id((), s): v for s, v in z.coeffs.items()}))
        except (NonOrientable, NotPseudomanifold):
            pass
    candidates += integral_cycles(n.total, omega.degree)
    for z in candidates:
        v = pair(lifted, z)
        if v.denominator != 1:
            return PeriodsResult(False, z, v)
    return PeriodsResult(True)


def kappa(xi: GerbeCocycle, p_max: int = 4) -> Cochain:
    """Curvature, after confirming it has integral periods."""
    omega = curvature(xi)
    if omega.is_zero():
        return omega
    res = periods_integral(omega, xi.base.nerve(p_max))
    if not res:
        raise PeriodsNotIntegral(f"period {res.value} on a cycle")
    return omega


# ---------------------------------------------------------------------------
# Flat classes


@dataclass(frozen=True)
class FlatClass:
    """A circle-valued total cocycle of degree ``q - 1``."""

    cochain: Cochain

    def __post_init__(self):
        c = self.cochain.reduce_mod1()
        object.__setattr__(self, "cochain", c)
        if c.degree + 1 <= c.space.top and not coboundary(c).is_zero():
            raise NotACocycle("flat class has nonzero coboundary")


def sigma(f: FlatClass, q: int, dc: DeligneComplex | None = None) -> tuple[DeligneComplex, DeligneCochain]:
    """Include a flat class: ``h = f~``, ``c = -D f~``."""
    tot = f.cochain.space
    if f.cochain.degree != q - 1:
        raise DeligneError(f"flat class must have degree {q - 1}")
    if dc is None:
        raise DeligneError("pass the Deligne complex the flat class lives on")
    if tot is not dc.total:
        raise DeligneError("flat class does not live on this complex")
    h = f.cochain.as_ring(Q)
    c = -coboundary(h)
    if not c.is_integral():
        raise NotACocycle("lift of the flat class has non-integral coboundary")
    return dc, DeligneCochain(c.as_ring(Z), h)


def flat_generators(dc: DeligneComplex, degree: int) -> list[FlatClass]:
    """Representatives ``(1/d) x`` of the torsion part of ``H^degree(nerve; Q/Z)``.

    Each comes from an integral cocycle ``x`` with ``Dx = d y``; reducing
    ``y / d`` mod 1 gives a circle-valued cocycle of degree ``degree``.
    These are exactly the torsion classes paired with ``H^{degree+1}(Z)``.
    """
    from .chain_core import torsion_generators
    out = []
    for d, y in torsion_generators(dc.total, degree + 1):
        # y is a torsion cocycle of degree+1: d*y = D x for an integral x.
        D = dc.total.differential(degree)
        x = solve_integer(D, [d * v for v in y])
        if x is None:
            continue
        out.append(FlatClass(Cochain.from_vector(dc.total, degree, [Fraction(v, d) for v in x], QZ)))
    return out


# ---------------------------------------------------------------------------
# Triviality


@dataclass
class TrivializeResult:
    trivial: bool
    eta: DeligneCochain | None = None
    witness: Chain | None = None
    holonomy: Fraction | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.trivial


def _torus_cycles(dc: DeligneComplex, degree: int) -> list[Chain]:
    """Chains ``[g|h] - [h|g]`` at vertices fixed by commuting g, h (degree 2 only)."""
    if degree != 2:
        return []
    G = dc.base.group
    a = dc.base.action
    n = dc.nerve
    out = []
    for g, h in itertools.combinations(G.elements, 2):
        if G.mul(g, h) != G.mul(h, g):
            continue
        for v in dc.base.complex.vertices:
            if a.act_vertex(v, g) == v and a.act_vertex(v, h) == v:
                out.append(Chain(dc.total, 2, {n.id((g, h), (v,)): 1, n.id((h, g), (v,)): -1}))
                break
    return out


def trivialize(dc: DeligneComplex, x: DeligneCochain) -> TrivializeResult:
    """Find ``eta`` with ``D eta = x`` or a certificate that none exists."""
    if not dc.is_cocycle(x):
        raise NotACocycle("element is not a cocycle")
    omega = dc.curvature_of(x)
    if not omega.is_zero():
        s = min(omega.values)
        return TrivializeResult(False, reason=f"curvature nonzero on {s!r}")
    tot = dc.total
    n = x.degree
    h = x.h
    hv = h.vector()
    D = tot.differential(n - 2) if n >= 2 else Matrix(tot.dim(n - 1), 0)
    L = left_annihilator(D)
    target = L.apply(hv)
    k = solve_integer(L, target) if L.rows else [0] * tot.dim(n - 1)
    if k is None:
        for z in _torus_cycles(dc, n - 1) + integral_cycles(tot, n - 1):
            if (D.transpose().apply(z.vector()) if D.cols else []) and any(D.transpose().apply(z.vector())):
                continue
            v = pair(h, z)
            if v.denominator != 1:
                return TrivializeResult(False, witness=z, holonomy=mod1(v), reason="holonomy on an integral cycle")
        raise DeligneError("no solution but no witness found")
    # h - k lies in im D; pick h' with D h' = k - h, so h + D h' = k.
    rhs = [Fraction(a) - b for a, b in zip(k, hv)]
    hp = solve(D, rhs) if D.cols else ([] if not any(rhs) else None)
    if hp is None:
        raise DeligneError("inconsistent trivialization")
    eta = DeligneCochain(
        Cochain.from_vector(tot, n - 1, [-v for v in k], Z),
        Cochain.from_vector(tot, n - 2, hp, Q) if n >= 2 else Cochain.zero(tot, 0, Q),
    )
    check = dc.differential(eta)
    if check.c != x.c or check.h != x.h:
        raise DeligneError("trivialization does not reproduce the cocycle")
    return TrivializeResult(True, eta=eta)


def add(x: DeligneCochain, y: DeligneCochain) -> DeligneCochain:
    return DeligneCochain(x.c + y.c, x.h + y.h)


def neg(x: DeligneCochain) -> DeligneCochain:
    return DeligneCochain(-x.c, -x.h)


# ---------------------------------------------------------------------------
# Random data


def random_invariant_cochain(a: GroupAction, degree: int, rng: random.Random, den: int = 6, spread: int = 3) -> Cochain:
    from .orbifold import invariant_cochains
    cx = a.complex.cochain_complex
    out = Cochain.zero(cx, degree, Q)
    for b in invariant_cochains(a, degree):
        out = out + b.scale(Fraction(rng.randint(-spread * den, spread * den), den))
    return out


def random_cochain(space: FiniteComplex, degree: int, rng: random.Random, den: int = 6, spread: int = 3,
                   density: float = 0.7) -> Cochain:
    vals = {}
    for s in space.bases[degree]:
        if rng.random() < density:
            vals[s] = Fraction(rng.randint(-spread * den, spread * den), den)
    return Cochain(space, degree, vals, Q)


def random_gerbe(base: EquivariantComplex | GroupAction, rng: random.Random, den: int = 6,
                 flat: FlatClass | None = None, p_max: int = 4) -> GerbeCocycle:
    """Invariant B0 plus the coboundary of random ``(a, f)`` plus an optional flat class.

    ``B = B0 - da``, ``A_g = -(g*a - a - df_g)``, ``rho~ = g*f_h - f_gh + f_g``.
    """
    base = _as_action(base)
    a = base.action
    G = base.group
    cx = base.complex.cochain_complex
    B0 = random_invariant_cochain(a, 2, rng, den) if base.complex.dim >= 2 else Cochain.zero(cx, 2, Q)
    av = random_cochain(cx, 1, rng, den)
    f = {g: (random_cochain(cx, 0, rng, den) if g != G.identity else Cochain.zero(cx, 0, Q)) for g in G.elements}
    B = B0 - coboundary(av)
    A = {g: -(group_pullback(a, g, av) - av - coboundary(f[g])) for g in G.elements}
    rho = {(g, h): (group_pullback(a, g, f[h]) - f[G.mul(g, h)] + f[g]).reduce_mod1()
           for g in G.elements for h in G.elements}
    xi = GerbeCocycle.raw(base, B, A, rho)
    if flat is not None:
        dc = DeligneComplex(base, 3, p_max)
        _, fx = sigma(flat, 3, dc)
        fg = deligne_to_gerbe(dc, fx)
        xi = GerbeCocycle.raw(
            base,
            xi.B + fg.B,
            {g: xi.A[g] + fg.A[g] for g in G.elements},
            {k: xi.rho[k] + fg.rho[k] for k in xi.rho},
        )
        xi = normalize_gerbe(xi)[0]
    return xi


def perturb_gerbe(xi: GerbeCocycle, rng: random.Random, amount: Fraction = Fraction(1, 7)) -> tuple[GerbeCocycle, str]:
    """Change one entry of B, some A_g or some rho by ``amount``."""
    G = xi.base.group
    cx = xi.base.complex.cochain_complex
    choices = []
    if cx.dim(2) and xi.base.group.order > 1:
        choices.append("B")
    if cx.dim(1):
        choices.append("A")
    choices.append("rho")
    which = rng.choice(choices)
    if which == "B":
        s = rng.choice(cx.bases[2])
        B = xi.B + Cochain(cx, 2, {s: amount}, Q)
        return GerbeCocycle(xi.base, B, xi.A, xi.rho), f"B at {s!r}"
    if which == "A":
        g = rng.choice([g for g in G.elements if g != G.identity] or [G.identity])
        s = rng.choice(cx.bases[1])
        A = dict(xi.A)
        A[g] = A[g] + Cochain(cx, 1, {s: amount}, Q)
        return GerbeCocycle(xi.base, xi.B, A, xi.rho), f"A_{G.names[g]} at {s!r}"
    g = rng.choice(list(G.elements))
    h = rng.choice([h for h in G.elements if h != G.identity] or [G.identity])
    s = rng.choice(cx.bases[0])
    rho = dict(xi.rho)
    rho[(g, h)] = rho[(g, h)] + Cochain(cx, 0, {s: amount}, QZ)
    return GerbeCocycle(xi.base, xi.B, xi.A, rho), f"rho_({G.names[g]},{G.names[h]}) at {s!r}"


def gauge_shift(xi: GerbeCocycle, rng: random.Random, den: int = 6) -> GerbeCocycle:
    """``xi`` plus the total coboundary of random ``(a, f)`` with ``f_e = 0``; the class is unchanged."""
    a = xi.base.action
    G = xi.base.group
    cx = xi.base.complex.cochain_complex
    av = random_cochain(cx, 1, rng, den)
    f = {g: (random_cochain(cx, 0, rng, den) if g != G.identity else Cochain.zero(cx, 0, Q)) for g in G.elements}
    B = xi.B - coboundary(av)
    A = {g: xi.A[g] - (group_pullback(a, g, av) - av - coboundary(f[g])) for g in G.elements}
    rho = {(g, h): (xi.rho[(g, h)] + (group_pullback(a, g, f[h]) - f[G.mul(g, h)] + f[g]).as_ring(QZ))
           for g in G.elements for h in G.elements}
    return GerbeCocycle(xi.base, B, A, rho)
