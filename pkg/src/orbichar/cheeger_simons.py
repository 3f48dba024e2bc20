"""Cheeger-Simons cochains on ``[M/G]`` and differential characters.

Degree ``n`` holds ``(c, h, omega)``: an integral nerve cochain of degree
``n``, a rational one of degree ``n - 1``, and (only when ``n >= q``) an
invariant rational ``n``-cochain on M.  The differential is

    d(c, h, omega) = (Dc, omega~ - c - Dh, d omega)

where ``omega~`` is the lift into the ``p = 0`` column; below weight ``q``
the form slot is absent and ``omega~`` is read as zero.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

from .chain_core import (
    Chain,
    ChainError,
    Cochain,
    CoefficientRing,
    CohomologyGroup,
    DegreeMismatch,
    FiniteComplex,
    Matrix,
    MixedComplex,
    boundary,
    coboundary,
    left_annihilator,
    mixed_cohomology,
    mixed_torsion_representatives,
    mod1,
    pair,
    solve,
    solve_integer,
)
from .deligne import (
    DeligneCochain,
    DeligneComplex,
    GerbeCocycle,
    NotACocycle,
    PeriodsNotIntegral,
    TruncationTooSmall,
    _as_action,
    curvature,
    gerbe_to_deligne,
    integral_cycles,
    periods_integral,
)
from .orbifold import (
    EquivariantComplex,
    GroupAction,
    NerveModel,
    NotInvariant,
    invariant_cochains,
    is_invariant,
    lift_invariant_form,
)

Z = CoefficientRing.INTEGERS
Q = CoefficientRing.RATIONALS
QZ = CoefficientRing.RATIONALS_MOD_1


@dataclass(frozen=True)
class CSCochain:
    n: int
    q: int
    c: Cochain
    h: Cochain | None
    omega: Cochain | None = None

    def __post_init__(self):
        if self.c.degree != self.n:
            raise DegreeMismatch("integral part has the wrong degree")
        if self.h is not None and self.h.degree != self.n - 1:
            raise DegreeMismatch("rational part has the wrong degree")
        if self.n >= self.q:
            # None stands for zero when n exceeds every stored form degree
            if self.omega is not None and self.omega.degree != self.n:
                raise DegreeMismatch(f"degree {self.n} needs a form of degree {self.n}")
        elif self.omega is not None and not self.omega.is_zero():
            raise DegreeMismatch(f"no form slot below weight {self.q}")

    def is_zero(self) -> bool:
        return (self.c.is_zero() and (self.h is None or self.h.is_zero())
                and (self.omega is None or self.omega.is_zero()))

    def __add__(self, other: CSCochain) -> CSCochain:
        return CSCochain(
            self.n, self.q, self.c + other.c,
            None if self.h is None else self.h + other.h,
            None if self.omega is None else self.omega + other.omega,
        )


class CSComplex:
    """Weight-``q`` Cheeger-Simons complex over the nerve truncated at ``p_max``."""

    def __init__(self, base: EquivariantComplex | GroupAction, q: int, p_max: int | None = None):
        self.base = _as_action(base)
        self.q = q
        self.p_max = q + 2 if p_max is None else p_max

    @property
    def nerve(self) -> NerveModel:
        return self.base.nerve(self.p_max)

    @property
    def total(self) -> FiniteComplex:
        return self.nerve.total

    @property
    def forms(self) -> FiniteComplex:
        return self.base.complex.cochain_complex

    def zero(self, n: int) -> CSCochain:
        return CSCochain(
            n, self.q,
            Cochain.zero(self.total, n, Z),
            Cochain.zero(self.total, n - 1, Q) if n >= 1 else None,
            Cochain.zero(self.forms, n, Q) if self.q <= n <= self.forms.top else None,
        )

    def differential(self, x: CSCochain) -> CSCochain:
        if x.n + 1 > self.total.top:
            raise TruncationTooSmall(f"need p_max >= {x.n + 1}")
        dc = coboundary(x.c)
        mid = -x.c.as_ring(Q)
        if x.h is not None:
            mid = mid - coboundary(x.h)
        if x.omega is not None:
            mid = mid + lift_invariant_form(self.nerve, x.omega)
        new_omega = None
        if self.q <= x.n + 1 <= self.forms.top:
            new_omega = coboundary(x.omega) if x.omega is not None else Cochain.zero(self.forms, x.n + 1, Q)
        return CSCochain(x.n + 1, self.q, dc, mid, new_omega)

    def is_cocycle(self, x: CSCochain) -> bool:
        return self.differential(x).is_zero()

    def random(self, n: int, rng: random.Random, den: int = 5) -> CSCochain:
        """Random element: integral c, rational h, random invariant form."""
        tot = self.total
        c = Cochain(tot, n, {s: rng.randint(-3, 3) for s in tot.bases[n] if rng.random() < 0.6}, Z)
        h = None
        if n >= 1:
            h = Cochain(tot, n - 1, {s: Fraction(rng.randint(-3 * den, 3 * den), den)
                                     for s in tot.bases[n - 1] if rng.random() < 0.6}, Q)
        omega = None
        if self.q <= n <= self.forms.top:
            omega = Cochain.zero(self.forms, n, Q)
            for b in invariant_cochains(self.base.action, n):
                omega = omega + b.scale(Fraction(rng.randint(-3 * den, 3 * den), den))
        return CSCochain(n, self.q, c, h, omega)

    # -- cohomology -------------------------------------------------------

    def _form_basis(self, n: int) -> list[Cochain]:
        if n < self.q or n > self.forms.top:
            return []
        return invariant_cochains(self.base.action, n)

    @cached_property
    def mixed(self) -> MixedComplex:
        """Integral part ``c``; rational part ``(h, omega)`` in form-basis coordinates."""
        tot = self.total
        top = tot.top
        nerve = self.nerve
        forms = [self._form_basis(n) for n in range(top + 1)]
        bases = []
        for n in range(top + 1):
            hs = tuple(("h", k) for k in tot.bases[n - 1]) if n >= 1 else ()
            ws = tuple(("w", n, i) for i in range(len(forms[n])))
            bases.append(hs + ws)
        diffs = []
        for n in range(top):
            nh0 = tot.dim(n - 1) if n >= 1 else 0
            nh1 = tot.dim(n)
            rows: list[dict] = [{} for _ in range(len(bases[n + 1]))]
            if n >= 1:
                D = tot.differential(n - 1)
                for i, r in enumerate(D.data):
                    for j, v in r.items():
                        rows[i][j] = -v
            for i, b in enumerate(forms[n]):
                col = nh0 + i
                for s, v in b.values.items():
                    rows[tot.index(n, nerve.id((), s))][col] = v
                if forms[n + 1]:
                    coords = _invariant_coordinates(forms[n + 1], coboundary(b))
                    for k, v in enumerate(coords):
                        if v:
                            rows[nh1 + k][col] = v
            diffs.append(Matrix(len(bases[n + 1]), len(bases[n]), rows))
        rational = FiniteComplex(bases, diffs)
        link = {}
        for n in range(top):
            link[n] = Matrix(len(bases[n + 1]), tot.dim(n), [{i: -1} for i in range(tot.dim(n))]
                             + [{} for _ in range(len(bases[n + 1]) - tot.dim(n))])
        return MixedComplex(tot, rational, link)

    def cohomology(self, n: int) -> CohomologyGroup:
        if n < 0:
            return CohomologyGroup()
        if n > self.p_max - 1:
            raise TruncationTooSmall(f"degree {n} needs p_max >= {n + 1}")
        return mixed_cohomology(self.mixed, n)

    def torsion_cocycles(self, n: int) -> list[tuple[int, CSCochain]]:
        """Cocycles for the finite cyclic summands of ``H^n``."""
        out = []
        forms = self._form_basis(n)
        tot = self.total
        for order, x, y in mixed_torsion_representatives(self.mixed, n):
            nh = tot.dim(n - 1) if n >= 1 else 0
            h = Cochain.from_vector(tot, n - 1, y[:nh], Q) if n >= 1 else None
            omega = None
            if self.q <= n <= self.forms.top:
                omega = Cochain.zero(self.forms, n, Q)
                for b, v in zip(forms, y[nh:]):
                    omega = omega + b.scale(v)
            out.append((order, CSCochain(n, self.q, Cochain.from_vector(tot, n, x, Z), h, omega)))
        return out

    # -- cocycles from data ---------------------------------------------

    def realize_form(self, omega: Cochain) -> CSCochain:
        """A cocycle with curvature ``omega``; raises PeriodsNotIntegral when none exists."""
        n = omega.degree
        if n != self.q:
            raise DegreeMismatch("curvature must have degree q")
        if not is_invariant(self.base.action, omega):
            raise NotInvariant("form is not invariant")
        lifted = lift_invariant_form(self.nerve, omega)
        D = self.total.differential(n - 1)
        L = left_annihilator(D)
        w = lifted.vector()
        k = solve_integer(L, L.apply(w)) if L.rows else [0] * len(w)
        if k is None:
            res = periods_integral(omega, self.nerve)
            raise PeriodsNotIntegral(f"no integral lift; period {res.value}")
        hp = solve(D, [Fraction(a) - b for a, b in zip(k, w)]) if D.cols else []
        x = CSCochain(n, self.q, Cochain.from_vector(self.total, n, k, Z),
                      -Cochain.from_vector(self.total, n - 1, hp, Q), omega)
        assert self.is_cocycle(x)
        return x

    def from_deligne(self, dc: DeligneComplex, x: DeligneCochain) -> CSCochain:
        """``(c, h) -> (c, h, curvature)``; both complexes must share the nerve."""
        if dc.total is not self.total:
            raise ChainError("Deligne and CS complexes must share a nerve")
        return CSCochain(x.degree, self.q, x.c, x.h, dc.curvature_of(x))

    def curvature_kernel(self) -> CohomologyGroup:
        """Classes in degree ``q`` with vanishing curvature: degree ``q`` of the weight ``q+1`` complex."""
        return CSComplex(self.base, self.q + 1, self.p_max).cohomology(self.q)


def _invariant_coordinates(basis: list[Cochain], c: Cochain) -> list[Fraction]:
    """Coordinates of an invariant cochain in an orbit-sum basis (disjoint supports)."""
    out = []
    for b in basis:
        s, v = next(iter(b.values.items()))
        out.append(Fraction(c[s]) / v)
    return out


def cs_differential(cs: CSComplex, x: CSCochain) -> CSCochain:
    return cs.differential(x)


def cs_cohomology(a: EquivariantComplex | GroupAction, q: int, n: int, p_max: int | None = None) -> CohomologyGroup:
    p = n + 2 if p_max is None else p_max
    if p < n + 1:
        raise TruncationTooSmall(f"degree {n} needs p_max >= {n + 1}")
    return CSComplex(a, q, p).cohomology(n)


# ---------------------------------------------------------------------------
# Characters


@dataclass
class DifferentialCharacter:
    """``(chi, omega)``: a mod-1 evaluator on cycles plus the curvature on M."""

    q: int
    omega: Cochain
    nerve: NerveModel | None = None
    h: Cochain | None = None
    surface_value: Callable | None = None

    def __call__(self, z) -> Fraction:
        if isinstance(z, Chain):
            if self.h is None:
                raise ChainError("this character has no nerve-cycle evaluator")
            if z.degree != self.q - 1:
                raise DegreeMismatch(f"characters of weight {self.q} evaluate on {self.q - 1}-cycles")
            if z.degree > 0 and not boundary(z).is_zero():
                raise ChainError("not a cycle")
            return mod1(pair(self.h, z))
        if self.surface_value is None:
            raise ChainError("this character has no surface evaluator")
        return self.surface_value(z)

    def lifted_curvature(self) -> Cochain:
        return lift_invariant_form(self.nerve, self.omega)

    def check_chains(self, chains: list[Chain]) -> list[str]:
        """``chi(dS) = <omega~, S>`` mod 1 for each chain ``S``."""
        bad = []
        lifted = self.lifted_curvature()
        for S in chains:
            lhs = self(boundary(S))
            rhs = mod1(pair(lifted, S))
            if lhs != rhs:
                bad.append(f"chi(dS) = {lhs} but omega(S) = {rhs}")
        return bad

    def to_json(self, cycles: dict[str, Chain]) -> dict:
        from .chain_core import format_rational
        from .deligne import _cochain_json
        return {
            "q": self.q,
            "omega": _cochain_json(self.omega),
            "evaluations": [{"cycle_id": k, "value": format_rational(self(z))} for k, z in sorted(cycles.items())],
        }


def character_from_cs_cocycle(cs: CSComplex, x: CSCochain) -> DifferentialCharacter:
    if x.n != cs.q:
        raise DegreeMismatch("characters come from degree-q cocycles")
    if not cs.is_cocycle(x):
        raise NotACocycle("not a CS cocycle")
    return DifferentialCharacter(cs.q, x.omega, cs.nerve, x.h)


def character_from_gerbe(xi: GerbeCocycle, p_max: int = 4) -> DifferentialCharacter:
    """Weight-3 character of a global gerbe.

    Closed equivariant surfaces are evaluated by surface transport; nerve
    2-cycles by the rational part of the associated Deligne cocycle.
    """
    from .loop_string import InvalidSurface, LineBundleCocycle, transport_U

    b = LineBundleCocycle(xi)
    dc, x = gerbe_to_deligne(xi, p_max)

    def on_surface(s) -> Fraction:
        if s.incoming or s.outgoing:
            raise InvalidSurface("characters evaluate on closed surfaces")
        return transport_U(b, s).log_value

    return DifferentialCharacter(3, curvature(xi), dc.nerve, x.h, on_surface)


def elementary_chains(total: FiniteComplex, degree: int) -> list[Chain]:
    """The basis chains of a total degree (a spanning set for chain checks)."""
    return [Chain(total, degree, {s: 1}) for s in total.bases[degree]]


def cycle_basis(total: FiniteComplex, degree: int) -> list[Chain]:
    return integral_cycles(total, degree)
