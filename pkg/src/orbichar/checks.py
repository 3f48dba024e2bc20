"""Verification suites over a scenario; each returns a ``CheckResult``."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .chain_core import ChainError, CoefficientRing, cohomology, format_rational, mod1
from .cheeger_simons import CSComplex, character_from_gerbe, elementary_chains
from .deligne import (
    DeligneComplex,
    PeriodsNotIntegral,
    check_gerbe_cocycle,
    curvature,
    flat_generators,
    gauge_shift,
    gerbe_to_deligne,
    integral_cycles,
    periods_integral,
    sigma,
)
from .loop_string import (
    BoundaryMismatch,
    LineBundleCocycle,
    act_on_loop,
    check_equivariance,
    glue,
    groupoid_defect,
    same_loop_data,
    segal_check,
    self_glue,
    transgress_F,
    transport_U,
    validate_loop,
    validate_surface,
    winding_obstruction,
)
from .scenarios import Scenario

PASS, FAIL, ERROR = "pass", "fail", "error"


@dataclass
class CheckResult:
    name: str
    status: str = PASS
    values: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    def fail(self, witness: str) -> None:
        self.status = FAIL
        self.witnesses.append(witness)

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "values": self.values, "witnesses": self.witnesses}


def _needs_gerbe(sc: Scenario, name: str) -> CheckResult | None:
    if sc.gerbe is None:
        r = CheckResult(name, ERROR)
        r.witnesses.append("scenario has no gerbe")
        return r
    return None


def check_gerbe(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "gerbe")
    if r:
        return r
    r = CheckResult("gerbe")
    for v in check_gerbe_cocycle(sc.gerbe):
        r.fail(str(v))
    r.values["relations_checked"] = ["ConnectionTransition", "ConnectionCocycle", "RhoCocycle", "Normalization"]
    return r


def check_loops(sc: Scenario) -> CheckResult:
    r = CheckResult("loops")
    for k, l in sorted(sc.loops.items()):
        for v in validate_loop(l):
            r.fail(f"{k}: {v}")
    for k, s in sorted(sc.surfaces.items()):
        for v in validate_surface(s):
            r.fail(f"{k}: {v}")
    r.values["loops"] = len(sc.loops)
    r.values["surfaces"] = len(sc.surfaces)
    return r


def transgression_table(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "transgress")
    if r:
        return r
    r = CheckResult("transgress")
    b = LineBundleCocycle(sc.gerbe)
    G = sc.orbifold.group
    table = {}
    for k, l in sorted(sc.loops.items()):
        bad = validate_loop(l)
        if bad:
            r.fail(f"{k}: {bad[0]}")
            continue
        table[k] = {G.names[g]: format_rational(transgress_F(b, l, g)) for g in G.elements}
    r.values["F"] = table
    return r


def transport_table(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "transport")
    if r:
        return r
    r = CheckResult("transport")
    b = LineBundleCocycle(sc.gerbe)
    table = {}
    for k, s in sorted(sc.surfaces.items()):
        bad = validate_surface(s)
        if bad:
            r.fail(f"{k}: {bad[0]}")
            continue
        op = transport_U(b, s)
        table[k] = {"log_value": format_rational(op.log_value), "incoming": list(op.source), "outgoing": list(op.target)}
    r.values["U"] = table
    return r


def check_groupoid(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "groupoid")
    if r:
        return r
    r = CheckResult("groupoid")
    b = LineBundleCocycle(sc.gerbe)
    G = sc.orbifold.group
    n = 0
    for k, l in sorted(sc.loops.items()):
        if validate_loop(l):
            r.fail(f"{k}: invalid loop")
            continue
        if transgress_F(b, l, G.identity) != 0:
            r.fail(f"{k}: F(phi, e) != 0")
        for g, h in itertools.product(G.elements, repeat=2):
            n += 1
            d = groupoid_defect(b, l, g, h)
            if d:
                w = winding_obstruction(b, l, g, h)
                r.fail(f"{k}: F(phi,{G.names[g]}) + F(phi.{G.names[g]},{G.names[h]}) - F(phi,{G.names[g]}{G.names[h]}) = "
                       f"{format_rational(d)} (winding {w}, |Gamma| = {l.gamma.order})")
    r.values["identities_checked"] = n
    return r


def check_action_laws(sc: Scenario) -> CheckResult:
    r = CheckResult("action")
    G = sc.orbifold.group
    n = 0
    for k, l in sorted(sc.loops.items()):
        if validate_loop(l):
            continue
        if not same_loop_data(act_on_loop(l, G.identity), l):
            r.fail(f"{k}: acting by e changes the loop")
        for g, h in itertools.product(G.elements, repeat=2):
            n += 1
            lg = act_on_loop(l, g)
            if validate_loop(lg):
                r.fail(f"{k}: loop acted on by {G.names[g]} is invalid")
            if not same_loop_data(act_on_loop(lg, h), act_on_loop(l, G.mul(g, h))):
                r.fail(f"{k}: acting by {G.names[g]} then {G.names[h]} differs from acting by the product")
    r.values["laws_checked"] = n
    return r


def check_equivariance_suite(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "equivariance")
    if r:
        return r
    r = CheckResult("equivariance")
    b = LineBundleCocycle(sc.gerbe)
    G = sc.orbifold.group
    vals = {}
    for k, s in sorted(sc.surfaces.items()):
        if validate_surface(s):
            r.fail(f"{k}: invalid surface")
            continue
        for g in G.elements:
            res = check_equivariance(b, s, g)
            vals[f"{k}/{G.names[g]}"] = format_rational(res.lhs)
            for v in res.report:
                r.fail(f"{k}: {v}")
    r.values["surface_side"] = vals
    return r


def check_gluing(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "gluing")
    if r:
        return r
    r = CheckResult("gluing")
    b = LineBundleCocycle(sc.gerbe)
    vals = {}
    for gl in sc.gluings:
        s1 = sc.surfaces[gl.out_surface]
        try:
            if gl.in_surface == gl.out_surface:
                s = self_glue(s1, gl.out_index, gl.in_index, gl.ident)
                expected = transport_U(b, s1).log_value
            else:
                s2 = sc.surfaces[gl.in_surface]
                s = glue(s1, gl.out_index, s2, gl.in_index, gl.ident)
                expected = mod1(transport_U(b, s1).log_value + transport_U(b, s2).log_value)
        except BoundaryMismatch as exc:
            r.fail(f"{gl.name}: {exc}")
            continue
        bad = validate_surface(s)
        if bad:
            r.fail(f"{gl.name}: glued surface invalid: {bad[0]}")
            continue
        got = transport_U(b, s).log_value
        vals[gl.name] = format_rational(got)
        if got != expected:
            r.fail(f"{gl.name}: glued transport {got} != {expected}")
    r.values["glued_log_values"] = vals
    return r


def check_segal(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "segal")
    if r:
        return r
    r = CheckResult("segal")
    b = LineBundleCocycle(sc.gerbe)
    vals = {}
    for v in sc.volumes:
        try:
            res = segal_check(b, v.chain, sc.surfaces[v.surface])
        except BoundaryMismatch as exc:
            r.fail(f"{v.name}: {exc}")
            continue
        vals[v.name] = format_rational(res.volume)
        for w in res.report:
            r.fail(f"{v.name}: {w}")
    r.values["volumes"] = vals
    return r


def check_characters(sc: Scenario, seed: int, samples: int = 40) -> CheckResult:
    """Character of the gerbe: ``chi(dS) = omega(S)`` and invariance under a gauge shift."""
    r = _needs_gerbe(sc, "characters")
    if r:
        return r
    r = CheckResult("characters")
    rng = random.Random(seed)
    xi = sc.gerbe
    try:
        chi = character_from_gerbe(xi)
    except ChainError as exc:
        r.status = ERROR
        r.witnesses.append(str(exc))
        return r
    shifted = character_from_gerbe(gauge_shift(xi, rng))
    total = chi.nerve.total
    chains = elementary_chains(total, 3)
    chains = sorted(rng.sample(chains, min(samples, len(chains))), key=lambda z: sorted(z.coeffs))
    for w in chi.check_chains(chains):
        r.fail(w)
    cycles = integral_cycles(total, 2)
    for i, z in enumerate(cycles):
        if chi(z) != shifted(z):
            r.fail(f"nerve cycle {i}: {chi(z)} != {shifted(z)} after a gauge shift")
    surf = {}
    for k, s in sorted(sc.surfaces.items()):
        if s.closed and not validate_surface(s):
            a, c = chi(s), shifted(s)
            surf[k] = format_rational(a)
            if a != c:
                r.fail(f"{k}: {a} != {c} after a gauge shift")
    r.values.update({"boundary_chains": len(chains), "nerve_cycles": len(cycles), "closed_surfaces": surf})
    return r


def curvature_report(sc: Scenario) -> CheckResult:
    r = _needs_gerbe(sc, "curvature")
    if r:
        return r
    r = CheckResult("curvature")
    try:
        omega = curvature(sc.gerbe)
    except ChainError as exc:
        r.fail(str(exc))
        return r
    r.values["zero"] = omega.is_zero()
    r.values["omega"] = {"|".join(map(str, s)): format_rational(v) for s, v in sorted(omega.values.items())}
    return r


def periods_report(sc: Scenario, p_max: int = 4) -> CheckResult:
    r = _needs_gerbe(sc, "periods")
    if r:
        return r
    r = CheckResult("periods")
    try:
        omega = curvature(sc.gerbe)
        res = periods_integral(omega, sc.orbifold.nerve(p_max))
    except ChainError as exc:
        r.fail(str(exc))
        return r
    r.values["integral"] = res.integral
    if not res.integral:
        r.fail(f"period {format_rational(res.value)} on an integral cycle")
    return r


def ses_report(sc: Scenario, q: int, p_max: int | None = None) -> CheckResult:
    """Exactness of ``H^{q-1}(R/Z) -> H^q-hat -> closed forms`` at desk scale."""
    r = CheckResult(f"ses-q{q}")
    p = q + 2 if p_max is None else p_max
    dc = DeligneComplex(sc.orbifold, q, p)
    cs = CSComplex(sc.orbifold, q, p)
    flat_group = cohomology(dc.total, q - 1, CoefficientRing.RATIONALS_MOD_1)
    kernel = cs.curvature_kernel()
    r.values["H^{q-1}(R/Z)"] = str(flat_group)
    r.values["curvature_kernel"] = str(kernel)
    r.values["differential_characters"] = str(cs.cohomology(q))
    if (kernel.torsion, kernel.divisible_rank, kernel.free_rank) != (flat_group.torsion, flat_group.divisible_rank, flat_group.free_rank):
        r.fail(f"curvature kernel {kernel} != H^(q-1)(R/Z) {flat_group}")
    gens = flat_generators(dc, q - 1)
    for i, f in enumerate(gens):
        _, x = sigma(f, q, dc)
        if not dc.is_cocycle(x):
            r.fail(f"sigma of flat generator {i} is not a cocycle")
        elif not dc.curvature_of(x).is_zero():
            r.fail(f"kappa(sigma(flat generator {i})) != 0")
    r.values["flat_generators"] = len(gens)
    if sc.gerbe is not None and q == 3:
        omega = curvature(sc.gerbe)
        _, x = gerbe_to_deligne(sc.gerbe, max(p, 4))
        dg = DeligneComplex(sc.orbifold, 3, max(p, 4))
        if dg.curvature_of(x) != omega:
            r.fail("the gerbe's Deligne cocycle has the wrong curvature")
        try:
            y = cs.realize_form(omega)
            if not cs.is_cocycle(y):
                r.fail("realized form is not a cocycle")
        except PeriodsNotIntegral as exc:
            r.fail(str(exc))
        r.values["gerbe_curvature_realized"] = r.status == PASS
    return r


VERIFY_SUITES = ("action", "characters", "equivariance", "gerbe", "gluing", "groupoid", "loops", "segal")


def verify(sc: Scenario, seed: int) -> list[CheckResult]:
    runners = {
        "action": lambda: check_action_laws(sc),
        "characters": lambda: check_characters(sc, seed),
        "equivariance": lambda: check_equivariance_suite(sc),
        "gerbe": lambda: check_gerbe(sc),
        "gluing": lambda: check_gluing(sc),
        "groupoid": lambda: check_groupoid(sc),
        "loops": lambda: check_loops(sc),
        "segal": lambda: check_segal(sc),
    }
    gerbe_ok = sc.gerbe is not None and not check_gerbe_cocycle(sc.gerbe)
    out = []
    for name in VERIFY_SUITES:
        if sc.gerbe is None and name not in ("loops", "action"):
            continue
        if name not in ("gerbe", "loops", "action") and sc.gerbe is not None and not gerbe_ok:
            out.append(CheckResult(name, ERROR, witnesses=["skipped: the gerbe fails its relations"]))
            continue
        out.append(runners[name]())
    return out
