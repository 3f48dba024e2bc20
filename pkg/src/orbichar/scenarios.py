"""Scenario files and the built-in example library."""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .chain_core import Chain, ChainError, Cochain, CoefficientRing
from .deligne import GerbeCocycle, _key, _unkey, perturb_gerbe, random_gerbe
from .loop_string import (
    BoundaryLoop,
    OrbifoldLoop,
    OrbifoldSurface,
    box_chain,
    boundary_surface,
    cover_loop,
    cover_surface,
    loop_from_walk,
    self_glue,
    surface_from_map,
    torus_cylinder,
)
from .orbifold import (
    EquivariantComplex,
    FiniteGroup,
    GroupAction,
    _jsonable,
    _unjson,
    cube_torus,
    cyclic_group,
    point_quotient,
    product_group,
    rotation_action,
    sphere_complex,
    torus_rotation,
    trivial_action,
)

QZ = CoefficientRing.RATIONALS_MOD_1
SCHEMA_VERSION = "1"
DEFAULT_MAX_CELLS = 100000


class ScenarioError(ChainError):
    pass


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    pass


@dataclass
class Gluing:
    name: str
    out_surface: str
    out_index: int
    in_surface: str  # equal to out_surface for a self-gluing
    in_index: int
    ident: dict


@dataclass
class Volume:
    name: str
    chain: Chain
    surface: str


@dataclass
class Scenario:
    name: str
    orbifold: EquivariantComplex
    gerbe: GerbeCocycle | None = None
    loops: dict = field(default_factory=dict)
    surfaces: dict = field(default_factory=dict)
    gluings: list = field(default_factory=list)
    volumes: list = field(default_factory=list)
    q: int = 2
    degrees: tuple = (0, 4)
    truncation: int | None = None
    description: str = ""

    def to_json(self) -> dict:
        a = self.orbifold.action
        out = {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "description": self.description,
            "orbifold": {**a.complex.to_json(), **a.to_json()},
            "checks": {"q": self.q, "degrees": list(self.degrees), "truncation": self.truncation},
        }
        if self.gerbe is not None:
            out["gerbe"] = self.gerbe.to_json()
        out["loops"] = {k: _loop_json(l) for k, l in sorted(self.loops.items())}
        out["surfaces"] = {k: _surface_json(s, self.loops) for k, s in sorted(self.surfaces.items())}
        out["gluings"] = [{
            "name": g.name, "out": g.out_surface, "out_index": g.out_index,
            "in": g.in_surface, "in_index": g.in_index,
            "ident": [[_jsonable(a), _jsonable(b)] for a, b in sorted(g.ident.items())],
        } for g in self.gluings]
        out["volumes"] = [{
            "name": v.name, "surface": v.surface,
            "chain": {_key(s): c for s, c in sorted(v.chain.coeffs.items())},
        } for v in self.volumes]
        return out


def _loop_json(l: OrbifoldLoop) -> dict:
    d = l.to_json()
    d.pop("name")
    return d


def _surface_json(s: OrbifoldSurface, loops: dict) -> dict:
    d = s.to_json()
    d.pop("name")
    ids = {id(l): k for k, l in loops.items()}

    def ref(x: BoundaryLoop) -> dict:
        if id(x.loop) not in ids:
            raise ValidationError(f"surface {s.name} uses a loop not listed in the scenario")
        return {"loop": ids[id(x.loop)], "inclusion": [[_jsonable(a), _jsonable(b)] for a, b in sorted(x.inclusion.items())]}

    d["boundary"] = {"incoming": [ref(x) for x in s.incoming], "outgoing": [ref(x) for x in s.outgoing]}
    return d


def _where(path: str, exc: Exception) -> ValidationError:
    return ValidationError(f"{path}: {exc}")


def scenario_from_json(obj: dict, max_cells: int | None = None) -> Scenario:
    if not isinstance(obj, dict):
        raise ValidationError("/: scenario must be a JSON object")
    if max_cells is None:
        max_cells = int(os.environ.get("ORBI_MAX_CELLS", DEFAULT_MAX_CELLS))
    try:
        o = obj["orbifold"]
        action = GroupAction.from_json(o, name=obj.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise _where("/orbifold", exc) from exc
    cells = sum(action.complex.count(k) for k in range(action.complex.dim + 1))
    if cells * action.group.order > max_cells:
        raise ValidationError(f"/orbifold: {cells} cells times |G|={action.group.order} exceeds ORBI_MAX_CELLS={max_cells}")
    try:
        base = EquivariantComplex(action, name=obj.get("name", ""))
    except ChainError as exc:
        raise _where("/orbifold/action", exc) from exc
    checks = obj.get("checks", {})
    sc = Scenario(obj.get("name", "scenario"), base, q=int(checks.get("q", 2)),
                  degrees=tuple(checks.get("degrees", (0, 4))), truncation=checks.get("truncation"),
                  description=obj.get("description", ""))
    if "gerbe" in obj:
        try:
            sc.gerbe = GerbeCocycle.from_json(base, obj["gerbe"], validate=False)
        except (KeyError, TypeError, ValueError, ChainError) as exc:
            raise _where("/gerbe", exc) from exc
    for k, lo in sorted(obj.get("loops", {}).items()):
        try:
            sc.loops[k] = OrbifoldLoop.from_json({**lo, "name": k}, base)
        except (KeyError, TypeError, ValueError, ChainError) as exc:
            raise _where(f"/loops/{k}", exc) from exc
    for k, so in sorted(obj.get("surfaces", {}).items()):
        try:
            bd = so.get("boundary", {})
            stripped = {**so, "name": k, "boundary": {}}
            s = OrbifoldSurface.from_json(stripped, base)
            for side, dest in (("incoming", s.incoming), ("outgoing", s.outgoing)):
                for i, ref in enumerate(bd.get(side, [])):
                    if ref["loop"] not in sc.loops:
                        raise ValidationError(f"/surfaces/{k}/boundary/{side}/{i}: unknown loop {ref['loop']!r}")
                    dest.append(BoundaryLoop(sc.loops[ref["loop"]], {_unjson(a): _unjson(b) for a, b in ref["inclusion"]}))
            sc.surfaces[k] = s
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError, ChainError) as exc:
            raise _where(f"/surfaces/{k}", exc) from exc
    for i, g in enumerate(obj.get("gluings", [])):
        for side in ("out", "in"):
            if g.get(side) not in sc.surfaces:
                raise ValidationError(f"/gluings/{i}/{side}: unknown surface {g.get(side)!r}")
        sc.gluings.append(Gluing(g.get("name", f"gluing{i}"), g["out"], int(g["out_index"]), g["in"], int(g["in_index"]),
                                 {_unjson(a): _unjson(b) for a, b in g["ident"]}))
    M = base.complex.cochain_complex
    for i, v in enumerate(obj.get("volumes", [])):
        if v.get("surface") not in sc.surfaces:
            raise ValidationError(f"/volumes/{i}/surface: unknown surface {v.get('surface')!r}")
        try:
            chain = Chain(M, 3, {_unkey(s): int(c) for s, c in v["chain"].items()})
        except (KeyError, TypeError, ValueError, ChainError) as exc:
            raise _where(f"/volumes/{i}/chain", exc) from exc
        sc.volumes.append(Volume(v.get("name", f"volume{i}"), chain, v["surface"]))
    return sc


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return scenario_from_json(obj)


def dump_scenario(sc: Scenario) -> str:
    return json.dumps(sc.to_json(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Built-ins


def discrete_torsion_gerbe(base: EquivariantComplex, cocycle: dict) -> GerbeCocycle:
    """Flat gerbe with ``B = 0``, ``A = 0`` and constant ``rho_{g,h} = cocycle[(g, h)]``."""
    cx = base.complex.cochain_complex
    rho = {k: Cochain(cx, 0, {(v,): Fraction(c) for v in base.complex.vertices}, QZ) for k, c in cocycle.items()}
    return GerbeCocycle.create(base, Cochain.zero(cx, 2, CoefficientRing.RATIONALS), {}, rho, normalize=False)


def klein_torsion_cocycle(G: FiniteGroup) -> dict:
    """``(a, b) -> a_1 b_2 / 2`` on ``Z/2 x Z/2`` indexed as ``2 a_1 + a_2``."""
    return {(a, b): Fraction((a // 2) * (b % 2), 2) for a in G.elements for b in G.elements}


def _pt_z2() -> Scenario:
    base = EquivariantComplex(point_quotient(cyclic_group(2)), name="pt-mod-z2")
    sc = Scenario("pt-mod-z2", base, GerbeCocycle.trivial(base), q=2, degrees=(0, 4),
                  description="a point with Z/2 acting trivially; trivial gerbe")
    const = loop_from_walk(base, [0, 0, 0], name="constant")
    sc.loops["constant"] = const
    sc.loops["twisted"] = cover_loop(const, 1)
    S = sphere_complex(2)
    sc.surfaces["sphere"] = surface_from_map(base, S, {v: 0 for v in S.vertices}, "sphere")
    return sc


def _pt_z2z2() -> Scenario:
    G = product_group(cyclic_group(2), cyclic_group(2))
    base = EquivariantComplex(point_quotient(G), name="pt-mod-z2xz2")
    sc = Scenario("pt-mod-z2xz2", base, discrete_torsion_gerbe(base, klein_torsion_cocycle(G)), q=3, degrees=(0, 4),
                  description="a point with the Klein four-group; the discrete torsion gerbe")
    const = loop_from_walk(base, [0, 0, 0], name="constant")
    sc.loops["constant"] = const
    for g in (1, 2, 3):
        sc.loops[f"twisted{g}"] = cover_loop(const, g)
    return sc


def _circle_z3(seed: int = 3) -> Scenario:
    base = EquivariantComplex(rotation_action(3, 1), name="circle-z3")
    rng = random.Random(seed)
    sc = Scenario("circle-z3", base, random_gerbe(base, rng), q=2, degrees=(0, 3),
                  description="triangle circle with Z/3 rotation; a coboundary-built gerbe")
    sc.loops["circle"] = loop_from_walk(base, [0, 1, 2], name="circle")
    sc.loops["circle-back"] = loop_from_walk(base, [0, 2, 1], name="circle-back")
    sc.loops["circle-cover"] = cover_loop(sc.loops["circle"], 1)
    return sc


def _torus_z2(seed: int = 4, kind: str = "random") -> Scenario:
    base = EquivariantComplex(torus_rotation(3), name="torus-z2")
    rng = random.Random(seed)
    if kind == "trivial":
        xi = GerbeCocycle.trivial(base)
    else:
        xi = random_gerbe(base, rng)
        if kind == "perturbed":
            xi, _ = perturb_gerbe(xi, rng)
    name = {"random": "torus-z2", "trivial": "torus-z2-trivial", "perturbed": "torus-z2-perturbed"}[kind]
    desc = {"random": "3x3 torus with Z/2 rotation by pi; a flat coboundary-built gerbe",
            "trivial": "3x3 torus with Z/2 rotation by pi; the trivial gerbe",
            "perturbed": "3x3 torus with Z/2 rotation by pi; a gerbe with one corrupted entry"}[kind]
    sc = Scenario(name, base, xi, q=3, degrees=(0, 4), description=desc)
    sc.loops["meridian"] = loop_from_walk(base, [(0, 0), (0, 1), (0, 2)], name="meridian")
    sc.loops["meridian-cover"] = cover_loop(sc.loops["meridian"], 1)
    c1 = torus_cylinder(base, 0, 2, name="c1")
    c2 = torus_cylinder(base, 2, 1, name="c2")
    c3 = torus_cylinder(base, 0, 3, name="c3")
    cc = cover_surface(c1, 1)
    cc.name = "c1-cover"
    for s in (c1, c2, c3, cc):
        sc.surfaces[s.name] = s
        for x in s.incoming + s.outgoing:
            sc.loops[x.loop.name] = x.loop
    tor = self_glue(c3, 0, 0, {(i, 3): (i, 0) for i in range(3)})
    tor.name = "torus"
    sc.surfaces["torus"] = tor
    sc.gluings.append(Gluing("c1+c2", "c1", 0, "c2", 0, {(i, 2): (i, 0) for i in range(3)}))
    sc.gluings.append(Gluing("c3-closed", "c3", 0, "c3", 0, {(i, 3): (i, 0) for i in range(3)}))
    return sc


def _t3(seed: int = 7) -> Scenario:
    base = EquivariantComplex(trivial_action(cube_torus(3)), name="t3")
    rng = random.Random(seed)
    sc = Scenario("t3", base, random_gerbe(base, rng), q=3, degrees=(0, 3),
                  description="3x3x3 cube-grid 3-torus, trivial group; a gerbe with nonzero curvature")
    for k, (origin, size) in enumerate((((0, 0, 0), (1, 1, 1)), ((1, 0, 2), (2, 1, 1)), ((0, 1, 1), (2, 2, 1)))):
        v = box_chain(base.complex, origin, size, 3)
        s = boundary_surface(base, v, name=f"box{k}")
        sc.surfaces[s.name] = s
        sc.volumes.append(Volume(f"box{k}", v, s.name))
    return sc


BUILTINS = {
    "pt-mod-z2": _pt_z2,
    "pt-mod-z2xz2": _pt_z2z2,
    "circle-z3": _circle_z3,
    "torus-z2": _torus_z2,
    "torus-z2-trivial": lambda: _torus_z2(kind="trivial"),
    "torus-z2-perturbed": lambda: _torus_z2(kind="perturbed"),
    "t3": _t3,
}


def builtin(name: str) -> Scenario:
    if name not in BUILTINS:
        raise ValidationError(f"unknown built-in scenario {name!r}; choose from {', '.join(sorted(BUILTINS))}")
    return BUILTINS[name]()


SPACES = {
    "pt-mod-z2": lambda: point_quotient(cyclic_group(2)),
    "pt-mod-z2xz2": lambda: point_quotient(product_group(cyclic_group(2), cyclic_group(2))),
    "circle": lambda: trivial_action(rotation_action(3, 1).complex),
    "circle-z3": lambda: rotation_action(3, 1),
    "torus": lambda: trivial_action(torus_rotation(3).complex),
    "torus-z2": lambda: torus_rotation(3),
    "t3": lambda: trivial_action(cube_torus(3)),
}
