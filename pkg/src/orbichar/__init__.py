"""Exact differential characters, gerbes and string-connection checks on finite global quotients."""

__version__ = "0.1.0"

from .chain_core import CoefficientRing, CohomologyGroup, cohomology
from .orbifold import EquivariantComplex, FiniteGroup, GroupAction, SimplicialComplex
from .deligne import DeligneComplex, GerbeCocycle, check_gerbe_cocycle
from .cheeger_simons import CSComplex, DifferentialCharacter, character_from_gerbe
from .loop_string import LineBundleCocycle, OrbifoldLoop, OrbifoldSurface, transgress_F, transport_U

__all__ = [
    "CSComplex", "CoefficientRing", "CohomologyGroup", "DeligneComplex", "DifferentialCharacter",
    "EquivariantComplex", "FiniteGroup", "GerbeCocycle", "GroupAction", "LineBundleCocycle",
    "OrbifoldLoop", "OrbifoldSurface", "SimplicialComplex", "character_from_gerbe",
    "check_gerbe_cocycle", "cohomology", "transgress_F", "transport_U",
]
