"""Casimir-Polder shifts and forces on a two-level atom near a dielectric half-space.

The substrate and the environment may sit at different temperatures. See
:mod:`cpforce.engine` for the numerical route and :mod:`cpforce.asymptotics`
for closed-form limits.
"""

from .model import AtomSpec, ComplexPermittivity, Geometry, PerfectConductor, RealConstant, State, ThermalConfig

__version__ = "0.1.0"

__all__ = [
    "AtomSpec",
    "ComplexPermittivity",
    "Geometry",
    "PerfectConductor",
    "RealConstant",
    "State",
    "ThermalConfig",
    "__version__",
]
