"""Thermodynamic limit and finite-size corrections for the XXZ Bethe ansatz."""

from .bae import ChainParams, ExcitationSpec, BetheState, solve_state
from .counting import CountingFn, expansion, nlie_residual, convergence_report
from .dressed import density, dressed_charge, dressed_energy, dressed_momentum, dressed_phase
from .errors import (
    ContourTooClose,
    FieldOutOfRange,
    InvalidSpec,
    NoConvergence,
    OutOfRange,
    SingularSystem,
    UnboundedBoundary,
    XXZError,
    ZeroDensity,
)
from .fermi import fermi_boundary_from_field, magnetic_fermi_boundary, two_endpoint_solve
from .kernels import Anisotropy
from .linsolve import resolvent_kernel, solve_second_kind
from .observables import conformal_check, densify, energy_decomposition, fermi_velocity

__all__ = [
    "Anisotropy", "ChainParams", "ExcitationSpec", "BetheState", "solve_state",
    "CountingFn", "expansion", "nlie_residual", "convergence_report",
    "density", "dressed_charge", "dressed_energy", "dressed_momentum", "dressed_phase",
    "fermi_boundary_from_field", "magnetic_fermi_boundary", "two_endpoint_solve",
    "resolvent_kernel", "solve_second_kind",
    "conformal_check", "densify", "energy_decomposition", "fermi_velocity",
    "XXZError", "InvalidSpec", "SingularSystem", "UnboundedBoundary", "FieldOutOfRange",
    "NoConvergence", "OutOfRange", "ContourTooClose", "ZeroDensity",
]
