"""Atomic Lambda-media susceptibilities and hybrid optomechanical cooling."""

from .core import (
    AngularFrequency,
    MechanicalParams,
    OpticalCavityParams,
    drive_amplitude,
    effective_cavity_response,
    hz,
)
from .eit import EitMediumParams, chi_eit, eit_cavity_field, eit_effective_linewidth
from .rir import MomentumGrid, RirMediumParams, chi_rir, rir_medium_field, thermal_distribution
from .backaction import (
    CascadeSystem,
    CoolingResult,
    EitResponse,
    FeedbackSystem,
    RirResponse,
    compare_with_bare,
    improvement_factor,
)

__version__ = "0.1.0"
