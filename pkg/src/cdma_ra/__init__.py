"""Large-system analysis of random-access CDMA with linear receivers."""

__version__ = "0.1.0"

from .asymptotic import (
    CapacityReport,
    SirSolution,
    capacity_report,
    eb_n0,
    link_capacity,
    sir_decorrelator,
    sir_mf,
    solve_sir,
    solve_sir_mmse,
    spectral_efficiency,
)
from .errors import ConfigError, ModelDomainError, NumericalError, ResourceError, StabilityError
from .model import (
    ChipModel,
    PowerClass,
    PowerProfile,
    Receiver,
    SystemConfig,
    limit_loaded_power_cdf,
    profile_moments,
    traffic_load,
    validate_profile,
)
