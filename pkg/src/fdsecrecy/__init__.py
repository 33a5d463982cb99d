"""Sum-secrecy-rate optimization for a full-duplex base station with wireless power transfer."""

from .baselines import SCHEMES, BaselineResult, half_duplex_solve, perfect_fd_solve
from .harness import SweepResult, SweepSpec, derive_seed, gen_channels, run_instance, sweep
from .model import (
    ChannelSet,
    ContractError,
    InfeasibleError,
    NumericalError,
    RatesReport,
    SystemConfig,
    TransmitDesign,
    is_feasible,
)
from .receiver import optimal_receiver
from .spca import SpcaError, SpcaTrace, kkt_residual, spca_solve

__version__ = "0.1.0"

__all__ = [
    "SCHEMES",
    "BaselineResult",
    "ChannelSet",
    "ContractError",
    "InfeasibleError",
    "NumericalError",
    "RatesReport",
    "SpcaError",
    "SpcaTrace",
    "SweepResult",
    "SweepSpec",
    "SystemConfig",
    "TransmitDesign",
    "derive_seed",
    "gen_channels",
    "half_duplex_solve",
    "is_feasible",
    "kkt_residual",
    "optimal_receiver",
    "perfect_fd_solve",
    "run_instance",
    "spca_solve",
    "sweep",
]
