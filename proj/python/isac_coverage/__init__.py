"""Coverage-optimal transmit beamforming for bi-static ISAC."""

from ._isac import (
    DegenerateGeometryError,
    InfeasibleError,
    SolverError,
    ValidationError,
    __version__,
    angles_from_positions,
    comm_only_beamforming,
    comm_sinr,
    coverage,
    default_config,
    optimal_single,
    oracle_single_ue,
    run_cli,
    sensing_snr,
    upa_steering,
    wavesim_isotropic,
)

__all__ = [
    "DegenerateGeometryError",
    "InfeasibleError",
    "SolverError",
    "ValidationError",
    "__version__",
    "angles_from_positions",
    "comm_only_beamforming",
    "comm_sinr",
    "coverage",
    "default_config",
    "optimal_single",
    "oracle_single_ue",
    "run_cli",
    "sensing_snr",
    "upa_steering",
    "wavesim_isotropic",
]
