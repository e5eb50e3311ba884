"""AeroMACS OFDMA physical-layer trade-off toolkit."""

from .core_params import (
    AEROMACS_DEFAULT,
    MCS_TABLE,
    McsScheme,
    NoFeasibleRatio,
    OfdmaConfig,
    SymbolBudgetExceeded,
    cp_length,
    data_rate,
    frame_throughput,
    select_cp_ratio,
    snr_loss_db,
    subcarrier_spacing,
    symbol_time,
)
from .ici_simulator import SimulationResult, SimulationSpec, simulate_cp_isi, simulate_ici
from .mobility import (
    coherence_time_s,
    doppler_shift_hz,
    doppler_spread_limit_hz,
    ici_power,
    max_supported_speed_mps,
    signal_to_ici_db,
)
from .propagation import (
    ExcessLossModel,
    LinkBudget,
    delay_spread_s,
    effective_cell_range_m,
    free_space_path_loss_db,
    max_los_coverage_m,
    plan_corridor,
)
from .special import bessel_j0

__version__ = "0.1.0"
