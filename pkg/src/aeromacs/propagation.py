"""Link budget, coverage range and ground-station corridor planning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "AEROMACS_BAND_HZ",
    "DELAY_SPREAD_REF_S",
    "DELAY_SPREAD_REF_M",
    "GATE_CELL_RADIUS_M",
    "RUNWAY_CELL_RADIUS_M",
    "LinkBudget",
    "ExcessLossModel",
    "InfeasibleCorridor",
    "free_space_path_loss_db",
    "max_los_coverage_m",
    "effective_cell_range_m",
    "delay_spread_s",
    "plan_corridor",
    "coverage_counts",
]

SPEED_OF_LIGHT = 2.998e8  # m/s
AEROMACS_BAND_HZ = (5.091e9, 5.150e9)

# 10.2 us measured over 10,000 ft of airport surface
DELAY_SPREAD_REF_S = 10.2e-6
DELAY_SPREAD_REF_M = 3048.0

GATE_CELL_RADIUS_M = 1100.0
RUNWAY_CELL_RADIUS_M = 2500.0

ALPHA_ENVELOPE_DB_PER_KM = (5.0, 10.0)


class InfeasibleCorridor(ValueError):
    """Station spacing for the requested radius/redundancy is degenerate."""


@dataclass(frozen=True)
class LinkBudget:
    """Maximum allowed path loss at a carrier frequency.

    ``max_path_loss_db`` is taken as all-inclusive; the antenna gains and
    transmit power are carried for reporting only and never folded in.
    """

    max_path_loss_db: float = 128.0
    carrier_freq_hz: float = 5.1e9
    gs_antenna_gain_dbi: float = 15.0
    ms_antenna_gain_dbi: float = 6.0
    tx_power_dbm: float = 23.0
    aeromacs_band: bool = False

    def __post_init__(self):
        if not self.max_path_loss_db > 0:
            raise ValueError(
                f"max_path_loss_db must be positive, got {self.max_path_loss_db}"
            )
        if not self.carrier_freq_hz > 0:
            raise ValueError(
                f"carrier_freq_hz must be positive, got {self.carrier_freq_hz}"
            )
        lo, hi = AEROMACS_BAND_HZ
        if self.aeromacs_band and not lo <= self.carrier_freq_hz <= hi:
            raise ValueError(
                f"carrier_freq_hz {self.carrier_freq_hz:g} outside the AeroMACS "
                f"band [{lo:g}, {hi:g}]"
            )


@dataclass(frozen=True)
class ExcessLossModel:
    """Linear non-LoS excess loss, ``alpha_db_per_km`` dB on top of FSPL per km.

    Field trials report 10-20 dB per 2 km, hence the [5, 10] dB/km envelope;
    set ``allow_override`` to step outside it.
    """

    alpha_db_per_km: float = 7.5
    allow_override: bool = False

    def __post_init__(self):
        lo, hi = ALPHA_ENVELOPE_DB_PER_KM
        if self.alpha_db_per_km < 0:
            raise ValueError("alpha_db_per_km must be nonnegative")
        if not self.allow_override and not lo <= self.alpha_db_per_km <= hi:
            raise ValueError(
                f"alpha_db_per_km {self.alpha_db_per_km} outside [{lo}, {hi}]; "
                "set allow_override to use it anyway"
            )


def free_space_path_loss_db(distance_m: float, freq_hz: float) -> float:
    """20 log10(4 pi d f / c)."""
    if not distance_m > 0 or not freq_hz > 0:
        raise ValueError("distance and frequency must be positive")
    return 20.0 * math.log10(4.0 * math.pi * distance_m * freq_hz / SPEED_OF_LIGHT)


def max_los_coverage_m(budget: LinkBudget) -> float:
    """Line-of-sight range at which free-space loss uses up the whole budget."""
    wavelength_term = SPEED_OF_LIGHT / (4.0 * math.pi * budget.carrier_freq_hz)
    return wavelength_term * math.sqrt(10.0 ** (budget.max_path_loss_db / 10.0))


def effective_cell_range_m(
    budget: LinkBudget, model: ExcessLossModel, tol_m: float = 1e-6
) -> float:
    """Range where FSPL plus linear excess loss reaches the budget.

    The total loss is strictly increasing in distance, so bisection on
    [1 m, LoS range] finds the unique root.
    """
    d_max = max_los_coverage_m(budget)
    alpha = model.alpha_db_per_km
    if alpha == 0:
        return d_max

    def excess(d):
        return (
            free_space_path_loss_db(d, budget.carrier_freq_hz)
            + alpha * d / 1000.0
            - budget.max_path_loss_db
        )

    lo, hi = 1.0, d_max
    if d_max <= lo or excess(lo) >= 0:
        # Budget too small for even one metre
        return min(lo, d_max)
    while hi - lo > tol_m:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def delay_spread_s(distance_m: float) -> float:
    """Delay spread scaled linearly from the 10.2 us / 3048 m airport measurement."""
    if distance_m < 0:
        raise ValueError("distance must be nonnegative")
    return DELAY_SPREAD_REF_S * distance_m / DELAY_SPREAD_REF_M


def coverage_counts(
    positions, length_m: float, radius_m: float, resolution_m: float = 1.0
) -> np.ndarray:
    """Number of stations within ``radius_m`` of each sample point on [0, length].

    The endpoint is always sampled even if it is not a multiple of
    ``resolution_m``.
    """
    pos = np.sort(np.asarray(positions, dtype=float))
    xs = np.arange(0.0, length_m, resolution_m)
    xs = np.append(xs, length_m)
    # Tiny slack keeps stations placed exactly one radius away counted.
    slack = 1e-9 * max(1.0, radius_m)
    hi = np.searchsorted(pos, xs + radius_m + slack, side="right")
    lo = np.searchsorted(pos, xs - radius_m - slack, side="left")
    return hi - lo


def plan_corridor(length_m: float, cell_radius_m: float, redundancy: int) -> list:
    """Place ground stations uniformly along a 1-D corridor.

    Every point of ``[0, length_m]`` ends up within ``cell_radius_m`` of at
    least ``redundancy`` stations. Interior points need spacing at most
    ``2 r / k``; the two ends only see stations on one side, which for
    ``k >= 2`` additionally requires spacing at most ``r / (k - 1)``. The
    tighter bound is used, stations sit at both ends, and the actual spacing
    is ``length / (n - 1)`` for the smallest ``n`` respecting it.

    Returns:
        Station positions in metres, ascending, first 0 and last ``length_m``.

    Raises:
        InfeasibleCorridor: if the required spacing falls below 1 m.
    """
    if not length_m > 0 or not cell_radius_m > 0:
        raise ValueError("corridor length and cell radius must be positive")
    if redundancy < 1:
        raise ValueError(f"redundancy must be >= 1, got {redundancy}")

    spacing = 2.0 * cell_radius_m / redundancy
    if redundancy >= 2:
        spacing = min(spacing, cell_radius_m / (redundancy - 1))
    if spacing < 1.0:
        raise InfeasibleCorridor(
            f"spacing {spacing:.3g} m below 1 m for radius {cell_radius_m} m "
            f"and redundancy {redundancy}"
        )

    n_gaps = max(math.ceil(length_m / spacing - 1e-12), redundancy)
    positions = [length_m * i / n_gaps for i in range(n_gaps + 1)]

    counts = coverage_counts(positions, length_m, cell_radius_m)
    if counts.min() < redundancy:
        raise AssertionError(
            f"corridor plan covers some point only {counts.min()} times"
        )
    return positions
