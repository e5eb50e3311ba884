"""Doppler, inter-carrier interference and coherence-time analytics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .propagation import SPEED_OF_LIGHT
from .special import bessel_j0, bessel_j0_complement

__all__ = [
    "COHERENCE_CONSTANT",
    "DEFAULT_ES_DBM",
    "PUBLISHED_MAX_SPEED_MPS",
    "PUBLISHED_MAX_SPEED_KMH",
    "DegenerateIci",
    "InfiniteCoherence",
    "IciPower",
    "MobilityAnalysis",
    "bessel_j0",
    "dbm_to_mw",
    "mw_to_dbm",
    "doppler_shift_hz",
    "ici_power",
    "ici_power_norm",
    "ici_power_bruteforce_norm",
    "ici_small_arg_norm",
    "signal_to_ici_db",
    "coherence_time_s",
    "doppler_spread_limit_hz",
    "max_supported_speed_mps",
    "analyze_speed",
]

# sqrt(9 / (16 pi)), usually quoted as 0.423
COHERENCE_CONSTANT = math.sqrt(9.0 / (16.0 * math.pi))

DEFAULT_ES_DBM = 24.0

# Published speed limit. It does not follow from the spacing/5 -> coherence
# time -> Doppler chain (which gives ~49.8 m/s at 5.1 GHz); kept for reference.
PUBLISHED_MAX_SPEED_MPS = 35.9
PUBLISHED_MAX_SPEED_KMH = 129.25

ICI_MODES = ("sample", "literal")


class DegenerateIci(ValueError):
    """ICI power is exactly zero, so it has no dBm value."""


class InfiniteCoherence(ValueError):
    """Zero Doppler: the channel never decorrelates."""


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0:
        raise DegenerateIci("power is zero; dBm is undefined")
    return 10.0 * math.log10(mw)


def doppler_shift_hz(speed_mps: float, freq_hz: float) -> float:
    if speed_mps < 0 or not freq_hz > 0:
        raise ValueError("speed must be nonnegative and frequency positive")
    return speed_mps * freq_hz / SPEED_OF_LIGHT


def _toeplitz_weights(n_subcarriers: int):
    lags = np.arange(-(n_subcarriers - 1), n_subcarriers)
    return lags, (n_subcarriers - np.abs(lags)).astype(float)


def ici_power_norm(fd_ts: float, n_subcarriers: int, mode: str = "sample") -> float:
    """ICI power relative to the symbol energy, in [0, 1].

    The double sum over subcarrier pairs depends only on the index
    difference, so it collapses to ``sum_m (N - |m|) J0(2 pi fd_ts m / N)``
    over ``m`` in ``(-N, N)``. In ``"sample"`` mode the time step between
    neighbouring indices is the sample period Ts/N; ``"literal"`` uses the
    full symbol period Ts instead, which makes the result nearly independent
    of speed.
    """
    if n_subcarriers < 2:
        raise ValueError("n_subcarriers must be >= 2")
    if fd_ts < 0:
        raise ValueError("normalised Doppler must be nonnegative")
    if mode not in ICI_MODES:
        raise ValueError(f"mode must be one of {ICI_MODES}, got {mode!r}")
    if fd_ts == 0:
        return 0.0
    step = fd_ts / n_subcarriers if mode == "sample" else fd_ts
    lags, weights = _toeplitz_weights(n_subcarriers)
    # sum of weights is N^2, so 1 - sum(w J0)/N^2 == sum(w (1 - J0))/N^2
    deficit = bessel_j0_complement(2.0 * math.pi * step * lags)
    value = float(np.dot(weights, deficit)) / n_subcarriers**2
    return min(max(value, 0.0), 1.0)


def ici_power_bruteforce_norm(
    fd_ts: float, n_subcarriers: int, mode: str = "sample"
) -> float:
    """Direct O(N^2) evaluation of the double sum; slow, used as a check."""
    step = fd_ts / n_subcarriers if mode == "sample" else fd_ts
    k = np.arange(n_subcarriers)
    diff = k[:, None] - k[None, :]
    total = math.fsum(bessel_j0(2.0 * math.pi * step * diff).ravel())
    return 1.0 - total / n_subcarriers**2


def ici_small_arg_norm(fd_ts: float, n_subcarriers: int) -> float:
    """Low-Doppler approximation pi^2 (fd Ts)^2 (1 - 1/N^2) / 6."""
    return math.pi**2 * fd_ts**2 * (1.0 - 1.0 / n_subcarriers**2) / 6.0


@dataclass(frozen=True)
class IciPower:
    """ICI power alongside the symbol energy it was computed for."""

    mw: float
    es_mw: float

    @property
    def dbm(self) -> float:
        """ICI power in dBm; raises :class:`DegenerateIci` when it is zero."""
        return mw_to_dbm(self.mw)

    @property
    def relative(self) -> float:
        return self.mw / self.es_mw


def ici_power(
    es_dbm: float,
    doppler_hz: float,
    symbol_time_s: float,
    n_subcarriers: int,
    mode: str = "sample",
) -> IciPower:
    if not symbol_time_s > 0:
        raise ValueError("symbol_time_s must be positive")
    es_mw = dbm_to_mw(es_dbm)
    norm = ici_power_norm(doppler_hz * symbol_time_s, n_subcarriers, mode)
    return IciPower(mw=es_mw * norm, es_mw=es_mw)


def signal_to_ici_db(es_dbm: float, ici: IciPower) -> float:
    """Es over ICI in dB; ``math.inf`` when there is no ICI."""
    if ici.mw == 0:
        return math.inf
    return 10.0 * math.log10(dbm_to_mw(es_dbm) / ici.mw)


def coherence_time_s(doppler_hz: float) -> float:
    """Coherence time sqrt(9 / (16 pi)) / fD.

    Raises:
        InfiniteCoherence: for zero Doppler.
    """
    if doppler_hz < 0:
        raise ValueError("Doppler must be nonnegative")
    if doppler_hz == 0:
        raise InfiniteCoherence("static channel has unbounded coherence time")
    return COHERENCE_CONSTANT / doppler_hz


def doppler_spread_limit_hz(subcarrier_spacing_hz: float) -> float:
    """Largest Doppler spread that keeps the spacing above five times it."""
    if not subcarrier_spacing_hz > 0:
        raise ValueError("subcarrier spacing must be positive")
    return subcarrier_spacing_hz / 5.0


def max_supported_speed_mps(
    subcarrier_spacing_hz: float, carrier_freq_hz: float
) -> float:
    """Top speed before the Doppler exceeds what the spacing tolerates.

    spread limit = spacing / 5, minimum coherence time = 1 / limit,
    max Doppler = sqrt(9 / (16 pi)) / Tc_min, speed = fD_max * c / f.
    """
    if not carrier_freq_hz > 0:
        raise ValueError("carrier frequency must be positive")
    tc_min = 1.0 / doppler_spread_limit_hz(subcarrier_spacing_hz)
    fd_max = COHERENCE_CONSTANT / tc_min
    return fd_max * SPEED_OF_LIGHT / carrier_freq_hz


@dataclass(frozen=True)
class MobilityAnalysis:
    """One row of a speed sweep.

    ``ici_power_dbm`` is ``None`` and the other two unbounded fields are
    ``math.inf`` for a stationary terminal.
    """

    speed_mps: float
    carrier_freq_hz: float
    doppler_hz: float
    ici_power_dbm: float | None
    signal_to_ici_db: float
    coherence_time_s: float


def analyze_speed(
    speed_mps: float,
    carrier_freq_hz: float,
    symbol_time_s: float,
    n_subcarriers: int,
    es_dbm: float = DEFAULT_ES_DBM,
    mode: str = "sample",
) -> MobilityAnalysis:
    fd = doppler_shift_hz(speed_mps, carrier_freq_hz)
    ici = ici_power(es_dbm, fd, symbol_time_s, n_subcarriers, mode)
    try:
        ici_dbm = ici.dbm
    except DegenerateIci:
        ici_dbm = None
    try:
        tc = coherence_time_s(fd)
    except InfiniteCoherence:
        tc = math.inf
    return MobilityAnalysis(
        speed_mps=speed_mps,
        carrier_freq_hz=carrier_freq_hz,
        doppler_hz=fd,
        ici_power_dbm=ici_dbm,
        signal_to_ici_db=signal_to_ici_db(es_dbm, ici),
        coherence_time_s=tc,
    )
