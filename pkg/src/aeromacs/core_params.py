"""OFDMA numerology, rate and overhead formulas for the AeroMACS profile.

All quantities are SI: frequencies in Hz, times in seconds, rates in bit/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

__all__ = [
    "OfdmaConfig",
    "McsScheme",
    "AEROMACS_DEFAULT",
    "PROFILES",
    "MCS_TABLE",
    "NoFeasibleRatio",
    "SymbolBudgetExceeded",
    "subcarrier_spacing",
    "symbol_time",
    "cp_length",
    "select_cp_ratio",
    "data_rate",
    "snr_loss_db",
    "frame_throughput",
    "get_profile",
]

MIN_CP_LOG2 = 2
MAX_CP_LOG2 = 8


class NoFeasibleRatio(ValueError):
    """No guard ratio 1/2^k with k in [2, 8] covers the delay spread."""


class SymbolBudgetExceeded(ValueError):
    """More OFDM symbols were requested than one frame holds."""


def _is_pow2(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


@dataclass(frozen=True)
class OfdmaConfig:
    """Numerology of one OFDMA channel.

    Subcarrier counts are split per direction into data, pilot and null
    carriers; each split must add up to ``n_subcarriers``.
    """

    bandwidth_hz: float
    n_subcarriers: int
    cp_ratio_log2: int
    frame_symbols: int
    frame_duration_s: float
    dl_data_subcarriers: int
    dl_pilot_subcarriers: int
    dl_null_subcarriers: int
    ul_data_subcarriers: int
    ul_pilot_subcarriers: int
    ul_null_subcarriers: int

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if not _is_pow2(self.n_subcarriers):
            raise ValueError(
                f"n_subcarriers must be a power of two >= 2, got {self.n_subcarriers}"
            )
        if not MIN_CP_LOG2 <= self.cp_ratio_log2 <= MAX_CP_LOG2:
            raise ValueError(
                f"cp_ratio_log2 must lie in [{MIN_CP_LOG2}, {MAX_CP_LOG2}], "
                f"got {self.cp_ratio_log2}"
            )
        if self.frame_symbols < 1:
            raise ValueError(f"frame_symbols must be >= 1, got {self.frame_symbols}")
        if not self.frame_duration_s > 0:
            raise ValueError(
                f"frame_duration_s must be positive, got {self.frame_duration_s}"
            )
        for direction in ("dl", "ul"):
            counts = [
                getattr(self, f"{direction}_{kind}_subcarriers")
                for kind in ("data", "pilot", "null")
            ]
            if any(c < 0 for c in counts):
                raise ValueError(f"{direction}_*_subcarriers must be nonnegative")
            if sum(counts) != self.n_subcarriers:
                raise ValueError(
                    f"{direction}_data + {direction}_pilot + {direction}_null "
                    f"= {sum(counts)} != n_subcarriers ({self.n_subcarriers})"
                )

    @property
    def guard_ratio(self) -> Fraction:
        """G = 1/2^k."""
        return Fraction(1, 2**self.cp_ratio_log2)

    def data_subcarriers(self, direction: str) -> int:
        direction = direction.upper()
        if direction == "DL":
            return self.dl_data_subcarriers
        if direction == "UL":
            return self.ul_data_subcarriers
        raise ValueError(f"direction must be 'DL' or 'UL', got {direction!r}")


@dataclass(frozen=True)
class McsScheme:
    """Modulation and coding scheme, with optional measured throughputs (kbit/s)."""

    name: str
    bits_per_symbol: int
    coding_rate: Fraction
    reference_dl_kbps: Optional[float] = None
    reference_ul_kbps: Optional[float] = None

    def __post_init__(self):
        if self.bits_per_symbol not in (2, 4, 6):
            raise ValueError(
                f"bits_per_symbol must be 2, 4 or 6, got {self.bits_per_symbol}"
            )
        rate = Fraction(self.coding_rate)
        if not 0 < rate < 1:
            raise ValueError(f"coding_rate must lie in (0, 1), got {self.coding_rate}")
        object.__setattr__(self, "coding_rate", rate)


AEROMACS_DEFAULT = OfdmaConfig(
    bandwidth_hz=5e6,
    n_subcarriers=512,
    cp_ratio_log2=3,
    frame_symbols=24,
    frame_duration_s=5e-3,
    dl_data_subcarriers=360,
    dl_pilot_subcarriers=60,
    dl_null_subcarriers=92,
    ul_data_subcarriers=272,
    ul_pilot_subcarriers=136,
    ul_null_subcarriers=104,
)

PROFILES = {"aeromacs-default": AEROMACS_DEFAULT}

# Measured throughputs are from field trials at rate 1/2; the other FEC
# rates carry no reference values.
MCS_TABLE = {
    "QPSK-1/2": McsScheme("QPSK-1/2", 2, Fraction(1, 2), 983.3, 532.4),
    "QPSK-3/4": McsScheme("QPSK-3/4", 2, Fraction(3, 4)),
    "16QAM-1/2": McsScheme("16QAM-1/2", 4, Fraction(1, 2), 2153.52, 1235.52),
    "16QAM-3/4": McsScheme("16QAM-3/4", 4, Fraction(3, 4)),
    "64QAM-1/2": McsScheme("64QAM-1/2", 6, Fraction(1, 2), 3595.04, 1758.48),
    "64QAM-2/3": McsScheme("64QAM-2/3", 6, Fraction(2, 3)),
    "64QAM-3/4": McsScheme("64QAM-3/4", 6, Fraction(3, 4)),
    "64QAM-5/6": McsScheme("64QAM-5/6", 6, Fraction(5, 6)),
}


def get_profile(name: str) -> OfdmaConfig:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(
            f"unknown profile {name!r}; known profiles: {sorted(PROFILES)}"
        ) from None


def subcarrier_spacing(cfg: OfdmaConfig) -> float:
    """Subcarrier spacing BW / (N + 1).

    Note this is *not* the reciprocal of :func:`symbol_time`, which uses
    BW / N. For the default profile the two differ by about 0.2 %
    (9746.6 Hz vs 9765.6 Hz); both round to 10 kHz.
    """
    return cfg.bandwidth_hz / (cfg.n_subcarriers + 1)


def symbol_time(cfg: OfdmaConfig) -> float:
    """Useful OFDM symbol duration N / BW (102.4 us for the default profile)."""
    return cfg.n_subcarriers / cfg.bandwidth_hz


def cp_length(cfg: OfdmaConfig) -> float:
    return symbol_time(cfg) / 2**cfg.cp_ratio_log2


def select_cp_ratio(symbol_time_s: float, max_delay_spread_s: float) -> int:
    """Pick the cyclic-prefix exponent k for G = 1/2^k.

    Returns the largest k in [2, 8] whose prefix ``symbol_time_s / 2**k``
    still covers ``max_delay_spread_s``, i.e. the least overhead that absorbs
    the delay spread. A prefix exactly equal to the spread is accepted.

    Raises:
        NoFeasibleRatio: if even G = 1/4 is shorter than the delay spread.
    """
    if not symbol_time_s > 0 or not max_delay_spread_s > 0:
        raise ValueError("symbol time and delay spread must be positive")
    for k in range(MAX_CP_LOG2, MIN_CP_LOG2 - 1, -1):
        # Compare ratio rather than cp >= spread so exact-bound inputs such
        # as 102.4 us / 256 vs 0.4 us are not lost to rounding.
        if symbol_time_s / max_delay_spread_s >= 2**k * (1 - 1e-12):
            return k
    raise NoFeasibleRatio(
        f"largest prefix {symbol_time_s / 2**MIN_CP_LOG2:.6g} s "
        f"(G=1/{2**MIN_CP_LOG2}) is shorter than delay spread {max_delay_spread_s:.6g} s"
    )


def data_rate(cfg: OfdmaConfig, bits_per_symbol: int) -> float:
    """Raw uncoded rate over all subcarriers, N * b / (CP + Ts)."""
    if bits_per_symbol < 0:
        raise ValueError("bits_per_symbol must be nonnegative")
    return cfg.n_subcarriers * bits_per_symbol / (cp_length(cfg) + symbol_time(cfg))


def snr_loss_db(cfg: OfdmaConfig) -> float:
    """SNR penalty of the cyclic prefix, -10 log10(1 - CP / (CP + Ts))."""
    cp = cp_length(cfg)
    return -10.0 * math.log10(1.0 - cp / (cp + symbol_time(cfg)))


def frame_throughput(
    cfg: OfdmaConfig, mcs: McsScheme, direction: str, n_symbols: int
) -> float:
    """PHY throughput when ``n_symbols`` of each frame go to ``direction``.

    Preamble, MAC control and TTG/RTG gaps are not modelled, so this is an
    upper bound on what a MAC would see.

    Raises:
        SymbolBudgetExceeded: if ``n_symbols`` exceeds the frame length.
    """
    if n_symbols < 1:
        raise ValueError(f"n_symbols must be >= 1, got {n_symbols}")
    if n_symbols > cfg.frame_symbols:
        raise SymbolBudgetExceeded(
            f"{n_symbols} symbols requested, frame holds {cfg.frame_symbols}"
        )
    bits_per_frame = (
        cfg.data_subcarriers(direction)
        * mcs.bits_per_symbol
        * mcs.coding_rate
        * n_symbols
    )
    return float(bits_per_frame) / cfg.frame_duration_s
