"""Monte Carlo OFDM over time-varying Rayleigh fading.

Two experiments:

* :func:`simulate_ici` measures the inter-carrier interference of one OFDM
  symbol sent through flat Clarke/Jakes fading and compares it with the
  analytic value from :func:`aeromacs.mobility.ici_power_norm`.
* :func:`simulate_cp_isi` sends a stream of cyclic-prefixed symbols through a
  static two-path channel and counts symbol errors, showing when the prefix
  absorbs the echo.

Reproducibility: trial ``i`` of a run seeded with ``seed`` draws from
``numpy.random.default_rng(SeedSequence([seed, i]))``, so every trial is a
pure function of ``(seed, i)``. Per-trial statistics are stored by index and
reduced in index order, which keeps results bit-identical for any number of
workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .mobility import ici_power_norm
from .special import bessel_j0

__all__ = [
    "SimulationSpec",
    "SimulationResult",
    "trial_rng",
    "generate_fading",
    "generate_fading_exact",
    "simulate_ici",
    "simulate_cp_isi",
    "qpsk",
]

CONSTELLATIONS = ("qpsk", "16qam")
FADING_METHODS = ("sos", "exact")
_CHUNK = 512
_MAX_SEED = 2**64 - 1


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index]))


def _sos_fading(n_samples, fd_tsamp, oscillators, rng):
    alpha = rng.uniform(0.0, 2.0 * math.pi, oscillators)
    phi = rng.uniform(0.0, 2.0 * math.pi, oscillators)
    n = np.arange(n_samples)
    phase = 2.0 * math.pi * fd_tsamp * np.outer(n, np.cos(alpha)) + phi
    return np.exp(1j * phase).sum(axis=1) / math.sqrt(oscillators)


def generate_fading(
    n_samples: int, fd_tsamp: float, oscillators: int, trial_seed: int
) -> np.ndarray:
    """Sum-of-sinusoids Clarke fading, ``n_samples`` long.

    ``h(n) = M^-1/2 * sum_m exp(j (2 pi fd_tsamp n cos a_m + p_m))`` with
    arrival angles ``a_m`` and phases ``p_m`` uniform on [0, 2 pi). Averaged
    over draws the process has unit power and autocorrelation
    ``J0(2 pi fd_tsamp * lag)``.
    """
    if fd_tsamp < 0:
        raise ValueError("fd_tsamp must be nonnegative")
    if oscillators < 1:
        raise ValueError("oscillators must be >= 1")
    rng = np.random.default_rng(trial_seed)
    return _sos_fading(n_samples, fd_tsamp, oscillators, rng)


def _exact_factor(n_samples, fd_tsamp):
    lags = np.arange(n_samples)
    r = bessel_j0(2.0 * math.pi * fd_tsamp * (lags[:, None] - lags[None, :]))
    w, v = np.linalg.eigh(r)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _exact_fading(factor, rng):
    n = factor.shape[0]
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    return factor @ z


def generate_fading_exact(
    n_samples: int, fd_tsamp: float, trial_seed: int
) -> np.ndarray:
    """Gaussian fading with exactly J0 autocorrelation.

    Factorises the covariance matrix, so cost is O(n^3); meant as a
    cross-check for short blocks.
    """
    if fd_tsamp < 0:
        raise ValueError("fd_tsamp must be nonnegative")
    factor = _exact_factor(n_samples, fd_tsamp)
    return _exact_fading(factor, np.random.default_rng(trial_seed))


def qpsk(rng: np.random.Generator, size) -> np.ndarray:
    bits = rng.integers(0, 2, size=(2,) + tuple(np.atleast_1d(size)))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / math.sqrt(2.0)


def _qam16(rng, size):
    levels = np.array([-3.0, -1.0, 1.0, 3.0])
    idx = rng.integers(0, 4, size=(2,) + tuple(np.atleast_1d(size)))
    return (levels[idx[0]] + 1j * levels[idx[1]]) / math.sqrt(10.0)


@dataclass(frozen=True)
class SimulationSpec:
    """Configuration of an ICI Monte Carlo run.

    ``fd_ts`` is the Doppler shift normalised to the useful symbol duration.
    """

    n_subcarriers: int = 64
    fd_ts: float = 0.05
    trials: int = 10_000
    seed: int = 0
    oscillators: int = 64
    constellation: str = "qpsk"
    fading: str = "sos"

    def __post_init__(self):
        n = self.n_subcarriers
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_subcarriers must be a power of two >= 2, got {n}")
        if not 0 <= self.fd_ts <= 1:
            raise ValueError(f"fd_ts must lie in [0, 1], got {self.fd_ts}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed <= _MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.oscillators < 8:
            raise ValueError(f"oscillators must be >= 8, got {self.oscillators}")
        if self.constellation not in CONSTELLATIONS:
            raise ValueError(f"constellation must be one of {CONSTELLATIONS}")
        if self.fading not in FADING_METHODS:
            raise ValueError(f"fading must be one of {FADING_METHODS}")


@dataclass(frozen=True)
class SimulationResult:
    empirical_ici_norm: float
    analytic_ici_norm: float
    standard_error: float
    trials_run: int

    @property
    def error_db(self) -> float:
        """Empirical over analytic in dB (0 when both vanish)."""
        if self.empirical_ici_norm == 0 and self.analytic_ici_norm == 0:
            return 0.0
        if self.empirical_ici_norm == 0 or self.analytic_ici_norm == 0:
            return math.inf
        return 10.0 * math.log10(self.empirical_ici_norm / self.analytic_ici_norm)

    def agrees(self, tol_db: float = 0.1) -> bool:
        """|empirical - analytic| <= max(3 standard errors, tol_db worth of analytic)."""
        slack = self.analytic_ici_norm * (10.0 ** (tol_db / 10.0) - 1.0)
        diff = abs(self.empirical_ici_norm - self.analytic_ici_norm)
        return diff <= max(3.0 * self.standard_error, slack)

    def to_dict(self) -> dict:
        return asdict(self)


def _ici_trials(spec: SimulationSpec, start: int, stop: int, factor) -> np.ndarray:
    n = spec.n_subcarriers
    fd_tsamp = spec.fd_ts / n
    draw = qpsk if spec.constellation == "qpsk" else _qam16
    count = stop - start
    x_freq = np.empty((count, n), dtype=complex)
    h = np.empty((count, n), dtype=complex)
    for row, i in enumerate(range(start, stop)):
        rng = trial_rng(spec.seed, i)
        x_freq[row] = draw(rng, n)
        if factor is None:
            h[row] = _sos_fading(n, fd_tsamp, spec.oscillators, rng)
        else:
            h[row] = _exact_fading(factor, rng)
    x_time = np.fft.ifft(x_freq, axis=1, norm="ortho")
    # Y - mean(h) X == DFT((h - mean(h)) x) by linearity. Centring on h[0]
    # first makes a frozen channel give exactly zero.
    dh = h - h[:, :1]
    residual = dh - dh.mean(axis=1, keepdims=True)
    ici = np.fft.fft(residual * x_time, axis=1, norm="ortho")
    return np.mean(np.abs(ici) ** 2, axis=1)


def ici_trial_values(spec: SimulationSpec, workers: int = 1) -> np.ndarray:
    """Per-trial ICI power (mean over subcarriers), indexed by trial."""
    factor = None
    if spec.fading == "exact":
        factor = _exact_factor(spec.n_subcarriers, spec.fd_ts / spec.n_subcarriers)
    bounds = [
        (s, min(s + _CHUNK, spec.trials)) for s in range(0, spec.trials, _CHUNK)
    ]
    out = np.empty(spec.trials)
    if workers <= 1:
        for s, e in bounds:
            out[s:e] = _ici_trials(spec, s, e, factor)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(
                lambda b: _ici_trials(spec, b[0], b[1], factor), bounds
            )
            for (s, e), values in zip(bounds, chunks):
                out[s:e] = values
    return out


def simulate_ici(spec: SimulationSpec, workers: int = 1) -> SimulationResult:
    """Estimate the per-subcarrier ICI power of one OFDM symbol.

    Each trial draws unit-power symbols on every subcarrier, applies a
    unitary inverse DFT, multiplies by a fading realisation sampled at
    ``fd_ts / n_subcarriers``, and transforms back. The wanted part of
    subcarrier ``k`` is ``mean(h) * X_k``; everything else counts as ICI.
    No noise is added.
    """
    values = ici_trial_values(spec, workers)
    if spec.trials > 1:
        se = float(np.std(values, ddof=1)) / math.sqrt(spec.trials)
    else:
        se = 0.0
    return SimulationResult(
        empirical_ici_norm=float(np.mean(values)),
        analytic_ici_norm=ici_power_norm(spec.fd_ts, spec.n_subcarriers),
        standard_error=se,
        trials_run=spec.trials,
    )


def simulate_cp_isi(
    n_subcarriers: int,
    cp_samples: int,
    echo_delay_samples: int,
    echo_gain: float,
    trials: int,
    seed: int,
) -> float:
    """QPSK symbol error rate through a noiseless two-path channel.

    ``trials`` OFDM symbols, each with a ``cp_samples`` prefix, are sent
    back to back through ``h = delta(0) + echo_gain * delta(echo_delay)``.
    The receiver drops the prefix, applies the DFT and equalises with the
    true channel response. An echo that fits inside the prefix gives zero
    errors as long as the channel has no spectral null (``echo_gain < 1``).
    """
    n = n_subcarriers
    if n < 2 or n & (n - 1):
        raise ValueError("n_subcarriers must be a power of two >= 2")
    if not 0 <= cp_samples < n:
        raise ValueError("cp_samples must lie in [0, n_subcarriers)")
    if not 0 <= echo_delay_samples < n:
        raise ValueError("echo_delay_samples must lie in [0, n_subcarriers)")
    if not 0 <= echo_gain <= 1:
        raise ValueError("echo_gain must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    rng = np.random.default_rng(seed)
    tx = qpsk(rng, (trials, n))
    body = np.fft.ifft(tx, axis=1, norm="ortho")
    framed = np.concatenate([body[:, n - cp_samples :], body], axis=1)
    stream = framed.ravel()

    d = echo_delay_samples
    received = stream.copy()
    received[d:] += echo_gain * stream[: stream.size - d]

    rx_body = received.reshape(trials, n + cp_samples)[:, cp_samples:]
    y = np.fft.fft(rx_body, axis=1, norm="ortho")
    response = 1.0 + echo_gain * np.exp(-2j * math.pi * np.arange(n) * d / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        eq = y / response
    decided = (np.sign(eq.real) + 1j * np.sign(eq.imag)) / math.sqrt(2.0)
    errors = np.count_nonzero(np.abs(decided - tx) > 1e-9)
    return errors / tx.size
