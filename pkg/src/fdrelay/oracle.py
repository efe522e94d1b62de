"""Symbol-level simulation of the full-duplex relay loop.

The relay input is ``y_r(k) = sqrt((1-rho) Ps / d1^m) h s(k) + sqrt(1-rho) f x_r(k) + n_r(k)``
and the relay forwards ``x_r(k) = sqrt(beta) y_r(k - tau)``. Writing
``u(k) = sqrt((1-rho) Ps / d1^m) h s(k) + n_r(k)`` this is the recursion

    x_r(k) = sqrt(beta) u(k - tau) + sqrt(beta (1-rho)) f x_r(k - tau)

which is run as an IIR filter (``mode="feedback"``) or, for convergence
checks, as the explicit echo sum truncated at ``J`` terms (``mode="series"``).
The destination sees ``y_d(k) = g x_r(k) / sqrt(d2^m) + n_d(k)``; its samples
are split into the first-pass source term, the noise terms
(destination noise plus first-pass relay noise) and everything else (loop
echoes), and the empirical power of each part is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .model import ChannelRealization, OscillationError, RelayDecision, SinrBreakdown, SystemParams

__all__ = ["SymbolStreamConfig", "StreamStats", "simulate", "simulate_powers", "tail_truncation"]

TAIL_BOUND = 1e-12


def tail_truncation(loop_gain: float, bound: float = TAIL_BOUND) -> int:
    """Smallest ``J`` with ``loop_gain**J <= bound``."""
    if not 0 <= loop_gain < 1:
        raise OscillationError(f"loop gain {loop_gain:.6g} must be < 1")
    if loop_gain == 0:
        return 1
    return max(1, math.ceil(math.log(bound) / math.log(loop_gain)))


@dataclass(frozen=True)
class SymbolStreamConfig:
    """Stream length, relay delay and complex channel amplitudes for one simulation.

    ``recursion_truncation`` is the number of loop echoes ``J``; ``None`` picks
    the smallest ``J`` meeting the tail bound for the decision being simulated.
    """

    num_symbols: int
    h: complex
    g: complex
    f: complex
    processing_delay: int = 1
    recursion_truncation: int | None = None
    mode: str = "feedback"
    seed: int = 0

    def __post_init__(self):
        if self.processing_delay < 1:
            raise ValueError("processing_delay must be >= 1")
        if self.num_symbols < 1:
            raise ValueError("num_symbols must be >= 1")
        if self.mode not in ("feedback", "series"):
            raise ValueError("mode must be 'feedback' or 'series'")
        if self.recursion_truncation is not None and self.recursion_truncation < 1:
            raise ValueError("recursion_truncation must be >= 1")

    @classmethod
    def from_realization(cls, ch: ChannelRealization, num_symbols: int, rng: np.random.Generator, **kwargs):
        """Complex amplitudes with the realization's magnitudes and uniform random phases."""
        ph = np.exp(2j * np.pi * rng.random(3))
        amps = np.sqrt([ch.h2, ch.g2, ch.f2]) * ph
        return cls(num_symbols, complex(amps[0]), complex(amps[1]), complex(amps[2]), **kwargs)

    @property
    def realization(self) -> ChannelRealization:
        return ChannelRealization(abs(self.h) ** 2, abs(self.g) ** 2, abs(self.f) ** 2)


@dataclass(frozen=True)
class StreamStats:
    breakdown: SinrBreakdown
    relay_power: float
    received_power: float
    truncation: int


def _cgauss(rng: np.random.Generator, var: float, n: int) -> np.ndarray:
    return np.sqrt(var / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _qpsk(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, n)))


def _relay_output(u: np.ndarray, sqrt_beta: float, c: complex, tau: int, J: int, mode: str) -> np.ndarray:
    if mode == "feedback":
        a = np.zeros(tau + 1, dtype=complex)
        a[0], a[tau] = 1.0, -c
        b = np.zeros(tau + 1)
        b[tau] = sqrt_beta
        return lfilter(b, a, u)
    taps = np.zeros(J * tau + 1, dtype=complex)
    taps[tau::tau] = sqrt_beta * c ** np.arange(J)
    return lfilter(taps, [1.0], u)


def simulate(cfg: SymbolStreamConfig, params: SystemParams, decision: RelayDecision) -> StreamStats:
    """Run the relay loop and measure empirical destination power components."""
    rho, beta = decision.rho, decision.beta
    if beta < 0 or not 0 <= rho <= 1:
        raise ValueError("decision needs beta >= 0 and 0 <= rho <= 1")
    c = math.sqrt(beta * (1.0 - rho)) * cfg.f
    x = abs(c) ** 2
    if x >= 1.0:
        raise OscillationError(f"oscillatory relay: beta*(1-rho)*|f|^2 = {x:.6g} (must be < 1)")
    J = cfg.recursion_truncation or tail_truncation(x)
    if x > 0 and x**J > TAIL_BOUND and cfg.mode == "feedback":
        raise ValueError(f"recursion_truncation {J} leaves tail {x**J:.3g} above {TAIL_BOUND:g}")

    tau = cfg.processing_delay
    warm = J * tau
    n = cfg.num_symbols + warm
    # the kept window and the warm-up come from separate substreams, so the
    # measured samples see the same inputs whatever the truncation
    keep_rng, warm_rng = (np.random.default_rng(ss) for ss in np.random.SeedSequence(cfg.seed).spawn(2))

    def draw(gen, m):
        return _qpsk(gen, m), _cgauss(gen, params.noise_power, m), _cgauss(gen, params.noise_power, m)

    s, n_r, n_d = (np.concatenate(pair) for pair in zip(draw(warm_rng, warm), draw(keep_rng, cfg.num_symbols)))

    src = math.sqrt((1.0 - rho) * params.source_power / params.loss1) * cfg.h * s
    u = src + n_r
    sb = math.sqrt(beta)
    x_r = _relay_output(u, sb, c, tau, J, cfg.mode)

    hop = cfg.g / math.sqrt(params.loss2)
    first_src = np.zeros(n, dtype=complex)
    first_noise = np.zeros(n, dtype=complex)
    first_src[tau:] = sb * src[:-tau]
    first_noise[tau:] = sb * n_r[:-tau]
    desired = hop * first_src
    noise = hop * first_noise + n_d
    loop = hop * (x_r - first_src - first_noise)
    y_d = hop * x_r + n_d

    keep = slice(warm, None)

    def power(z):
        return float(np.mean(np.abs(z[keep]) ** 2))

    pd, pl, pn = power(desired), power(loop), power(noise)
    esinr = pd / (pl + pn) if pl + pn > 0 else math.inf
    return StreamStats(SinrBreakdown(pd, pl, pn, esinr), power(x_r), power(y_d), J)


def simulate_powers(cfg: SymbolStreamConfig, params: SystemParams, decision: RelayDecision) -> SinrBreakdown:
    return simulate(cfg, params, decision).breakdown
