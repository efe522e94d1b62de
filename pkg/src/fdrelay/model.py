"""Physical-layer model of a power-splitting full-duplex amplify-and-forward relay.

Two layers live here:

* array kernels (``gain_bound``, ``esinr_general``, ``esinr_max_power`` ...) that
  take link SNRs and power gains as floats or numpy arrays and broadcast, used
  by the optimizers and the Monte Carlo estimator;
* the typed scalar API (``link_snrs``, ``max_power_gain``, ``relay_tx_power``,
  ``harvested_energy``, ``esinr``) working on :class:`SystemParams` and
  :class:`ChannelRealization`.

Everything is expressed with power gains ``|h|^2, |g|^2, |f|^2``; complex
amplitudes only appear in :mod:`fdrelay.oracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

__all__ = [
    "OscillationError",
    "SystemParams",
    "ChannelRealization",
    "PartialCsi",
    "LinkSnrs",
    "RelayDecision",
    "SinrBreakdown",
    "link_snrs",
    "max_power_gain",
    "relay_tx_power",
    "harvested_energy",
    "esinr",
    "gain_bound",
    "is_feasible",
    "esinr_general",
    "esinr_max_power",
    "db2lin",
    "lin2db",
]


class OscillationError(ValueError):
    """Raised when a relay decision violates ``beta * (1 - rho) * |f|^2 < 1``."""


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0) if np.ndim(x) else 10.0 ** (float(x) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class SystemParams:
    """Static scenario constants.

    ``sinr_threshold`` defaults to ``2**rate - 1``; pass it explicitly to
    decouple it from the rate.
    """

    source_power: float = 1.0
    noise_power: float = 1.0
    d1: float = 1.0
    d2: float = 1.0
    path_loss_exp: float = 3.0
    eh_efficiency: float = 0.4
    rate: float = 3.0
    sinr_threshold: float | None = None
    mean_h2: float = 1.0
    mean_g2: float = 1.0
    mean_f2: float = 1.0
    block_duration: float = 1.0

    def __post_init__(self):
        if self.sinr_threshold is None:
            object.__setattr__(self, "sinr_threshold", 2.0**self.rate - 1.0)
        checks = {
            "source_power > 0": self.source_power > 0,
            "noise_power > 0": self.noise_power > 0,
            "d1 > 0": self.d1 > 0,
            "d2 > 0": self.d2 > 0,
            "0 < eh_efficiency < 1": 0 < self.eh_efficiency < 1,
            "path_loss_exp >= 2": self.path_loss_exp >= 2,
            "sinr_threshold >= 0": self.sinr_threshold >= 0,
            "mean_h2 > 0": self.mean_h2 > 0,
            "mean_g2 > 0": self.mean_g2 > 0,
            "mean_f2 > 0": self.mean_f2 > 0,
            "block_duration > 0": self.block_duration > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValueError(f"invalid SystemParams: requires {name}")
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"invalid SystemParams: {f.name} must be finite")

    @classmethod
    def from_db(cls, snr_db: float, inr_db: float, source_power: float = 1.0, **kwargs) -> "SystemParams":
        """Build parameters from transmit SNR ``P_s / sigma^2`` and loop INR ``lambda_f / sigma^2``.

        The source power is held fixed (1 W by default) and the noise power is
        derived from the SNR, so the loop-channel mean scales as
        ``lambda_f = INR * sigma^2``.
        """
        noise = source_power / db2lin(snr_db)
        return cls(source_power=source_power, noise_power=noise, mean_f2=db2lin(inr_db) * noise, **kwargs)

    @property
    def snr(self) -> float:
        return self.source_power / self.noise_power

    @property
    def inr(self) -> float:
        return self.mean_f2 / self.noise_power

    @property
    def loss1(self) -> float:
        return self.d1**self.path_loss_exp

    @property
    def loss2(self) -> float:
        return self.d2**self.path_loss_exp

    def replace(self, **changes) -> "SystemParams":
        if "rate" in changes and "sinr_threshold" not in changes:
            changes["sinr_threshold"] = None
        return replace(self, **changes)


@dataclass(frozen=True)
class PartialCsi:
    """First-hop and loop-channel power gains, the only CSI the partial scheme sees."""

    h2: float
    f2: float

    def __post_init__(self):
        if self.h2 < 0 or self.f2 < 0:
            raise ValueError("power gains must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    h2: float
    g2: float
    f2: float

    def __post_init__(self):
        if min(self.h2, self.g2, self.f2) < 0:
            raise ValueError("power gains must be non-negative")

    def partial(self) -> PartialCsi:
        return PartialCsi(self.h2, self.f2)


@dataclass(frozen=True)
class LinkSnrs:
    gamma_sr: float
    gamma_rd: float


@dataclass(frozen=True)
class RelayDecision:
    """A ``(rho, beta)`` relay control pair.

    ``certain_outage`` marks blocks the scheme gave up on (for example the
    partial-CSI branch that parks ``rho = 1``); those are still counted in
    outage statistics. ``stationary`` is set when ``rho`` is a root of the
    scheme's stationarity quartic rather than an interval endpoint.
    """

    rho: float
    beta: float
    feasible: bool
    certain_outage: bool = False
    stationary: bool = False
    region: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SinrBreakdown:
    desired_power: float
    loop_power: float
    noise_power_out: float
    esinr: float

    @property
    def total_power(self) -> float:
        return self.desired_power + self.loop_power + self.noise_power_out


# ---------------------------------------------------------------------------
# array kernels


def gain_bound(gamma_sr, f2, eta, rho):
    """Relay gain at maximum harvested power; NaN where the relay cannot sustain it.

    The bound is ``eta*rho*g_sr / ((1-rho)*g_sr - eta*rho*|f|^2 + 1)``. It is
    only meaningful while ``1 - eta*rho*|f|^2 > 0``: past that point the power
    inequality flips direction and the bound itself violates the
    non-oscillation condition.
    """
    gamma_sr, f2, rho = np.broadcast_arrays(*map(np.asarray, (gamma_sr, f2, rho)))
    den = (1.0 - rho) * gamma_sr - eta * rho * f2 + 1.0
    ok = is_feasible(gamma_sr, f2, eta, rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = eta * rho * gamma_sr / den
    return np.where(ok, beta, np.nan)


def is_feasible(gamma_sr, f2, eta, rho):
    """Mask of ``rho`` values for which the max-power gain exists and is non-oscillatory."""
    gamma_sr, f2, rho = map(np.asarray, (gamma_sr, f2, rho))
    eps = 1.0 - eta * rho * f2
    den = (1.0 - rho) * gamma_sr - eta * rho * f2 + 1.0
    return (eps > 0) & (den > 0) & (rho >= 0) & (rho <= 1)


def esinr_general(gamma_sr, gamma_rd, f2, rho, beta):
    """End-to-end SINR for an arbitrary gain ``beta`` (requires ``beta*(1-rho)*|f|^2 < 1``)."""
    gamma_sr, gamma_rd, f2, rho, beta = map(np.asarray, (gamma_sr, gamma_rd, f2, rho, beta))
    x = (1.0 - rho) * beta * f2
    num = (1.0 - rho) * beta * gamma_rd
    den = gamma_sr + beta * gamma_rd + ((1.0 - rho) * gamma_sr + 1.0) * beta * gamma_rd * x / (1.0 - x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num * gamma_sr / den
    return np.where(beta > 0, out, 0.0)


def esinr_max_power(gamma_sr, gamma_rd, f2, eta, rho):
    """End-to-end SINR with the relay gain pinned at its maximum-power value.

    Closed form in ``rho`` with ``eps = 1 - eta*rho*|f|^2``. Returns 0 where
    the decision is infeasible, so callers can threshold it directly.
    """
    gamma_sr, gamma_rd, f2, rho = map(np.asarray, (gamma_sr, gamma_rd, f2, rho))
    eps = 1.0 - eta * rho * f2
    num = eps * eta * rho * (1.0 - rho) * gamma_sr * gamma_rd
    den = (1.0 - rho) * (eps + eta**2 * rho**2 * gamma_rd * f2) * gamma_sr + eps * (eps + eta * rho * gamma_rd)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(is_feasible(gamma_sr, f2, eta, rho), out, 0.0)


# ---------------------------------------------------------------------------
# typed scalar API


def link_snrs(params: SystemParams, ch: ChannelRealization) -> LinkSnrs:
    gamma_sr = params.source_power * ch.h2 / (params.loss1 * params.noise_power)
    gamma_rd = params.source_power * ch.h2 * ch.g2 / (params.loss1 * params.loss2 * params.noise_power)
    return LinkSnrs(gamma_sr, gamma_rd)


def _gamma_sr(params: SystemParams, h2: float) -> float:
    return params.source_power * h2 / (params.loss1 * params.noise_power)


def max_power_gain(params: SystemParams, ch: ChannelRealization | PartialCsi, rho: float) -> float | None:
    """Largest relay gain the harvested power supports, or ``None`` if no finite one exists."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    beta = float(gain_bound(_gamma_sr(params, ch.h2), ch.f2, params.eh_efficiency, rho))
    return None if math.isnan(beta) else beta


def _check_oscillation(ch, decision: RelayDecision) -> float:
    x = (1.0 - decision.rho) * decision.beta * ch.f2
    if not decision.feasible or x >= 1.0:
        raise OscillationError(
            f"oscillatory relay: beta*(1-rho)*|f|^2 = {x:.6g} (must be < 1)"
        )
    return x


def relay_tx_power(params: SystemParams, ch: ChannelRealization, decision: RelayDecision) -> float:
    """Relay transmit power ``E|x_r|^2`` summed over all loop echoes (watts)."""
    x = _check_oscillation(ch, decision)
    rx = (1.0 - decision.rho) * params.source_power * ch.h2 / params.loss1 + params.noise_power
    return decision.beta * rx / (1.0 - x)


def harvested_energy(params: SystemParams, ch, rho: float, relay_power: float) -> float:
    """Energy harvested in one block (joules); divide by ``block_duration`` for ``P_max``."""
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    incident = params.source_power * ch.h2 / params.loss1 + ch.f2 * relay_power
    return params.eh_efficiency * rho * incident * params.block_duration


def esinr(params: SystemParams, ch: ChannelRealization, decision: RelayDecision) -> SinrBreakdown:
    """Destination power decomposition and the resulting end-to-end SINR."""
    x = _check_oscillation(ch, decision)
    rho, beta = decision.rho, decision.beta
    sigma2 = params.noise_power
    rx_signal = (1.0 - rho) * params.source_power * ch.h2 / params.loss1
    hop2 = beta * ch.g2 / params.loss2
    desired = rx_signal * hop2
    loop = (rx_signal + sigma2) * hop2 * x / (1.0 - x)
    noise = (hop2 + 1.0) * sigma2
    return SinrBreakdown(desired, loop, noise, desired / (loop + noise))
