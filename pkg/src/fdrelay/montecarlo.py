"""Rayleigh-fading Monte Carlo outage estimation.

Trials are generated in fixed-size chunks. Chunk ``k`` of stream ``s`` under
seed ``seed`` always draws from ``SeedSequence(seed, spawn_key=(s, k))``, so
an estimate depends only on ``(seed, stream_id, trials, chunk_size)`` and not
on how chunks are spread over workers.

Channel power gains are unit exponentials scaled by their means. Because the
unit draws do not depend on the scenario, every sweep point and every scheme
evaluated with the same :class:`RngSpec` sees the same underlying fading
(common random numbers), which keeps curve comparisons low-noise.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .model import ChannelRealization, SystemParams, esinr_max_power, is_feasible
from .optimizer import DecisionBatch, fixed_batch, full_csi_batch, outage_coefficients, partial_csi_batch

__all__ = [
    "RngSpec",
    "OutageEstimate",
    "Scheme",
    "draw_channel",
    "draw_gains",
    "outage_mc",
    "outage_mc_schemes",
    "conditional_outage_analytic",
    "conditional_outage_mc",
]

CHUNK_SIZE = 1 << 16
MIN_TRIALS = 10_000


@dataclass(frozen=True)
class RngSpec:
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self, chunk: int = 0) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, chunk)))


@dataclass(frozen=True)
class OutageEstimate:
    """Outage fraction with a normal-approximation 95% half-width.

    ``ci_exact`` holds the Clopper-Pearson interval when it was requested.
    """

    p_out: float
    trials: int
    half_width_95: float
    outages: int
    ci_exact: tuple[float, float] | None = None

    @classmethod
    def from_counts(cls, outages: int, trials: int, exact: bool = False) -> "OutageEstimate":
        p = outages / trials
        hw = 1.96 * math.sqrt(p * (1.0 - p) / trials)
        ci = None
        if exact:
            from scipy.stats import binomtest

            lo, hi = binomtest(outages, trials).proportion_ci(0.95, method="exact")
            ci = (float(lo), float(hi))
        return cls(p, trials, hw, outages, ci)


_FIXED = re.compile(r"fixed_(\d*\.?\d+)$")


@dataclass(frozen=True)
class Scheme:
    """One of ``full_csi``, ``partial_csi`` or ``fixed`` with its ratio."""

    kind: str
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in ("full_csi", "partial_csi", "fixed"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "fixed" and not (self.rho is not None and 0 < self.rho < 1):
            raise ValueError("fixed scheme needs 0 < rho < 1")

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        name = name.strip()
        if name in ("full_csi", "partial_csi"):
            return cls(name)
        m = _FIXED.match(name)
        if not m:
            raise ValueError(f"unknown scheme {name!r} (expected full_csi, partial_csi or fixed_<rho>)")
        return cls("fixed", float(m.group(1)))

    @property
    def name(self) -> str:
        return f"fixed_{self.rho:g}" if self.kind == "fixed" else self.kind

    def decide(self, params: SystemParams, gamma_sr, gamma_rd, f2) -> DecisionBatch:
        eta = params.eh_efficiency
        if self.kind == "full_csi":
            return full_csi_batch(gamma_sr, gamma_rd, f2, eta)
        if self.kind == "partial_csi":
            return partial_csi_batch(gamma_sr, f2, eta, params.sinr_threshold)
        return fixed_batch(gamma_sr, f2, eta, self.rho)


def draw_gains(params: SystemParams, rng: np.random.Generator, size: int):
    """``(h2, g2, f2)`` arrays of independent exponential power gains."""
    e = rng.standard_exponential((3, size))
    return params.mean_h2 * e[0], params.mean_g2 * e[1], params.mean_f2 * e[2]


def draw_channel(params: SystemParams, rng: np.random.Generator) -> ChannelRealization:
    h2, g2, f2 = draw_gains(params, rng, 1)
    return ChannelRealization(float(h2[0]), float(g2[0]), float(f2[0]))


def _chunk_outages(params: SystemParams, schemes: tuple[Scheme, ...], rng: RngSpec, chunk_size: int, job):
    chunk, size = job
    h2, g2, f2 = draw_gains(params, rng.generator(chunk), size)
    gsr = params.source_power * h2 / (params.loss1 * params.noise_power)
    grd = gsr * g2 / params.loss2
    counts = []
    for scheme in schemes:
        dec = scheme.decide(params, gsr, grd, f2)
        gam = esinr_max_power(gsr, grd, f2, params.eh_efficiency, dec.rho)
        ok = dec.feasible & ~dec.certain_outage & (gam >= params.sinr_threshold)
        counts.append(int(size - np.count_nonzero(ok)))
    return counts


def outage_mc_schemes(
    params: SystemParams,
    schemes,
    trials: int = 1_000_000,
    rng: RngSpec = RngSpec(),
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
    exact_ci: bool = False,
) -> dict[str, OutageEstimate]:
    """Outage estimates for several schemes on one shared set of fading draws."""
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}")
    schemes = tuple(Scheme.parse(s) if isinstance(s, str) else s for s in schemes)
    jobs = [(k, min(chunk_size, trials - k * chunk_size)) for k in range(-(-trials // chunk_size))]
    work = partial(_chunk_outages, params, schemes, rng, chunk_size)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    totals = np.sum(np.array(results, dtype=np.int64), axis=0)
    return {s.name: OutageEstimate.from_counts(int(t), trials, exact_ci) for s, t in zip(schemes, totals)}


def outage_mc(
    params: SystemParams,
    scheme: Scheme | str,
    trials: int = 1_000_000,
    rng: RngSpec = RngSpec(),
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
    exact_ci: bool = False,
) -> OutageEstimate:
    """Fraction of fading blocks in outage under ``scheme``.

    A block is in outage when the scheme's decision is infeasible, when it
    declares certain outage, or when its end-to-end SINR is below the
    threshold.
    """
    (est,) = outage_mc_schemes(params, [scheme], trials, rng, workers, chunk_size, exact_ci).values()
    return est


# ---------------------------------------------------------------------------
# conditional outage given (h2, f2)


def conditional_outage_analytic(params: SystemParams, h2, f2, rho):
    """Outage probability over ``|g|^2`` with ``(h2, f2, rho)`` held fixed and ``beta`` at its bound.

    Equals ``1 - exp(-G1 / (G2 * mean_g2))`` with ``G1 = a h2 + b`` and
    ``G2 = c h2^2 + d h2``. Returns 1 when the block cannot avoid outage:
    ``h2 = 0``, the decision is infeasible, or ``G2 <= 0``.
    """
    h2, f2, rho = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (h2, f2, rho)))
    if np.any((rho <= 0) | (rho >= 1)):
        raise ValueError("rho must lie in (0, 1)")
    a, b, c, d = outage_coefficients(params, h2, f2, rho)
    g1 = a * h2 + b
    g2 = c * h2 * h2 + d * h2
    gsr = params.source_power * h2 / (params.loss1 * params.noise_power)
    live = (h2 > 0) & is_feasible(gsr, f2, params.eh_efficiency, rho) & (g2 > 0) & (g1 >= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = -np.expm1(-g1 / (np.where(live, g2, 1.0) * params.mean_g2))
    out = np.where(live, p, 1.0)
    return float(out) if out.ndim == 0 else out


def conditional_outage_mc(
    params: SystemParams, h2: float, f2: float, rho: float, draws: int, rng: np.random.Generator
) -> OutageEstimate:
    """Monte Carlo over ``|g|^2`` only, the reference for :func:`conditional_outage_analytic`."""
    gsr = params.source_power * h2 / (params.loss1 * params.noise_power)
    g2 = params.mean_g2 * rng.standard_exponential(draws)
    grd = gsr * g2 / params.loss2
    gam = esinr_max_power(gsr, grd, f2, params.eh_efficiency, rho)
    ok = is_feasible(gsr, f2, params.eh_efficiency, rho) & (gam >= params.sinr_threshold)
    return OutageEstimate.from_counts(int(draws - np.count_nonzero(ok)), draws)
