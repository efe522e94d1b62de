"""Power-splitting ratio selection: full CSI, partial CSI, fixed ratio, and exhaustive search.

Each scheme has a vectorized ``*_batch`` kernel working on arrays of link SNRs
(used by the Monte Carlo estimator) and a scalar front end returning a
:class:`~fdrelay.model.RelayDecision`.

Stationary points are not trusted blindly: every scheme evaluates its
objective at all real stationarity roots inside the admissible interval and at
both (clamped) interval endpoints, and keeps the best one, smallest ``rho`` on
ties.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import (
    ChannelRealization,
    PartialCsi,
    RelayDecision,
    SystemParams,
    esinr_general,
    esinr_max_power,
    gain_bound,
    is_feasible,
    link_snrs,
)
from .quartic import QuarticCoeffs, real_roots_batch

log = logging.getLogger(__name__)

__all__ = [
    "DecisionBatch",
    "Q1Problem",
    "Q2Problem",
    "PartialCsiRegions",
    "q1_coefficients",
    "q2_coefficients",
    "rho1",
    "g_tilde_normalized",
    "g_tilde",
    "full_csi_batch",
    "partial_csi_batch",
    "fixed_batch",
    "full_csi_rho",
    "partial_csi_rho",
    "fixed_rho",
    "joint_exhaustive",
    "classify_partial_csi",
    "q1_ordinal_agreement",
]

ENDPOINT_OFFSET = 1e-9
REGION_NAMES = ("none", "C1", "C2", "C3")


# ---------------------------------------------------------------------------
# stationarity quartics


def q1_coefficients(gamma_sr, gamma_rd, f2, eta) -> np.ndarray:
    """Descending coefficients ``[a4, a3, a2, a1, a0]`` of the full-CSI stationarity quartic."""
    s, d, f = (np.asarray(v, dtype=float) for v in (gamma_sr, gamma_rd, f2))
    a0 = 1.0 + s
    a1 = -2.0 * (1.0 + eta * f) * (1.0 + s)
    a2 = s - eta * d + eta**2 * f**2 * (1.0 + s) + eta * f * (5.0 + s * (4.0 - eta * d))
    a3 = -2.0 * eta * f * (s + eta * f * (2.0 + s) - eta * (1.0 + s) * d)
    a4 = eta**2 * f * (eta * f + s) * (f - d)
    return np.stack(np.broadcast_arrays(a4, a3, a2, a1, a0), axis=-1)


def q2_coefficients(gamma_sr, gamma0, f2, eta) -> np.ndarray:
    """Descending coefficients ``[c4, c3, c2, c1, c0]`` of the partial-CSI stationarity quartic.

    ``c2`` is the derivative-consistent form
    ``g_sr*(1 + eta*f*(1+g0)*(4 + eta*f)) - eta^2*g0*f^2``.
    """
    s, f = (np.asarray(v, dtype=float) for v in (gamma_sr, f2))
    g0 = float(gamma0)
    c0 = s - g0
    c1 = 2.0 * eta * g0 * f - 2.0 * s * (1.0 + eta * f * (1.0 + g0))
    c2 = s * (1.0 + eta * f * (1.0 + g0) * (4.0 + eta * f)) - eta**2 * g0 * f**2
    c3 = -2.0 * eta * s * f * (1.0 + eta * f) * (1.0 + g0)
    c4 = eta**2 * s * f**2 * (1.0 + g0)
    return np.stack(np.broadcast_arrays(c4, c3, c2, c1, c0), axis=-1)


@dataclass(frozen=True)
class Q1Problem:
    gamma_sr: float
    gamma_rd: float
    f2: float
    eta: float

    @property
    def coeffs(self) -> QuarticCoeffs:
        return QuarticCoeffs(*map(float, q1_coefficients(self.gamma_sr, self.gamma_rd, self.f2, self.eta)))

    @property
    def ascending(self) -> tuple[float, ...]:
        """``(a0, a1, a2, a3, a4)``."""
        return tuple(map(float, q1_coefficients(self.gamma_sr, self.gamma_rd, self.f2, self.eta)[::-1]))


@dataclass(frozen=True)
class Q2Problem:
    gamma_sr: float
    gamma_0: float
    f2: float
    eta: float

    @property
    def coeffs(self) -> QuarticCoeffs:
        return QuarticCoeffs(*map(float, q2_coefficients(self.gamma_sr, self.gamma_0, self.f2, self.eta)))

    @property
    def ascending(self) -> tuple[float, ...]:
        """``(c0, c1, c2, c3, c4)``."""
        return tuple(map(float, q2_coefficients(self.gamma_sr, self.gamma_0, self.f2, self.eta)[::-1]))


# ---------------------------------------------------------------------------
# partial-CSI objective and regions


def rho1(gamma_sr, gamma0, f2, eta):
    """Smallest ``rho`` at which ``|h|^2`` meets the first-row threshold ``H1(rho)``.

    Smaller root of ``A rho^2 - B rho + C`` written without cancellation, so it
    stays accurate as ``|f|^2 -> 0`` (where it tends to ``1 - g0/g_sr``).
    """
    s, f = (np.asarray(v, dtype=float) for v in (gamma_sr, f2))
    a = s * eta * f * (1.0 + gamma0)
    b = s * (1.0 + eta * f * (1.0 + gamma0)) - gamma0 * eta * f
    c = s - gamma0
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 2.0 * c / (b + np.sqrt(disc))


def g_tilde_normalized(gamma_sr, gamma0, f2, eta, rho):
    """High-SINR partial-CSI objective scaled by ``d2^m`` and written in terms of ``g_sr``."""
    s, f, r = (np.asarray(v, dtype=float) for v in (gamma_sr, f2, rho))
    eps = 1.0 - eta * r * f
    num = eta * r * ((1.0 - r) * (1.0 - eta * r * (1.0 + gamma0) * f) * s - gamma0 * eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / (gamma0 * (1.0 - r) * eps)


def outage_coefficients(params: SystemParams, h2, f2, rho):
    """``(a, b, c, d)`` with ``G1 = a|h|^2 + b`` and ``G2 = c|h|^4 + d|h|^2``."""
    p = params
    ps, s2, g0, eta = p.source_power, p.noise_power, p.sinr_threshold, p.eh_efficiency
    l1, l2 = p.loss1, p.loss2
    f2, rho = np.asarray(f2, dtype=float), np.asarray(rho, dtype=float)
    eps = 1.0 - eta * rho * f2
    a = ps * l1 * l2 * s2 * g0 * (1.0 - rho) * eps
    b = l1**2 * l2 * s2**2 * g0 * eps**2
    c = eta * rho * ps**2 * (1.0 - rho) * (1.0 - eta * rho * (1.0 + g0) * f2)
    d = ps * l1 * s2 * eta * rho * g0 * (eta * rho * f2 - 1.0)
    return a, b, c, d


def g_tilde(params: SystemParams, h2, f2, rho):
    """``(c|h|^2 + d) / a``."""
    a, _, c, d = outage_coefficients(params, h2, f2, rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (c * np.asarray(h2) + d) / a


@dataclass(frozen=True)
class PartialCsiRegions:
    rho1: float
    F1: float
    F2: float
    H1: float
    H2: float
    satisfied: tuple[str, ...]
    active_constraint: str


def _region_bounds(gamma_sr, f2, eta, gamma0, literal_c1=False):
    """Masks and open intervals for the three CSI constraints."""
    s, f = np.asarray(gamma_sr, dtype=float), np.asarray(f2, dtype=float)
    r1 = rho1(s, gamma0, f, eta)
    c1 = s > gamma0
    if literal_c1:
        c1 = c1 & (f < 1.0 / (eta * (1.0 + gamma0)))
    c2 = (f > 1.0 / eta) & (s < gamma0)
    c3 = (f > 1.0 / eta) & (s > eta * f - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo3 = 1.0 / (eta * f)
        hi3 = (1.0 + s) / (s + eta * f)
    zeros, ones = np.zeros_like(s), np.ones_like(s)
    return [
        (c1, zeros, np.where(c1, r1, 0.0)),
        (c2, np.where(c2, np.maximum(r1, 0.0), 1.0), ones),
        (c3, np.where(c3, lo3, 1.0), np.where(c3, hi3, 1.0)),
    ]


def classify_partial_csi(params: SystemParams, csi: PartialCsi, rho: float, literal_c1=False) -> PartialCsiRegions:
    """Thresholds of the piecewise conditional outage evaluated at ``rho`` and the CSI constraints met."""
    p = params
    eta, g0 = p.eh_efficiency, p.sinr_threshold
    s = p.source_power * csi.h2 / (p.loss1 * p.noise_power)
    eps = 1.0 - eta * rho * csi.f2
    with np.errstate(divide="ignore"):
        h1 = p.loss1 * p.noise_power * g0 * eps / (
            p.source_power * (1.0 - rho) * (1.0 - eta * rho * csi.f2 * (1.0 + g0))
        )
        h2 = p.loss1 * p.noise_power * eps / (p.source_power * (rho - 1.0))
        f1 = 1.0 / (eta * rho * (1.0 + g0))
        f2 = 1.0 / (eta * rho)
    bounds = _region_bounds(s, csi.f2, eta, g0, literal_c1)
    satisfied = tuple(REGION_NAMES[i + 1] for i, (m, _, _) in enumerate(bounds) if bool(m))
    active = "none"
    for i, (m, lo, hi) in enumerate(bounds):
        if bool(m) and float(lo) < rho < float(hi):
            active = REGION_NAMES[i + 1]
            break
    return PartialCsiRegions(float(rho1(s, g0, csi.f2, eta)), f1, f2, h1, h2, satisfied, active)


# ---------------------------------------------------------------------------
# batch kernels


@dataclass
class DecisionBatch:
    rho: np.ndarray
    beta: np.ndarray
    feasible: np.ndarray
    certain_outage: np.ndarray
    stationary: np.ndarray
    region: np.ndarray

    def __len__(self):
        return self.rho.size

    def decision(self, i: int = 0) -> RelayDecision:
        return RelayDecision(
            rho=float(self.rho[i]),
            beta=float(self.beta[i]),
            feasible=bool(self.feasible[i]),
            certain_outage=bool(self.certain_outage[i]),
            stationary=bool(self.stationary[i]),
            region=REGION_NAMES[int(self.region[i])] if self.region[i] >= 0 else None,
        )


def _clamped(lo, hi):
    width = hi - lo
    off = np.minimum(ENDPOINT_OFFSET, 1e-3 * width)
    return lo + off, hi - off


def _best_candidate(roots, lo, hi, objective):
    """Maximize ``objective(rho)`` over clamped endpoints and roots strictly inside ``(lo, hi)``.

    Returns ``(rho, value, stationary)``; ``value`` is ``-inf`` where the
    interval is empty.
    """
    lo_c, hi_c = _clamped(lo, hi)
    inside = np.isfinite(roots) & (roots > lo[:, None]) & (roots < hi[:, None])
    cand = np.concatenate([lo_c[:, None], np.where(inside, roots, np.nan), hi_c[:, None]], axis=1)
    valid = np.isfinite(cand) & (hi > lo)[:, None]
    vals = np.where(valid, objective(np.where(valid, cand, 0.5)), -np.inf)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    k = np.argmax(vals, axis=1)
    rows = np.arange(cand.shape[0])
    return cand[rows, k], vals[rows, k], (k > 0) & (k < cand.shape[1] - 1)


def full_csi_batch(gamma_sr, gamma_rd, f2, eta) -> DecisionBatch:
    s, d, f = (np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(gamma_sr, gamma_rd, f2))
    n = s.size
    roots = real_roots_batch(q1_coefficients(s, d, f, eta))
    with np.errstate(divide="ignore"):
        hi = np.where(f > 0, np.minimum(1.0, 1.0 / (eta * f)), 1.0)
    lo = np.zeros(n)

    def objective(r):
        return esinr_max_power(s[:, None], d[:, None], f[:, None], eta, r)

    rho, _, stationary = _best_candidate(roots, lo, hi, objective)
    beta = gain_bound(s, f, eta, rho)
    feasible = np.isfinite(beta) & (beta > 0)
    return DecisionBatch(
        rho=rho,
        beta=np.where(feasible, beta, 0.0),
        feasible=feasible,
        certain_outage=np.zeros(n, dtype=bool),
        stationary=stationary & feasible,
        region=np.full(n, -1),
    )


def partial_csi_batch(gamma_sr, f2, eta, gamma0, literal_c1=False) -> DecisionBatch:
    """Partial-CSI ratio from ``g_sr`` and ``|f|^2`` only.

    Candidates come from every CSI constraint that holds; infeasible ones are
    discarded and the surviving candidate with the largest high-SINR objective
    wins. No feasible candidate, or a non-positive objective (conditional
    outage certain), parks the relay at ``rho = 1, beta = 0``.
    """
    s, f = (np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(gamma_sr, f2))
    n = s.size
    roots = real_roots_batch(q2_coefficients(s, gamma0, f, eta))

    def objective(r):
        val = g_tilde_normalized(s[:, None], gamma0, f[:, None], eta, r)
        return np.where(is_feasible(s[:, None], f[:, None], eta, r), val, -np.inf)

    best_rho = np.ones(n)
    best_val = np.full(n, -np.inf)
    best_stat = np.zeros(n, dtype=bool)
    region = np.zeros(n, dtype=int)
    for i, (mask, lo, hi) in enumerate(_region_bounds(s, f, eta, gamma0, literal_c1), start=1):
        if not mask.any():
            continue
        lo_m = np.where(mask, lo, 0.0)
        hi_m = np.where(mask, hi, 0.0)
        rho, val, stat = _best_candidate(roots, lo_m, hi_m, objective)
        better = mask & (val > best_val)
        best_rho = np.where(better, rho, best_rho)
        best_val = np.where(better, val, best_val)
        best_stat = np.where(better, stat, best_stat)
        region = np.where(better, i, region)

    certain = ~(best_val > 0)
    rho = np.where(certain, 1.0, best_rho)
    beta = np.where(certain, 0.0, gain_bound(s, f, eta, np.where(certain, 0.5, rho)))
    return DecisionBatch(
        rho=rho,
        beta=beta,
        feasible=np.ones(n, dtype=bool),
        certain_outage=certain,
        stationary=best_stat & ~certain,
        region=np.where(certain, 0, region),
    )


def fixed_batch(gamma_sr, f2, eta, rho) -> DecisionBatch:
    s, f = (np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(gamma_sr, f2))
    n = s.size
    r = np.full(n, float(rho))
    beta = gain_bound(s, f, eta, r)
    feasible = np.isfinite(beta)
    return DecisionBatch(
        rho=r,
        beta=np.where(feasible, beta, 0.0),
        feasible=feasible,
        certain_outage=np.zeros(n, dtype=bool),
        stationary=np.zeros(n, dtype=bool),
        region=np.full(n, -1),
    )


# ---------------------------------------------------------------------------
# scalar front ends


def full_csi_rho(params: SystemParams, ch: ChannelRealization) -> RelayDecision:
    snr = link_snrs(params, ch)
    return full_csi_batch(snr.gamma_sr, snr.gamma_rd, ch.f2, params.eh_efficiency).decision()


def partial_csi_rho(params: SystemParams, csi: PartialCsi, literal_c1: bool = False) -> RelayDecision:
    """Partial-CSI decision; only ``|h|^2`` and ``|f|^2`` are available by construction.

    ``literal_c1`` additionally requires ``|f|^2 < 1/(eta (1 + g0))`` for the
    first constraint, which is stricter than the first-row condition itself.
    """
    if not isinstance(csi, PartialCsi):
        raise TypeError("partial_csi_rho takes PartialCsi (h2, f2); use ChannelRealization.partial()")
    s = params.source_power * csi.h2 / (params.loss1 * params.noise_power)
    return partial_csi_batch(s, csi.f2, params.eh_efficiency, params.sinr_threshold, literal_c1).decision()


def fixed_rho(params: SystemParams, ch: ChannelRealization | PartialCsi, rho: float) -> RelayDecision:
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    s = params.source_power * ch.h2 / (params.loss1 * params.noise_power)
    return fixed_batch(s, ch.f2, params.eh_efficiency, rho).decision()


def joint_exhaustive(
    params: SystemParams, ch: ChannelRealization, grid_rho: int = 400, grid_beta: int = 400
) -> RelayDecision:
    """Grid search over ``(rho, beta)`` maximizing the general end-to-end SINR.

    ``rho`` spans the open feasible interval ``(0, min(1, 1/(eta |f|^2)))`` and
    ``beta`` runs over ``k/grid_beta`` of the max-power bound, ``k = 1..grid_beta``,
    so the bound itself is always on the grid.
    """
    if grid_rho < 100 or grid_beta < 100:
        raise ValueError("grid counts must be >= 100")
    eta = params.eh_efficiency
    snr = link_snrs(params, ch)
    hi = min(1.0, 1.0 / (eta * ch.f2)) if ch.f2 > 0 else 1.0
    rho = hi * np.arange(1, grid_rho + 1) / (grid_rho + 1)
    bound = gain_bound(snr.gamma_sr, ch.f2, eta, rho)
    frac = np.arange(1, grid_beta + 1) / grid_beta
    beta = bound[:, None] * frac[None, :]
    gam = esinr_general(snr.gamma_sr, snr.gamma_rd, ch.f2, rho[:, None], beta)
    gam = np.where(np.isfinite(gam), gam, -np.inf)
    i, j = np.unravel_index(np.argmax(gam), gam.shape)
    ok = bool(np.isfinite(gam[i, j]) and beta[i, j] > 0)
    return RelayDecision(float(rho[i]), float(beta[i, j]) if ok else 0.0, ok)


# ---------------------------------------------------------------------------
# diagnostics


def q1_ordinal_agreement(gamma_sr, gamma_rd, f2, eta):
    """Compare the objective-selected full-CSI root with the ordinal branch rule.

    The ordinal rule takes the first ascending real root of Q1 when
    ``|f|^2 >= g_rd`` and the second otherwise. Only rows with exactly two
    real roots in ``(0, 1)`` are judged. Returns ``(judged, agree)`` counts.
    """
    s, d, f = (np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(gamma_sr, gamma_rd, f2))
    roots = real_roots_batch(q1_coefficients(s, d, f, eta))
    dec = full_csi_batch(s, d, f, eta)
    in01 = np.isfinite(roots) & (roots > 0) & (roots < 1)
    judged = (in01.sum(axis=1) == 2) & dec.stationary
    first_in = np.where(in01, roots, np.inf).min(axis=1)
    chose_smaller = np.isclose(dec.rho, first_in, rtol=1e-9, atol=0)
    agree = judged & (chose_smaller == (f >= d))
    n_j, n_a = int(judged.sum()), int(agree.sum())
    if n_j and n_a < n_j:
        log.info("ordinal root rule disagrees with objective selection on %d of %d rows", n_j - n_a, n_j)
    return n_j, n_a
