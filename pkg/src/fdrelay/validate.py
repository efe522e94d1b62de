"""Property checks cross-validating the solver, optimizers, Monte Carlo and signal model.

Each check draws its own random cases from a fixed seed and compares a
package result against an independent reference:

* quartic roots against planted root sets and companion-matrix eigenvalues;
* the full-CSI ratio against a dense grid scan of the max-power SINR;
* the max-power policy against an exhaustive ``(rho, beta)`` grid search;
* the conditional outage formula against Monte Carlo over ``|g|^2``;
* the analytic power decomposition against the symbol-level loop simulation.

``sizes="full"`` uses the sample counts of the acceptance gate and
``sizes="quick"`` a reduced set for interactive use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ChannelRealization, RelayDecision, SystemParams, esinr, esinr_max_power, gain_bound, relay_tx_power
from .montecarlo import conditional_outage_analytic, conditional_outage_mc
from .optimizer import full_csi_batch, joint_exhaustive, q1_coefficients, full_csi_rho
from .oracle import SymbolStreamConfig, simulate
from .quartic import real_roots_batch, scaled_residual

__all__ = ["CheckResult", "SIZES", "check_quartic", "check_full_csi", "check_joint", "check_conditional_outage", "check_signal_oracle", "run_all"]

SIZES = {
    "full": dict(quartic=100_000, full_csi=10_000, joint=1_000, conditional=1_000, cond_draws=1_000_000, signal=100, symbols=1_000_000),
    "quick": dict(quartic=10_000, full_csi=2_000, joint=20, conditional=100, cond_draws=200_000, signal=10, symbols=200_000),
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _random_links(rng: np.random.Generator, n: int):
    """Link SNRs and loop gains spread over many decades."""
    s = 10 ** rng.uniform(-1, 5, n)
    d = s * 10 ** rng.uniform(-3, 1, n)
    f = 10 ** rng.uniform(-4, 4, n)
    return s, d, f


def check_quartic(n: int = 100_000, seed: int = 0) -> CheckResult:
    """Planted-root recovery, residuals and agreement with companion-matrix eigenvalues."""
    rng = np.random.default_rng(seed)
    half = n // 2
    real4 = rng.uniform(-10, 10, (half, 4))
    pair_re = rng.uniform(-10, 10, (n - half, 1))
    pair_im = rng.uniform(0.1, 5, (n - half, 1))
    real2 = rng.uniform(-10, 10, (n - half, 2))
    lead = rng.choice([-1, 1], n) * 10 ** rng.uniform(-3, 3, n)

    coeffs = np.empty((n, 5))
    for i in range(half):
        coeffs[i] = lead[i] * np.poly(real4[i])
    for j in range(n - half):
        z = pair_re[j, 0] + 1j * pair_im[j, 0]
        coeffs[half + j] = lead[half + j] * np.real(np.poly([real2[j, 0], real2[j, 1], z, np.conj(z)]))

    roots = real_roots_batch(coeffs)
    count = np.isfinite(roots).sum(axis=1)
    expected = np.r_[np.full(half, 4), np.full(n - half, 2)]
    planted = np.full((n, 4), np.nan)
    planted[:half] = np.sort(real4, axis=1)
    planted[half:, :2] = np.sort(real2, axis=1)
    err = np.where(count == expected, np.nanmax(np.abs(np.nan_to_num(roots, nan=0) - np.nan_to_num(planted, nan=0)), axis=1), np.inf)
    res = scaled_residual(coeffs, roots)
    max_res = float(np.nanmax(res))

    # eigenvalue reference on a subset
    m = min(n, 5000)
    mismatch = 0
    for i in range(m):
        ev = np.linalg.eigvals(np.polynomial.polynomial.polycompanion(coeffs[i, ::-1]))
        ref = np.sort(ev[np.abs(ev.imag) <= 1e-6 * (1 + np.abs(ev.real))].real)
        got = roots[i][np.isfinite(roots[i])]
        if ref.size != got.size or (ref.size and np.max(np.abs(ref - got)) > 1e-6):
            mismatch += 1
    max_err = float(np.max(err))
    ok = max_err <= 1e-7 and max_res <= 1e-8 and mismatch == 0
    detail = f"max planted error {max_err:.2e} (<= 1e-7), max scaled residual {max_res:.2e} (<= 1e-8), eigenvalue mismatches {mismatch}/{m}"
    return CheckResult("quartic solver", ok, detail, dict(max_err=max_err, max_residual=max_res, mismatches=mismatch))


def check_full_csi(n: int = 10_000, grid: int = 1000, eta: float = 0.4, seed: int = 1) -> CheckResult:
    """Full-CSI ratio beats a dense ``rho`` grid and is a root of the stationarity quartic when interior."""
    rng = np.random.default_rng(seed)
    s, d, f = _random_links(rng, n)
    dec = full_csi_batch(s, d, f, eta)
    got = esinr_max_power(s, d, f, eta, dec.rho)
    hi = np.minimum(1.0, 1.0 / (eta * f))
    best = np.zeros(n)
    for k in range(1, grid + 1):
        r = hi * k / (grid + 1)
        best = np.maximum(best, esinr_max_power(s, d, f, eta, r))
    short = (best - got) / np.maximum(best, 1e-300)
    worst = float(np.max(short))
    stat = dec.stationary
    res = scaled_residual(q1_coefficients(s[stat], d[stat], f[stat], eta), dec.rho[stat][:, None])
    max_res = float(np.max(res)) if res.size else 0.0
    ok = worst <= 1e-6 and max_res <= 1e-8
    detail = f"worst relative shortfall vs {grid}-point grid {worst:.2e} (<= 1e-6), max stationarity residual {max_res:.2e} (<= 1e-8)"
    return CheckResult("full-CSI optimizer vs grid", ok, detail, dict(shortfall=worst, residual=max_res))


def check_joint(n: int = 200, grid: int = 200, seed: int = 2) -> CheckResult:
    """Exhaustive ``(rho, beta)`` search never loses to the max-power policy beyond grid resolution."""
    rng = np.random.default_rng(seed)
    params = SystemParams(noise_power=1.0)
    failures = 0
    worst = -math.inf
    for _ in range(n):
        h2, g2 = rng.exponential(size=2) * 10 ** rng.uniform(0, 3)
        ch = ChannelRealization(h2, g2, 10 ** rng.uniform(-3, 2))
        full = full_csi_rho(params, ch)
        joint = joint_exhaustive(params, ch, grid, grid)
        g_full = esinr(params, ch, full).esinr
        g_joint = esinr(params, ch, joint).esinr
        # resolution slack: what the rho grid alone loses against the continuous optimum
        eta = params.eh_efficiency
        hi = min(1.0, 1.0 / (eta * ch.f2))
        rho = hi * np.arange(1, grid + 1) / (grid + 1)
        s = params.source_power * h2 / params.noise_power
        slack = g_full - float(np.max(esinr_max_power(s, s * g2, ch.f2, eta, rho)))
        gap = (g_full - slack) - g_joint
        worst = max(worst, gap / g_full)
        if gap > 1e-12 * g_full:
            failures += 1
    ok = failures == 0
    detail = f"{failures}/{n} realizations where joint search fell below the max-power policy beyond grid slack (worst {worst:.2e})"
    return CheckResult("joint search dominance", ok, detail, dict(failures=failures))


def check_conditional_outage(n: int = 1000, draws: int = 1_000_000, seed: int = 3) -> CheckResult:
    """Analytic outage over ``|g|^2`` against per-realization Monte Carlo, 3-sigma agreement rate."""
    rng = np.random.default_rng(seed)
    params = SystemParams.from_db(35.0, 30.0)
    eta = params.eh_efficiency
    agree = 0
    for _ in range(n):
        h2 = rng.exponential(params.mean_h2)
        f2 = rng.exponential(params.mean_f2)
        rho = rng.uniform(0.0, min(1.0, 1.0 / (eta * f2)))
        p = conditional_outage_analytic(params, h2, f2, rho)
        est = conditional_outage_mc(params, h2, f2, rho, draws, rng)
        sigma = math.sqrt(p * (1 - p) / draws)
        if abs(est.p_out - p) <= 3 * sigma or (sigma == 0 and est.p_out == p):
            agree += 1
    frac = agree / n
    ok = frac >= 0.95
    return CheckResult("conditional outage analytic vs MC", ok, f"{agree}/{n} within 3 sigma ({frac:.1%}, need >= 95%)", dict(fraction=frac))


def check_signal_oracle(n: int = 100, symbols: int = 1_000_000, max_loop_gain: float = 0.5, seed: int = 4) -> CheckResult:
    """Empirical power components, SINR and relay power within 1% of the analytic values."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    done = 0
    while done < n:
        params = SystemParams(noise_power=10 ** rng.uniform(-3, 0), d1=rng.uniform(0.5, 1.5), d2=rng.uniform(0.5, 1.5))
        ch = ChannelRealization(*rng.exponential(size=2), 10 ** rng.uniform(-3, 1))
        rho = rng.uniform(0.05, 0.95)
        s = params.source_power * ch.h2 / (params.loss1 * params.noise_power)
        beta = float(gain_bound(s, ch.f2, params.eh_efficiency, rho))
        if not math.isfinite(beta) or beta <= 0 or (1 - rho) * beta * ch.f2 > max_loop_gain:
            continue
        dec = RelayDecision(rho, beta, True)
        cfg = SymbolStreamConfig.from_realization(ch, symbols, rng, processing_delay=int(rng.integers(1, 5)), seed=int(rng.integers(2**32)))
        st = simulate(cfg, params, dec)
        ref = esinr(params, ch, dec)
        pairs = [
            (st.breakdown.desired_power, ref.desired_power),
            (st.breakdown.loop_power, ref.loop_power),
            (st.breakdown.noise_power_out, ref.noise_power_out),
            (st.breakdown.esinr, ref.esinr),
            (st.relay_power, relay_tx_power(params, ch, dec)),
            (st.received_power, ref.total_power),
        ]
        rel = max(abs(a - b) / b for a, b in pairs if b > 0)
        worst = max(worst, rel)
        failures += rel > 0.01
        done += 1
    ok = failures == 0
    return CheckResult("signal oracle vs analytic powers", ok, f"worst relative error {worst:.2e} over {n} configurations (<= 1e-2)", dict(worst=worst))


def run_all(sizes: str = "quick") -> list[CheckResult]:
    z = SIZES[sizes]
    return [
        check_quartic(z["quartic"]),
        check_full_csi(z["full_csi"]),
        check_joint(z["joint"]),
        check_conditional_outage(z["conditional"], z["cond_draws"]),
        check_signal_oracle(z["signal"], z["symbols"]),
    ]
