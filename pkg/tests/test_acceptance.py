"""Acceptance gate: outage sweeps at 10^6 trials per point plus the full-size validation checks.

Each test is tagged with the criterion it checks; ``conftest.py`` prints one
PASS/FAIL line per criterion after the run. The sweeps take about four
minutes each on one core.
"""

import numpy as np
import pytest

from fdrelay.experiments import crossing, emit_report, load_config, run_experiment
from fdrelay.validate import (
    SIZES,
    check_conditional_outage,
    check_full_csi,
    check_joint,
    check_quartic,
    check_signal_oracle,
)

TRIALS = 1_000_000
FIXED = ("fixed_0.7", "fixed_0.5", "fixed_0.3")
FULL = SIZES["full"]

pytestmark = pytest.mark.slow


def _sweep(preset, tmp_path_factory):
    curves = run_experiment(load_config(preset, {"trials": str(TRIALS)}))
    curves.to_csv(tmp_path_factory.mktemp("curves") / f"{preset}.csv")
    return curves


@pytest.fixture(scope="module")
def inr_curves(tmp_path_factory):
    return _sweep("inr", tmp_path_factory)


@pytest.fixture(scope="module")
def snr_curves(tmp_path_factory):
    return _sweep("snr", tmp_path_factory)


@pytest.fixture(scope="module")
def position_curves(tmp_path_factory):
    return _sweep("position", tmp_path_factory)


def _detail(request, text):
    request.node.user_properties.append(("detail", text))


def _gains(curves, level):
    return {g.scheme: g.gain_db for g in emit_report(curves, levels=(level,))}


def _within(gain, target, tol=1.5):
    return gain is not None and abs(gain - target) <= tol


def _fmt(g):
    return "none" if g is None else f"{g:.2f}"


@pytest.mark.criterion(1, "INR sweep ordering and gains at p_out = 0.1")
def test_inr_sweep_ordering_and_gains(inr_curves, request):
    high = [x for x, _ in zip(*inr_curves.curve("full_csi")) if x >= 30.0]
    full = np.array([inr_curves.value("full_csi", x).p_out for x in high])
    part = np.array([inr_curves.value("partial_csi", x).p_out for x in high])
    fixed = {s: np.array([inr_curves.value(s, x).p_out for x in high]) for s in FIXED}
    gains = _gains(inr_curves, 1e-1)
    targets = {"fixed_0.7": 5.5, "fixed_0.5": 4.5, "fixed_0.3": 3.5}
    _detail(
        request,
        "gains "
        + ", ".join(f"{s} {_fmt(gains[s])} dB (target {t})" for s, t in targets.items())
        + f"; max full-partial {np.max(full - part):.2e}, min fixed-partial {min(np.min(f - part) for f in fixed.values()):.3f}",
    )
    assert np.all(full <= part)
    assert all(np.all(part < f) for f in fixed.values())
    assert all(_within(gains[s], t) for s, t in targets.items())


@pytest.mark.criterion(2, "SNR sweep gains at p_out = 0.01 and partial/full spacing")
def test_snr_sweep_gains_and_partial_spacing(snr_curves, request):
    gains = _gains(snr_curves, 1e-2)
    targets = {"fixed_0.7": 4.5, "fixed_0.5": 3.0, "fixed_0.3": 1.8}
    xf, pf = snr_curves.curve("full_csi")
    xp, pp = snr_curves.curve("partial_csi")
    # horizontal distance from each partial-CSI point to the full-CSI curve
    gaps = []
    for x, p in zip(xp, pp):
        if pf.min() < p < pf.max():
            gaps.append(abs(crossing(xf, pf, p) - x))
    worst = max(gaps)
    _detail(
        request,
        "gains "
        + ", ".join(f"{s} {_fmt(gains[s])} dB (target {t})" for s, t in targets.items())
        + f"; worst partial-to-full horizontal gap {worst:.3f} dB over {len(gaps)} points",
    )
    assert all(_within(gains[s], t) for s, t in targets.items())
    assert worst <= 1.0


@pytest.mark.criterion(3, "position sweep interior maximum and partial/full gap shrinking towards the destination")
def test_position_sweep_shape(position_curves, request):
    worst = {}
    for s in position_curves.schemes:
        x, p = position_curves.curve(s)
        worst[s] = float(x[np.argmax(p)])
    diff = {d: abs(position_curves.value("partial_csi", d).p_out - position_curves.value("full_csi", d).p_out) for d in (0.3, 0.9)}
    _detail(
        request,
        "worst d1 " + ", ".join(f"{s} {v:.1f}" for s, v in worst.items())
        + f"; |partial-full| {diff[0.9]:.2e} at d1=0.9 vs {diff[0.3]:.2e} at d1=0.3",
    )
    assert all(0.7 <= v <= 1.3 for v in worst.values())
    assert diff[0.9] < diff[0.3]


@pytest.mark.criterion(4, "full-CSI optimizer against a 1000-point grid")
def test_full_csi_against_grid(request):
    r = check_full_csi(FULL["full_csi"])
    _detail(request, r.detail)
    assert r.passed


@pytest.mark.criterion(5, "joint search never below the max-power policy")
def test_joint_search_dominance(request):
    r = check_joint(FULL["joint"])
    _detail(request, r.detail)
    assert r.passed


@pytest.mark.criterion(6, "analytic conditional outage against Monte Carlo")
def test_conditional_outage_agreement(request):
    r = check_conditional_outage(FULL["conditional"], FULL["cond_draws"])
    _detail(request, r.detail)
    assert r.passed


@pytest.mark.criterion(7, "symbol-level simulation against analytic powers")
def test_signal_oracle_agreement(request):
    r = check_signal_oracle(FULL["signal"], FULL["symbols"])
    _detail(request, r.detail)
    assert r.passed


@pytest.mark.criterion(8, "quartic solver recovery, residuals and eigenvalue agreement")
def test_quartic_solver(request):
    r = check_quartic(FULL["quartic"])
    _detail(request, r.detail)
    assert r.passed
