import math

import numpy as np
import pytest

from fdrelay.model import SystemParams
from fdrelay.montecarlo import (
    OutageEstimate,
    RngSpec,
    Scheme,
    conditional_outage_analytic,
    conditional_outage_mc,
    draw_channel,
    draw_gains,
    outage_mc,
    outage_mc_schemes,
)


def test_exponential_mean_unit():
    h2, _, _ = draw_gains(SystemParams(), np.random.default_rng(0), 1_000_000)
    assert 0.99 <= h2.mean() <= 1.01


def test_exponential_mean_strong_loop():
    p = SystemParams(noise_power=1.0, mean_f2=1e4)
    _, _, f2 = draw_gains(p, np.random.default_rng(1), 1_000_000)
    assert f2.mean() == pytest.approx(1e4, rel=0.01)


def test_draw_channel_replay():
    p = SystemParams()
    a = [draw_channel(p, RngSpec(42).generator()) for _ in range(2)]
    assert a[0] == a[1]


def test_scheme_names_roundtrip():
    for name in ("full_csi", "partial_csi", "fixed_0.3", "fixed_0.7"):
        assert Scheme.parse(name).name == name
    with pytest.raises(ValueError):
        Scheme.parse("fixed_1.5")
    with pytest.raises(ValueError):
        Scheme.parse("magic")


def test_half_width_formula():
    e = OutageEstimate.from_counts(250, 10_000)
    assert e.half_width_95 == pytest.approx(1.96 * math.sqrt(0.025 * 0.975 / 10_000))


def test_exact_interval_brackets_estimate():
    e = OutageEstimate.from_counts(30, 10_000, exact=True)
    lo, hi = e.ci_exact
    assert lo < e.p_out < hi


def test_min_trials():
    with pytest.raises(ValueError):
        outage_mc(SystemParams(), "full_csi", 100)


def test_zero_threshold_no_outage_when_feasible():
    p = SystemParams.from_db(30, 10, sinr_threshold=0.0)
    assert outage_mc(p, "full_csi", 20_000, RngSpec(3)).p_out == 0.0


def test_unreachable_destination_always_in_outage():
    p = SystemParams.from_db(35, 30, mean_g2=1e-12)
    for s in ("full_csi", "partial_csi", "fixed_0.5"):
        assert outage_mc(p, s, 20_000, RngSpec(4)).p_out == pytest.approx(1.0, abs=1e-4)


def test_reproducible_and_worker_independent():
    p = SystemParams.from_db(35, 30)
    a = outage_mc(p, "full_csi", 50_000, RngSpec(5, 1), chunk_size=8192)
    b = outage_mc(p, "full_csi", 50_000, RngSpec(5, 1), chunk_size=8192)
    c = outage_mc(p, "full_csi", 50_000, RngSpec(5, 1), chunk_size=8192, workers=2)
    assert a == b == c


def test_disjoint_streams_agree_statistically():
    p = SystemParams.from_db(35, 30)
    a = outage_mc(p, "fixed_0.5", 100_000, RngSpec(6, 0))
    b = outage_mc(p, "fixed_0.5", 100_000, RngSpec(6, 1))
    combined = math.hypot(a.half_width_95, b.half_width_95) / 1.96
    assert a.outages != b.outages
    assert abs(a.p_out - b.p_out) <= 3 * combined


def test_scheme_ordering_at_inr_30db():
    p = SystemParams.from_db(35, 30)
    est = outage_mc_schemes(p, ["full_csi", "partial_csi", "fixed_0.3", "fixed_0.5", "fixed_0.7"], 200_000, RngSpec(7))
    full, part = est["full_csi"], est["partial_csi"]
    assert full.p_out <= part.p_out + 2 * math.hypot(full.half_width_95, part.half_width_95)
    for r in ("fixed_0.3", "fixed_0.5", "fixed_0.7"):
        assert part.p_out < est[r].p_out


def test_conditional_outage_trivial_cases():
    p = SystemParams.from_db(35, 30)
    assert conditional_outage_analytic(p, 0.0, 1.0, 0.5) == 1.0
    # infeasible split: eta*rho*f2 >= 1
    assert conditional_outage_analytic(p, 1.0, 10.0, 0.5) == 1.0
    huge = p.replace(mean_g2=1e12)
    assert conditional_outage_analytic(huge, 1.0, 0.1, 0.5) < 1e-8
    with pytest.raises(ValueError):
        conditional_outage_analytic(p, 1.0, 0.1, 1.0)


def test_conditional_outage_first_region_matches_mc():
    p = SystemParams.from_db(35, 30)
    rng = np.random.default_rng(8)
    h2, f2, rho = 0.6, 0.02, 0.4
    exact = conditional_outage_analytic(p, h2, f2, rho)
    est = conditional_outage_mc(p, h2, f2, rho, 1_000_000, rng)
    assert 0 < exact < 1
    assert abs(est.p_out - exact) <= 3 * math.sqrt(exact * (1 - exact) / est.trials)


def test_conditional_outage_vectorized():
    p = SystemParams.from_db(35, 30)
    v = conditional_outage_analytic(p, np.array([0.0, 0.5, 1.0]), 0.01, 0.3)
    assert v.shape == (3,) and v[0] == 1.0 and v[2] < v[1]
