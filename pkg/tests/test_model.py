import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdrelay.model import (
    ChannelRealization,
    OscillationError,
    RelayDecision,
    SystemParams,
    esinr,
    esinr_general,
    esinr_max_power,
    gain_bound,
    harvested_energy,
    is_feasible,
    link_snrs,
    max_power_gain,
    relay_tx_power,
)


def unit_params(**kw):
    """Unit distances and noise, so gamma_sr = Ps*h2."""
    return SystemParams(**{"noise_power": 1.0, **kw})


# ---------------------------------------------------------------- params


def test_threshold_from_rate():
    assert SystemParams(rate=3).sinr_threshold == 7.0
    assert SystemParams(rate=3).replace(rate=2).sinr_threshold == 3.0
    assert SystemParams(rate=3, sinr_threshold=5.0).sinr_threshold == 5.0


@pytest.mark.parametrize(
    "kw, msg",
    [
        (dict(source_power=0), "source_power > 0"),
        (dict(noise_power=-1), "noise_power > 0"),
        (dict(d1=0), "d1 > 0"),
        (dict(eh_efficiency=1.0), "eh_efficiency"),
        (dict(path_loss_exp=1.5), "path_loss_exp >= 2"),
        (dict(mean_f2=0), "mean_f2 > 0"),
        (dict(block_duration=0), "block_duration > 0"),
        (dict(d2=math.inf), "d2 must be finite"),
    ],
)
def test_params_invariants_named(kw, msg):
    with pytest.raises(ValueError, match=msg):
        SystemParams(**kw)


def test_from_db_normalization():
    p = SystemParams.from_db(35, 30)
    assert p.source_power == 1.0
    assert p.snr == pytest.approx(10**3.5)
    assert p.inr == pytest.approx(1e3)


def test_negative_gain_rejected():
    with pytest.raises(ValueError):
        ChannelRealization(-1, 1, 1)


# ---------------------------------------------------------------- link SNRs


def test_link_snrs_reference_point():
    p = SystemParams.from_db(35, 30)
    assert link_snrs(p, ChannelRealization(1, 1, 0)).gamma_sr == pytest.approx(10**3.5, rel=1e-12)


def test_link_snrs_zero_channel():
    s = link_snrs(SystemParams(), ChannelRealization(0, 1, 1))
    assert (s.gamma_sr, s.gamma_rd) == (0, 0)


def test_link_snrs_unit_distances():
    s = link_snrs(SystemParams(source_power=2, noise_power=1), ChannelRealization(0.5, 2, 0))
    assert (s.gamma_sr, s.gamma_rd) == (1, 2)


def test_gamma_rd_is_cascaded():
    p = SystemParams(d2=1.3)
    ch = ChannelRealization(0.7, 1.9, 0)
    s = link_snrs(p, ch)
    assert s.gamma_rd == pytest.approx(s.gamma_sr * ch.g2 / p.loss2, rel=1e-14)


# ---------------------------------------------------------------- gain bound


def test_gain_bound_no_loop():
    p = unit_params(source_power=10)
    assert max_power_gain(p, ChannelRealization(1, 1, 0), 0.5) == pytest.approx(1 / 3, rel=1e-14)


def test_gain_bound_vanishes_with_rho():
    p = unit_params(source_power=10)
    assert max_power_gain(p, ChannelRealization(1, 1, 0.3), 1e-12) < 1e-10


def test_gain_bound_negative_denominator_infeasible():
    p = unit_params()
    assert max_power_gain(p, ChannelRealization(1, 1, 10), 0.9) is None


def test_gain_bound_rho_domain():
    with pytest.raises(ValueError):
        max_power_gain(unit_params(), ChannelRealization(1, 1, 1), 1.0)


def test_positive_denominator_alone_does_not_prevent_oscillation():
    # eps = 1 - eta*rho*f2 < 0 while the bound's denominator is positive: the
    # resulting gain would violate beta*(1-rho)*f2 < 1, so it is refused.
    eta, rho, f2, gsr = 0.4, 0.5, 10.0, 10.0
    den = (1 - rho) * gsr - eta * rho * f2 + 1
    beta = eta * rho * gsr / den
    assert den > 0 and beta * (1 - rho) * f2 > 1
    assert np.isnan(gain_bound(gsr, f2, eta, rho))


@settings(max_examples=300, deadline=None)
@given(
    gsr=st.floats(1e-3, 1e6),
    f2=st.floats(0, 1e4),
    rho=st.floats(1e-6, 1 - 1e-6),
    eta=st.floats(0.05, 0.95),
)
def test_feasible_bound_is_non_oscillatory(gsr, f2, rho, eta):
    beta = gain_bound(gsr, f2, eta, rho)
    if is_feasible(gsr, f2, eta, rho):
        assert (1 - rho) * beta * f2 < 1
    else:
        assert np.isnan(beta)


# ---------------------------------------------------------------- relay power and energy


def test_relay_power_silent():
    p = unit_params()
    assert relay_tx_power(p, ChannelRealization(1, 1, 1), RelayDecision(0.5, 0.0, True)) == 0


def test_relay_power_no_loop():
    p = unit_params(source_power=2)
    assert relay_tx_power(p, ChannelRealization(1, 1, 0), RelayDecision(0.5, 1.0, True)) == pytest.approx(2.0)


def test_relay_power_closes_energy_balance():
    p = unit_params(source_power=10)
    ch = ChannelRealization(1, 1, 1)
    rho = 0.5
    beta = max_power_gain(p, ch, rho)
    pr = relay_tx_power(p, ch, RelayDecision(rho, beta, True))
    assert pr == pytest.approx(p.eh_efficiency * rho * (10 * ch.h2 + ch.f2 * pr), rel=1e-9)
    assert harvested_energy(p, ch, rho, pr) / p.block_duration == pytest.approx(pr, rel=1e-9)


def test_relay_power_rejects_oscillation():
    with pytest.raises(OscillationError):
        relay_tx_power(unit_params(), ChannelRealization(1, 1, 4), RelayDecision(0.5, 1.0, True))


def test_harvested_energy_examples():
    p = unit_params()
    assert harvested_energy(p, ChannelRealization(1, 1, 1), 0.0, 3.0) == 0
    assert harvested_energy(p, ChannelRealization(1, 1, 0), 0.5, 0.0) == pytest.approx(0.2)


# ---------------------------------------------------------------- e-SINR


def test_esinr_rho_one_is_zero():
    b = esinr(unit_params(), ChannelRealization(1, 1, 0.1), RelayDecision(1.0, 0.5, True))
    assert b.desired_power == 0 and b.esinr == 0


def test_esinr_no_loop_power_without_loop_channel():
    b = esinr(unit_params(source_power=100), ChannelRealization(1, 0.5, 0), RelayDecision(0.6, 0.3, True))
    assert b.loop_power == 0


def test_esinr_breakdown_consistency():
    p = SystemParams(noise_power=0.01, d1=1.2, d2=0.8)
    ch = ChannelRealization(0.9, 1.4, 0.2)
    d = RelayDecision(0.4, max_power_gain(p, ch, 0.4), True)
    b = esinr(p, ch, d)
    assert b.esinr == pytest.approx(b.desired_power / (b.loop_power + b.noise_power_out), rel=1e-12)
    # destination power = |g|^2 P_r / d2^m + sigma^2
    direct = ch.g2 * relay_tx_power(p, ch, d) / p.loss2 + p.noise_power
    assert b.total_power == pytest.approx(direct, rel=1e-12)


def test_esinr_rejects_infeasible():
    with pytest.raises(OscillationError):
        esinr(unit_params(), ChannelRealization(1, 1, 1), RelayDecision(0.5, 0.1, False))


@settings(max_examples=500, deadline=None)
@given(
    gsr=st.floats(1e-2, 1e6),
    g2=st.floats(1e-3, 1e2),
    f2=st.floats(0, 1e3),
    rho=st.floats(1e-4, 1 - 1e-4),
)
def test_general_and_reduced_sinr_agree_at_max_power(gsr, g2, f2, rho):
    eta = 0.4
    beta = gain_bound(gsr, f2, eta, rho)
    if not np.isfinite(beta) or beta <= 0:
        return
    grd = gsr * g2
    general = esinr_general(gsr, grd, f2, rho, beta)
    reduced = esinr_max_power(gsr, grd, f2, eta, rho)
    assert general == pytest.approx(reduced, rel=1e-9)


def test_sinr_vanishes_at_both_ends():
    for rho in (1e-9, 1 - 1e-9):
        assert esinr_max_power(100.0, 50.0, 0.1, 0.4, rho) < 1e-6
