import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from otfs_cdrt.analysis import outage_sum_rate
from otfs_cdrt.channel import ChannelProfile, LINKS
from otfs_cdrt.config import load_preset
from otfs_cdrt.frame import FrameParams
from otfs_cdrt.modem import PowerAllocation
from otfs_cdrt.protocol import (
    RateTargets,
    Scenario,
    SinrSet,
    decide_outages,
    run_trial,
    run_trial_ncdrt,
    run_trial_oma,
    run_trials,
    sinr_phase1,
    sinr_phase2,
)

NM = 512
alphas = st.floats(0.01, 0.49).map(lambda a: PowerAllocation(a, 1 - a))
thetas = st.floats(1.0, 1e8)
rhos = st.floats(1e-3, 1e6)


def general(snr_db=10.0, **changes):
    s = load_preset("general").scenario_at(snr_db)
    return dataclasses.replace(s, **changes) if changes else s


def small_scenario(snr_db=10.0, **changes):
    frame = FrameParams(8, 4, 3750.0)
    taps = dict(k_taps=[0, 1, 2], l_taps=[0, 2, 3])
    profiles = {link: ChannelProfile.from_taps(**taps, omega_total=0.5 if link == "sr_t1" else 1.0)
                for link in LINKS}
    rho = 10 ** (snr_db / 10)
    return Scenario(frame, profiles, PowerAllocation(), rho, rho / 2, RateTargets(), **changes)


def test_rate_thresholds():
    r = RateTargets(1.8, 1.0, 1.0)
    assert r.thresholds() == pytest.approx((2 ** 3.6 - 1, 3.0, 3.0))
    assert r.thresholds(phases=4) == pytest.approx((2 ** 7.2 - 1, 15.0, 15.0))
    assert r.total == pytest.approx(3.8)
    with pytest.raises(ValueError):
        RateTargets(0.0, 1.0, 1.0)


def test_scenario_invariants():
    s = general()
    with pytest.raises(ValueError):
        dataclasses.replace(s, rho_s=0.0)
    with pytest.raises(ValueError):
        dataclasses.replace(s, scheme="tdma")
    profiles = dict(s.profiles)
    profiles["sr_t1"] = dataclasses.replace(profiles["sr_t1"], omega_total=1.0)
    with pytest.raises(ValueError):
        dataclasses.replace(s, profiles=profiles)


def test_phase1_example():
    g_c_xe, g_c_xc, g_r_xe = sinr_phase1(NM, NM, PowerAllocation(0.1, 0.9), 100.0, NM)
    assert g_c_xe == pytest.approx(90 / 11)
    assert g_c_xc == pytest.approx(10.0)
    assert g_r_xe == g_c_xe


def test_phase1_sentinel():
    out = sinr_phase1(np.inf, np.inf, PowerAllocation(), 100.0, NM)
    assert all(float(g) == 0.0 for g in out)


def test_phase1_power_limit():
    g, _, _ = sinr_phase1(2.0 * NM, NM, PowerAllocation(1e-9, 1 - 1e-9), 100.0, NM)
    assert g == pytest.approx(100.0 / 2.0, rel=1e-6)


def test_phase2_examples():
    g_c, g_e = sinr_phase2(2 * NM, NM, 100.0, 50.0, NM)
    assert g_c == pytest.approx(50.0) and g_e == pytest.approx(50.0)
    assert all(float(g) == 0.0 for g in sinr_phase2(np.inf, np.inf, 1.0, 1.0, NM))


@settings(max_examples=300, deadline=None)
@given(alloc=alphas, t1=thetas, t2=thetas, rho=rhos, scale=st.floats(1.0, 100.0))
def test_sinr_monotone(alloc, t1, t2, rho, scale):
    lo = sinr_phase1(t1, t2, alloc, rho, NM)
    worse = sinr_phase1(t1 * scale, t2 * scale, alloc, rho, NM)
    brighter = sinr_phase1(t1, t2, alloc, rho * scale, NM)
    for a, b, c in zip(lo, worse, brighter):
        assert b <= a * (1 + 1e-12)
        assert c >= a * (1 - 1e-12)
    lo2 = sinr_phase2(t1, t2, rho, rho, NM)
    for a, b, c in zip(lo2, sinr_phase2(t1 * scale, t2 * scale, rho, rho, NM),
                       sinr_phase2(t1, t2, rho * scale, rho * scale, NM)):
        assert b <= a * (1 + 1e-12)
        assert c >= a * (1 - 1e-12)


def test_feasibility_example():
    r = RateTargets(1.8, 1.0, 1.0)
    assert r.thresholds()[1] == pytest.approx(3.0)
    assert PowerAllocation(0.1, 0.9).ratio > 3.0


def sinr_set(v):
    return SinrSet(*(np.float64(v),) * 5)


def test_all_large_sinrs_no_outage():
    out = decide_outages(sinr_set(1e9), RateTargets())
    assert not out.outage_xc and not out.outage_xe and not out.outage_xbarc


def test_decide_chain():
    rates = RateTargets(1.0, 1.0, 1.0)  # every threshold is 3
    s = SinrSet(np.float64(2.0), np.float64(10.0), np.float64(10.0), np.float64(10.0), np.float64(10.0))
    out = decide_outages(s, rates)
    assert out.outage_xc and not out.outage_xe and not out.outage_xbarc
    assert decide_outages(s, rates, strict_eq19=True).outage_xbarc
    s = SinrSet(np.float64(10.0), np.float64(10.0), np.float64(10.0), np.float64(10.0), np.float64(2.0))
    out = decide_outages(s, rates)
    assert not out.outage_xc and out.outage_xe


@settings(max_examples=200, deadline=None)
@given(r_xe=st.floats(1.661, 5.0), t=st.lists(thetas, min_size=4, max_size=4), rho=rhos)
def test_degenerate_branch_always_outage(r_xe, t, rho):
    # alpha_e / alpha_c = 9 <= 2^(2 R_xe) - 1 once R_xe >= log2(10)/2
    rates = RateTargets(1.0, r_xe, 1.0)
    alloc = PowerAllocation()
    assert alloc.ratio <= rates.thresholds()[1]
    g1 = sinr_phase1(t[0], t[1], alloc, rho, NM)
    g2 = sinr_phase2(t[2], t[3], rho, rho, NM)
    out = decide_outages(SinrSet(g1[0], g1[1], g1[2], g2[0], g2[1]), rates)
    assert out.outage_xc and out.outage_xe


def test_run_trial_replay():
    s = general()
    a = run_trial(s, np.random.default_rng(3))
    b = run_trial(s, np.random.default_rng(3))
    assert (a.outage_xc, a.outage_xe, a.outage_xbarc) == (b.outage_xc, b.outage_xe, b.outage_xbarc)
    assert vars(a.sinrs) == vars(b.sinrs)
    assert isinstance(a.outage_xc, bool) and isinstance(a.sinrs.g_c_xc_t1, float)


def test_xbarc_outage_vanishes_at_high_snr():
    rng = np.random.default_rng(4)
    rates = [run_trials(general(snr), rng, 4000).outage_xbarc.mean() for snr in (10, 30, 50, 70)]
    assert rates[-1] < 1e-3
    assert all(b <= a for a, b in zip(rates, rates[1:]))


def test_oma_and_ncdrt_entry_points():
    s = general(30.0)
    prop = run_trial(s, np.random.default_rng(9))
    nc = run_trial_ncdrt(s, np.random.default_rng(9))
    oma = run_trial_oma(s, np.random.default_rng(9))
    assert nc.outage_xbarc is True
    assert (nc.outage_xc, nc.outage_xe) == (prop.outage_xc, prop.outage_xe)
    assert isinstance(oma.outage_xe, bool)


def test_oma_ignores_power_split():
    s = general(30.0, rates=RateTargets(1.0, 2.0, 1.0))
    n = 20_000
    prop = run_trials(s, np.random.default_rng(1), n, "proposed")
    oma = run_trials(s, np.random.default_rng(1), n, "oma")
    assert prop.outage_xc.all() and prop.outage_xe.all()
    assert oma.outage_xc.mean() < 1.0 and oma.outage_xe.mean() < 1.0
    other = dataclasses.replace(s, alloc=PowerAllocation(0.3, 0.7))
    oma2 = run_trials(other, np.random.default_rng(1), n, "oma")
    np.testing.assert_array_equal(oma.outage_xe, oma2.outage_xe)


def test_ncdrt_sum_rate_definition():
    rates = RateTargets()
    p = (0.2, 0.3, 0.4)
    assert outage_sum_rate(*p, rates, "ncdrt") == pytest.approx(
        outage_sum_rate(*p, rates, "proposed") - (1 - p[2]) * rates.R_xbarc / 2)


def test_relay_never_better_on_average():
    s = general(10.0)
    t = run_trials(s, np.random.default_rng(5), 50_000).sinrs
    # same theta gives the same SINR; the weaker relay link shifts the law down
    assert np.median(t.g_r_xe_t1) < np.median(t.g_c_xe_t1)
    g_c, _, g_r = sinr_phase1(700.0, 700.0, s.alloc, s.rho_s, s.NM)
    assert g_c == g_r


def test_debug_sinr_matches_formula():
    s = small_scenario(10.0)
    out = run_trial(s, np.random.default_rng(21), debug=True, noise_draws=10_000)
    for name in ("g_c_xe_t1", "g_r_xe_t1", "g_c_xc_t1", "g_c_xbarc_t2", "g_e_xe_t2"):
        measured = out.measured[name]
        expected = getattr(out.sinrs, name)
        assert np.max(np.abs(measured / expected - 1)) < 0.05, name


def test_symbol_uniformity():
    # equalised noise must have one variance for every DD symbol
    s = general(10.0)
    out = run_trial(s, np.random.default_rng(8), debug=True, noise_draws=2000)
    noise = out.measured["noise_c_t1"][:, :16]
    samples = [np.concatenate([noise[:, j].real, noise[:, j].imag]) for j in range(16)]
    assert stats.bartlett(*samples).pvalue > 0.01


def test_payload_does_not_change_outcomes():
    s = small_scenario(10.0)
    a = run_trial(s, np.random.default_rng(2), debug=True, noise_draws=4000)
    b = run_trial(dataclasses.replace(s, payload="gaussian"), np.random.default_rng(2),
                  debug=True, noise_draws=4000)
    assert (a.outage_xc, a.outage_xe, a.outage_xbarc) == (b.outage_xc, b.outage_xe, b.outage_xbarc)
    for name in ("g_c_xe_t1", "g_c_xc_t1", "g_e_xe_t2"):
        ratio = np.mean(a.measured[name]) / np.mean(b.measured[name])
        assert abs(ratio - 1) < 0.05, name
