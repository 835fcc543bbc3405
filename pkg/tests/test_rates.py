import math

import numpy as np
import pytest

from helpers import cn, random_channels, random_state
from hrris_mec import (EDGE_LATENCY_INF, ChannelSet, ComputeParams, HrrisState,
                       achievable_rate, active_power, effective_channel,
                       latency, leakage_bound, secrecy_rate, sinr)


def trace_form_active_power(hs, cs, p_user, sigma2):
    """Independent oracle: tr[Psi (P h h^H + sigma2 I) Psi^H]."""
    n = len(hs.alpha)
    psi = np.diag(hs.active_part())
    cov = p_user * np.outer(cs.h_r, cs.h_r.conj()) + sigma2 * np.eye(n)
    return float(np.trace(psi @ cov @ psi.conj().T).real)


def test_effective_channel_without_surface():
    rng = np.random.default_rng(0)
    cs = ChannelSet(h_en=cn(rng, 4), h_r=np.zeros(0, complex),
                    h_e_true=cn(rng, 1), h_e_est=cn(rng, 1), g=np.zeros((4, 0), complex))
    hs = HrrisState(np.zeros(0, complex), ())
    np.testing.assert_array_equal(effective_channel(cs, hs), cs.h_en)


def test_effective_channel_unit_passthrough():
    rng = np.random.default_rng(1)
    h_en = cn(rng, 3)
    g1 = cn(rng, 3)
    cs = ChannelSet(h_en=h_en, h_r=np.ones(1, complex), h_e_true=cn(rng, 1),
                    h_e_est=cn(rng, 1), g=g1.reshape(3, 1))
    hs = HrrisState(np.ones(1, complex), ())
    np.testing.assert_allclose(effective_channel(cs, hs), h_en + g1, rtol=1e-12)


def test_effective_channel_linear_in_single_coefficient():
    rng = np.random.default_rng(2)
    cs = random_channels(rng, m=4, n=5)
    hs = random_state(rng, 5, n_active=2)
    n = hs.active_set[0]
    bumped = HrrisState(hs.alpha.copy(), hs.active_set)
    bumped.alpha[n] *= 2.0
    delta = effective_channel(cs, bumped) - effective_channel(cs, hs)
    np.testing.assert_allclose(delta, cs.g[:, n] * hs.alpha[n] * cs.h_r[n], rtol=1e-10)


def test_active_power_empty_and_single():
    rng = np.random.default_rng(3)
    cs = random_channels(rng, m=3, n=4)
    passive = HrrisState(np.exp(1j * rng.uniform(0, 2 * np.pi, 4)), ())
    assert active_power(passive, cs, 0.5, 1e-9) == 0.0
    hs = HrrisState(np.exp(1j * rng.uniform(0, 2 * np.pi, 4)), (2,))
    expected = 1e-9 + 0.5 * abs(cs.h_r[2]) ** 2
    assert active_power(hs, cs, 0.5, 1e-9) == pytest.approx(expected, rel=1e-12)


def test_active_power_matches_trace_oracle():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 8))
        cs = random_channels(rng, m=m, n=n)
        hs = random_state(rng, n)
        p_user = 10.0 ** rng.uniform(-3, 1)
        sigma2 = 10.0 ** rng.uniform(-12, -6)
        want = trace_form_active_power(hs, cs, p_user, sigma2)
        got = active_power(hs, cs, p_user, sigma2)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-300)


def test_sinr_matched_filter_on_white_noise():
    rng = np.random.default_rng(5)
    cs = random_channels(rng, m=4, n=6)
    hs = HrrisState(np.exp(1j * rng.uniform(0, 2 * np.pi, 6)), ())
    h = effective_channel(cs, hs)
    p_user, sigma2 = 0.8, 1e-10
    got = sinr(h, hs, cs, p_user, sigma2)
    assert got == pytest.approx(p_user * np.linalg.norm(h) ** 2 / sigma2, rel=1e-12)


def test_sinr_scale_invariant():
    rng = np.random.default_rng(6)
    cs = random_channels(rng, m=4, n=6)
    hs = random_state(rng, 6)
    w = cn(rng, 4)
    ref = sinr(w, hs, cs, 1.0, 1e-10)
    for _ in range(1000):
        c = (rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3)) or 1.0
        assert sinr(c * w, hs, cs, 1.0, 1e-10) == pytest.approx(ref, rel=1e-9)


def test_sinr_scalar_case_hand_computed():
    # M = 1, N = 1, everything scalar: check against a by-hand evaluation
    h_en = np.array([0.3 - 0.4j])
    h_r = np.array([0.5 + 0.1j])
    g = np.array([[0.2 + 0.6j]])
    alpha = np.array([1.5 * np.exp(1j * 0.7)])
    cs = ChannelSet(h_en=h_en, h_r=h_r, h_e_true=np.array([0.1j]),
                    h_e_est=np.array([0.1j]), g=g)
    hs = HrrisState(alpha, (0,))
    w = np.array([0.9 - 0.2j])
    p_user, sigma2 = 2.0, 1e-3
    h = h_en[0] + g[0, 0] * alpha[0] * h_r[0]
    num = p_user * abs(np.conj(w[0]) * h) ** 2
    den = sigma2 * (abs(w[0]) ** 2 + abs(alpha[0]) ** 2 * abs(np.conj(w[0]) * g[0, 0]) ** 2)
    assert sinr(w, hs, cs, p_user, sigma2) == pytest.approx(num / den, rel=1e-12)


def test_sinr_rejects_zero_combiner():
    rng = np.random.default_rng(7)
    cs = random_channels(rng, m=3, n=2)
    hs = random_state(rng, 2)
    with pytest.raises(ValueError):
        sinr(np.zeros(3, complex), hs, cs, 1.0, 1e-9)


def test_phase_changes_leave_denominator_untouched():
    rng = np.random.default_rng(8)
    for _ in range(100):
        cs = random_channels(rng, m=4, n=6)
        hs = random_state(rng, 6, n_active=2)
        w = cn(rng, 4)
        twisted = HrrisState(np.abs(hs.alpha) * np.exp(1j * rng.uniform(0, 2 * np.pi, 6)),
                             hs.active_set)
        p_user, sigma2 = 1.0, 1e-9
        assert active_power(twisted, cs, p_user, sigma2) == pytest.approx(
            active_power(hs, cs, p_user, sigma2), rel=1e-12)
        # denominator quantity sigma2 * w^H Q w via sinr with a frozen numerator
        def denom(state):
            h = effective_channel(cs, state)
            return p_user * abs(np.vdot(w, h)) ** 2 / sinr(w, state, cs, p_user, sigma2)
        assert denom(twisted) == pytest.approx(denom(hs), rel=1e-9)


def test_achievable_rate_points():
    assert achievable_rate(0.0, 1e6) == 0.0
    assert achievable_rate(1.0, 1e6) == pytest.approx(1e6, rel=1e-12)
    assert achievable_rate(12100.0, 1e6) == pytest.approx(13562838.653117804, rel=1e-9)


def test_leakage_bound_reference_and_monotonicity():
    h = np.array([math.sqrt(1e-7)], dtype=complex)
    got = leakage_bound(h, 0.1, 0.999, 1e-11, 1e6)
    assert got == pytest.approx(13561395.355588613, rel=1e-9)
    # zero margin reduces to the plain formula on the estimate
    plain = 1e6 * math.log2(1 + 0.999 * 1e-7 / 1e-11)
    assert leakage_bound(h, 0.0, 0.999, 1e-11, 1e6) == pytest.approx(plain, rel=1e-12)
    bounds = [leakage_bound(h, eps, 0.999, 1e-11, 1e6) for eps in (0.0, 0.05, 0.1, 0.3)]
    assert all(a < b for a, b in zip(bounds, bounds[1:]))


def test_secrecy_rate_clamp():
    assert secrecy_rate(5e5, 7e5) == 0.0
    assert secrecy_rate(7e5, 5e5) == pytest.approx(2e5)
    assert secrecy_rate(3.3e6, 0.0) == 3.3e6


def test_latency_local_anchor_exact():
    cp = ComputeParams()
    d_local, d_edge, total = latency(0, 1e6, cp)
    assert d_local == 0.45
    assert d_edge == 0.0
    assert total == 0.45


def test_latency_limits_and_sentinel():
    cp = ComputeParams(local_rate=5e8, edge_rate=1e30)
    d_local, d_edge, total = latency(cp.total_bits, 1e30, cp)
    assert total < 1e-9
    d_local, d_edge, total = latency(1, 0.0, ComputeParams())
    assert d_edge == EDGE_LATENCY_INF and total == EDGE_LATENCY_INF
    with pytest.raises(ValueError):
        latency(-1, 1.0, cp)
    with pytest.raises(ValueError):
        latency(cp.total_bits + 1, 1.0, cp)


def test_latency_branch_monotonicity():
    cp = ComputeParams()
    r_s = 2e6
    ells = range(0, cp.total_bits + 1, 30_000)
    locals_, edges = zip(*[latency(e, r_s, cp)[:2] for e in ells])
    assert all(a > b for a, b in zip(locals_, locals_[1:]))
    assert all(a < b for a, b in zip(edges, edges[1:]))


def test_state_parts_partition():
    rng = np.random.default_rng(9)
    hs = random_state(rng, 8, n_active=3)
    phi, psi = hs.passive_part(), hs.active_part()
    np.testing.assert_allclose(phi + psi, hs.alpha, rtol=1e-15)
    assert np.all((phi == 0) | (psi == 0))
    np.testing.assert_allclose(np.abs(phi[phi != 0]), 1.0, rtol=1e-12)
