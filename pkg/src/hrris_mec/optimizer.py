"""Alternating optimization of combiner, surface coefficients, and offload split.

Each outer iteration solves three subproblems exactly: the combiner is the
whitened matched filter maximizing the SINR, the element phases align every
cascaded term with the direct path, and the amplitudes come either from a
per-element closed form (fixed active set) or from a top-A selection with
water-filling (dynamic active set).  The offload volume is computed once at
the end from the converged secrecy rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rates import (HrrisState, Solution, achievable_rate, active_power,
                    effective_channel, latency, leakage_bound, secrecy_rate, sinr)
from .scenario import Scenario, dbm_to_watts

#: outer loop stops when the relative rate change drops below this
REL_RATE_TOL = 1e-5
MAX_ITERATIONS = 50
#: bisection width target for the water level, relative
WATERFILL_TOL = 1e-12
#: tolerance for flagging spent amplifier power above the budget
BUDGET_SLACK = 1e-9


@dataclass(frozen=True)
class SubproblemCoefficients:
    """Constants of the 1-D amplitude subproblem for one active element.

    With x = |alpha_n|, the SINR is proportional to
    (a x^2 + b x + c) / (u x^2 + v) and the power budget caps x at
    sqrt(residual_budget / xi).  By construction a = |h_r[n]|^2 * u and
    b = 2 sqrt(a c); d = |h_r[n]|^2 * v - c may be negative.
    """

    a: float
    b: float
    c: float
    u: float
    v: float
    d: float
    xi: float
    residual_budget: float


def optimal_combiner(hs, cs, p_user, sigma2):
    """SINR-maximizing receive filter sqrt(P/sigma2) Q^-1 h.

    Q = I + G Psi Psi^H G^H is identity plus positive semidefinite, hence
    always invertible; the scale factor does not affect the SINR.
    """
    m = cs.h_en.shape[0]
    q = np.eye(m, dtype=complex)
    if hs.active_set:
        idx = list(hs.active_set)
        ga = cs.g[:, idx] * np.abs(hs.alpha[idx])
        q += ga @ ga.conj().T
    h = effective_channel(cs, hs)
    return math.sqrt(p_user / sigma2) * np.linalg.solve(q, h)


def optimal_phases(w, cs):
    """Element phases aligning every cascaded term with the direct path.

    theta[n] = arg(w^H h_en) - arg((w^H G)[n] * h_r[n]), reduced to [0, 2pi).
    After application |w^H h| equals |w^H h_en| plus the sum of the cascaded
    magnitudes.  If the direct term is exactly zero the reference phase is 0.
    """
    ref = np.vdot(w, cs.h_en)
    ref_phase = float(np.angle(ref)) if ref != 0 else 0.0
    wg = np.asarray(w).conj() @ cs.g
    return np.mod(ref_phase - np.angle(wg * cs.h_r), 2.0 * np.pi)


def subproblem_coefficients(n, w, cs, hs, p_user, sigma2, pa_max):
    """Expand the SINR as a fraction in |alpha_n| for active element n (0-based).

    Assumes the phases are already aligned, so cascaded magnitudes add; the
    amplitudes of all other elements are held fixed.
    """
    w = np.asarray(w, dtype=complex)
    wg = w.conj() @ cs.g
    cross = np.abs(hs.alpha) * np.abs(cs.h_r) * np.abs(wg)
    h_n2 = abs(cs.h_r[n]) ** 2
    u = abs(wg[n]) ** 2
    a = h_n2 * u
    aligned_rest = abs(np.vdot(w, cs.h_en)) + float(cross.sum()) - float(cross[n])
    c = aligned_rest ** 2
    b = 2.0 * abs(cs.h_r[n]) * abs(wg[n]) * aligned_rest
    others = [i for i in hs.active_set if i != n]
    amps2 = np.abs(hs.alpha[others]) ** 2 if others else np.zeros(0)
    v = float(np.vdot(w, w).real)
    if others:
        v += float(amps2 @ (np.abs(wg[others]) ** 2))
    xi_others = sigma2 + p_user * np.abs(cs.h_r[others]) ** 2 if others else np.zeros(0)
    spent = float(amps2 @ xi_others) if others else 0.0
    residual = max(pa_max - spent, 0.0)
    xi = sigma2 + p_user * h_n2
    return SubproblemCoefficients(a=a, b=b, c=c, u=u, v=v, d=h_n2 * v - c,
                                  xi=xi, residual_budget=residual)


def fixed_amplitude_update(coeff: SubproblemCoefficients):
    """Closed-form maximizer of (a x^2 + b x + c)/(u x^2 + v) on [0, cap].

    cap = sqrt(residual_budget / xi).  The unconstrained stationary point is
    d/b + sqrt((d/b)^2 + v/u); the objective rises up to it and falls after,
    so the cap simply truncates.  Degenerate cases: u = 0 makes the fraction
    monotone increasing (take the cap); b = 0 makes it monotone one way or
    the other (compare the endpoints).
    """
    cap = math.sqrt(coeff.residual_budget / coeff.xi)
    if coeff.u == 0.0:
        return cap
    if coeff.b == 0.0:
        f0 = coeff.c / coeff.v
        fcap = (coeff.a * cap * cap + coeff.c) / (coeff.u * cap * cap + coeff.v)
        return cap if fcap >= f0 else 0.0
    x = coeff.d / coeff.b
    k = coeff.v / coeff.u
    if x >= 0.0:
        interior = x + math.sqrt(x * x + k)
    else:
        # conjugate form avoids cancellation when d/b is large negative
        interior = k / (math.sqrt(x * x + k) - x)
    return min(cap, interior)


def water_fill(gains, budget):
    """Allocate ``budget`` over channels maximizing sum log(1 + gains * p).

    Returns (powers, water_level).  The water level is found by bisection on
    the monotone budget residual, then polished exactly on the identified
    support so the budget is met to machine precision.  Channels with zero
    gain receive nothing.
    """
    q = np.asarray(gains, dtype=float)
    p = np.zeros_like(q)
    pos = q > 0.0
    if budget <= 0.0 or not pos.any():
        return p, 0.0
    inv = 1.0 / q[pos]
    lo, hi = 0.0, float(inv.max()) + float(budget)
    while hi - lo > WATERFILL_TOL * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if np.maximum(mid - inv, 0.0).sum() > budget:
            hi = mid
        else:
            lo = mid
    level = 0.5 * (lo + hi)
    support = level > inv
    if support.any():
        exact = (budget + inv[support].sum()) / support.sum()
        consistent = exact >= inv[support].max() and (
            not (~support).any() or exact <= inv[~support].min() * (1.0 + 1e-9))
        if consistent:
            level = float(exact)
    p[pos] = np.maximum(level - inv, 0.0)
    return p, float(level)


@dataclass(frozen=True)
class WaterfillAllocation:
    """Dynamic-mode outcome: chosen elements, their powers, and the water level."""

    selected: tuple
    powers: np.ndarray
    water_level: float


def dynamic_select_and_allocate(w, cs, p_user, sigma2, a_budget, pa_max):
    """Pick the best elements to activate and split the amplifier budget.

    Elements are ranked by P * a_n / xi_n where a_n is the cascaded gain
    |h_r[n]|^2 |w^H g_n|^2 seen by the current combiner; ties go to the lower
    index.  Powers maximize the separable surrogate
    sum log(1 + P a_n |alpha_n|^2 / (sigma2 ||w||^2)), i.e. water-filling over
    the dimensionless per-element SINR coefficients; without the
    sigma2 ||w||^2 normalization the log would sit so deep in its linear
    region at realistic power scales that the entire budget would collapse
    onto one element regardless of the allowance A.  Amplitudes are
    max(sqrt(p_n / xi_n), 1) for selected elements (never attenuating below
    a passive element) and 1 elsewhere.  The unit clamp can push the spent
    power above the budget; callers are expected to audit and flag it.
    """
    if a_budget < 1:
        raise ValueError("a_budget must be at least 1")
    w = np.asarray(w, dtype=complex)
    wg = w.conj() @ cs.g
    a = (np.abs(cs.h_r) ** 2) * (np.abs(wg) ** 2)
    xi = sigma2 + p_user * np.abs(cs.h_r) ** 2
    ratio = p_user * a / xi
    order = np.argsort(-ratio, kind="stable")  # stable: ties keep the lower index
    selected = tuple(sorted(int(i) for i in order[:a_budget]))
    amps = np.ones(cs.h_r.shape[0])
    if not np.any(ratio[list(selected)] > 0.0):
        return amps, WaterfillAllocation(selected, np.zeros(len(selected)), 0.0)
    gains = ratio[list(selected)] / (sigma2 * float(np.vdot(w, w).real))
    powers, level = water_fill(gains, pa_max)
    amps[list(selected)] = np.maximum(np.sqrt(powers / xi[list(selected)]), 1.0)
    return amps, WaterfillAllocation(selected, powers, level)


def optimal_offload(r_s, cp):
    """Latency-minimizing number of offloaded bits for a given secrecy rate.

    The real-valued balance point equates local and edge latency; the integer
    answer is whichever neighbor of it yields the smaller overall latency.
    A zero secrecy rate forces fully local execution.
    """
    if r_s <= 0.0:
        return 0
    total = cp.total_bits
    nu = cp.cycles_per_bit
    fl, fe = cp.local_rate, cp.edge_rate
    ell_hat = total * nu * r_s * fe / (fe * fl + nu * r_s * (fe + fl))
    candidates = {min(max(int(math.floor(ell_hat)), 0), total),
                  min(max(int(math.ceil(ell_hat)), 0), total)}
    return min(candidates, key=lambda e: (latency(e, r_s, cp)[2], e))


def _initial_state(scenario, mode, rng, xi):
    """Random surface state satisfying the unit-modulus and power constraints.

    Phases are uniform on [0, 2pi); active amplitudes take random shares,
    jointly scaled so the power budget is met with equality.  Share noise is
    drawn for every element (not just the active ones) so that scenarios
    differing only in the active budget stay paired under a common seed.
    """
    n = scenario.n_elements
    phases = rng.uniform(0.0, 2.0 * np.pi, n)
    shares = rng.uniform(0.5, 1.5, n)
    amps = np.ones(n)
    if mode == "hrris_fixed":
        active = list(i - 1 for i in scenario.fixed_active_set)
        if active:
            spent = float((shares[active] ** 2) @ xi[active])
            amps[active] = shares[active] * math.sqrt(scenario.p_active_max_w / spent)
        active = tuple(active)
    else:
        # dynamic mode reselects its active set on the first iteration, so an
        # all-passive start trivially satisfies both constraints
        active = ()
    return HrrisState(amps * np.exp(1j * phases), active)


def _sweep_fixed_amplitudes(w, cs, hs, p_user, sigma2, pa_max):
    """One coordinate-ascent pass over the fixed active set, ascending index."""
    state = hs
    for n in sorted(state.active_set):
        coeff = subproblem_coefficients(n, w, cs, state, p_user, sigma2, pa_max)
        amps = np.abs(state.alpha)
        amps[n] = fixed_amplitude_update(coeff)
        state = HrrisState(amps * np.exp(1j * np.angle(state.alpha)), state.active_set)
    return state


def run_alternating(scenario: Scenario, cs, rng, mode=None) -> Solution:
    """Full alternating design for one channel realization.

    Starting from a random feasible surface state, iterate combiner, phases,
    and amplitudes until the achievable rate changes by less than REL_RATE_TOL
    relative or MAX_ITERATIONS is hit.  ris_random never updates its phases;
    ris modes keep all amplitudes at one.  The dynamic mode optimizes a
    surrogate, so the best iterate by true SINR is retained and returned.
    The offload split and latencies are computed from the final secrecy rate.
    """
    mode = scenario.mode if mode is None else mode
    p_user = scenario.user_power_w(mode)
    sigma2 = scenario.noise_power_w
    pa_max = scenario.p_active_max_w
    w_hz = scenario.bandwidth_hz
    xi = sigma2 + p_user * np.abs(cs.h_r) ** 2

    hs = _initial_state(scenario, mode, rng, xi)
    best_gamma = -1.0
    best = None
    prev_rate = None
    converged = False
    trace = []
    iterations = 0

    for iterations in range(1, MAX_ITERATIONS + 1):
        w = optimal_combiner(hs, cs, p_user, sigma2)
        if mode != "ris_random" and scenario.n_elements > 0:
            theta = optimal_phases(w, cs)
            hs = HrrisState(np.abs(hs.alpha) * np.exp(1j * theta), hs.active_set)
        if mode == "hrris_fixed":
            hs = _sweep_fixed_amplitudes(w, cs, hs, p_user, sigma2, pa_max)
        elif mode == "hrris_dynamic":
            amps, alloc = dynamic_select_and_allocate(
                w, cs, p_user, sigma2, scenario.a_active, pa_max)
            hs = HrrisState(amps * np.exp(1j * np.angle(hs.alpha)), alloc.selected)
        gamma = sinr(w, hs, cs, p_user, sigma2)
        rate = achievable_rate(gamma, w_hz)
        trace.append(rate)
        if gamma > best_gamma:
            best_gamma = gamma
            best = (w, hs)
        if prev_rate is not None and abs(rate - prev_rate) <= REL_RATE_TOL * max(prev_rate, 1e-300):
            converged = True
            break
        prev_rate = rate

    w, hs = best
    rate_en = achievable_rate(best_gamma, w_hz)
    leak = leakage_bound(cs.h_e_est, scenario.csi_error_bound, p_user,
                         scenario.eve_noise_power_w, w_hz)
    r_s = secrecy_rate(rate_en, leak)
    ell = optimal_offload(r_s, scenario.compute)
    d_local, d_edge, d = latency(ell, r_s, scenario.compute)
    p_spent = active_power(hs, cs, p_user, sigma2)
    return Solution(
        combiner=w,
        surface=hs,
        offload_bits=ell,
        sinr=best_gamma,
        rate_en=rate_en,
        leakage_bound=leak,
        secrecy_rate=r_s,
        latency_local=d_local,
        latency_edge=d_edge,
        latency=d,
        iterations=iterations,
        converged=converged,
        active_power_w=p_spent,
        budget_exceeded=p_spent > pa_max * (1.0 + BUDGET_SLACK) + 1e-15,
        rate_trace=tuple(trace),
    )
