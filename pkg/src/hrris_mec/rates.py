"""Physical-layer and latency metrics: SINR, rates, secrecy, offload delays."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scenario import ComputeParams

#: edge latency when bits are offloaded at zero secrecy rate; compares
#: greater than every finite latency so max() needs no special casing
EDGE_LATENCY_INF = math.inf


@dataclass(eq=False)
class HrrisState:
    """Surface coefficients alpha plus the (0-based) active-element index set.

    Passive elements keep unit amplitude; active ones may amplify subject to
    the power budget.  The passive/active parts have disjoint support and sum
    back to alpha.
    """

    alpha: np.ndarray
    active_set: tuple = ()

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=complex)
        self.active_set = tuple(int(i) for i in self.active_set)

    def active_part(self):
        psi = np.zeros_like(self.alpha)
        idx = list(self.active_set)
        psi[idx] = self.alpha[idx]
        return psi

    def passive_part(self):
        return self.alpha - self.active_part()


@dataclass(eq=False)
class Solution:
    """Converged design and derived metrics for one trial and one mode."""

    combiner: np.ndarray | None
    surface: HrrisState | None
    offload_bits: int
    sinr: float
    rate_en: float
    leakage_bound: float
    secrecy_rate: float
    latency_local: float
    latency_edge: float
    latency: float
    iterations: int
    converged: bool
    active_power_w: float = 0.0
    budget_exceeded: bool = False
    rate_trace: tuple = field(default_factory=tuple)


def effective_channel(cs, hs):
    """Direct plus surface-cascaded user-to-EN channel h_en + G diag(alpha) h_r."""
    return cs.h_en + cs.g @ (hs.alpha * cs.h_r)


def active_power(hs, cs, p_user, sigma2):
    """Transmit power spent by the active elements, sum of |alpha_n|^2 * xi_n
    with xi_n = sigma2 + P |h_r[n]|^2."""
    if not hs.active_set:
        return 0.0
    idx = list(hs.active_set)
    amps2 = np.abs(hs.alpha[idx]) ** 2
    xi = sigma2 + p_user * np.abs(cs.h_r[idx]) ** 2
    return float(amps2 @ xi)


def sinr(w, hs, cs, p_user, sigma2):
    """Receive SINR P |w^H h|^2 / (sigma2 w^H Q w), Q = I + G Psi Psi^H G^H.

    Invariant to nonzero complex scaling of w; raises on a zero combiner.
    """
    w = np.asarray(w, dtype=complex)
    norm2 = float(np.vdot(w, w).real)
    if norm2 == 0.0:
        raise ValueError("combiner must be nonzero")
    h = effective_channel(cs, hs)
    numerator = p_user * abs(np.vdot(w, h)) ** 2
    denom = norm2
    if hs.active_set:
        idx = list(hs.active_set)
        wg = w.conj() @ cs.g[:, idx]
        denom += float((np.abs(hs.alpha[idx]) ** 2) @ (np.abs(wg) ** 2))
    return numerator / (sigma2 * denom)


def achievable_rate(gamma, w_hz):
    """Uplink rate W log2(1 + gamma) in bits/second."""
    return w_hz * math.log2(1.0 + max(gamma, 0.0))


def leakage_bound(h_e_est, eps, p_user, sigma2_eve, w_hz):
    """Worst-case eavesdropper rate under a relative CSI error of at most eps.

    The (1 + eps)^2 factor inflates the estimated channel gain to cover every
    true channel inside the uncertainty ball.
    """
    gain = float(np.vdot(h_e_est, h_e_est).real)
    return w_hz * math.log2(1.0 + p_user * (1.0 + eps) ** 2 * gain / sigma2_eve)


def secrecy_rate(rate_en, leak):
    """Guaranteed secrecy rate, clamped at zero."""
    return max(rate_en - leak, 0.0)


def latency(ell, r_s, cp: ComputeParams):
    """Local, edge, and overall offloading latency for an ell-bit split.

    Local execution covers the remaining bits at the user CPU; the edge
    branch pays the uplink at the secrecy rate plus edge processing.  The
    overall latency is the slower branch.  Offloading anything at zero
    secrecy rate yields the infinite edge sentinel.
    """
    if not 0 <= ell <= cp.total_bits:
        raise ValueError(f"offload volume {ell} outside [0, {cp.total_bits}]")
    d_local = (cp.total_bits - ell) * cp.cycles_per_bit / cp.local_rate
    if ell == 0:
        d_edge = 0.0
    elif r_s <= 0.0:
        d_edge = EDGE_LATENCY_INF
    else:
        d_edge = ell / r_s + ell * cp.cycles_per_bit / cp.edge_rate
    return d_local, d_edge, max(d_local, d_edge)
