"""Quasi-static channel synthesis: path loss, Rician fading, bounded CSI error.

One 64-bit seed fully determines a :class:`ChannelSet` for a given scenario.
The per-trial stream is split into named substreams (fading, csi-error,
phase-init) so that every solver mode evaluated within a trial sees the same
channel realization while keeping its own initialization noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import MIN_LINK_DISTANCE_M, MODES, Scenario, db_to_linear, link_distances

_FADING_KEY = 0
_CSI_ERROR_KEY = 1
_PHASE_INIT_KEY = 2


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of every link, plus the receiver-side estimate of the
    eavesdropper channel.  h_e_true deviates from h_e_est by at most the
    configured relative error bound, by construction."""

    h_en: np.ndarray   # user -> edge node, (M,)
    h_r: np.ndarray    # user -> surface, (N,)
    h_e_true: np.ndarray  # user -> eavesdropper, (E,)
    h_e_est: np.ndarray   # estimate available to the edge node, (E,)
    g: np.ndarray      # surface -> edge node, (M, N)


def path_loss(d_m, beta0_db, eta):
    """Power-law gain beta0 * (d / 1 m)^-eta, with beta0 given in dB."""
    return db_to_linear(beta0_db) * d_m ** (-eta)


def steering_ula(count, angle):
    """Array response of a half-wavelength ULA toward ``angle`` off boresight."""
    return np.exp(1j * np.pi * np.arange(count) * math.sin(angle))


def steering_upa(rows, cols, azimuth, elevation):
    """Array response of a rows x cols half-wavelength planar array.

    The row factor carries the elevation phase, the column factor the
    azimuth phase scaled by cos(elevation); the result is their Kronecker
    product, so rows=1 reduces to a plain ULA along the columns.
    """
    row = np.exp(1j * np.pi * np.arange(rows) * math.sin(elevation))
    col = np.exp(1j * np.pi * np.arange(cols) * math.sin(azimuth) * math.cos(elevation))
    return np.kron(row, col)


def draw_rician(los_component, kappa, rng):
    """Mix a unit-modulus LoS component with unit-variance CN(0,1) scatter.

    Weights are sqrt(kappa/(1+kappa)) and sqrt(1/(1+kappa)), so every entry
    keeps unit average power for any kappa >= 0.
    """
    los = np.asarray(los_component, dtype=complex)
    nlos = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / math.sqrt(2.0)
    return math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * nlos


def substream(seed, *key):
    """Deterministic child generator of the per-trial stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def phase_init_rng(seed, mode):
    """Per-mode initialization stream; independent of which other modes run."""
    return substream(seed, _PHASE_INIT_KEY, MODES.index(mode))


def _clamped(d):
    return max(d, MIN_LINK_DISTANCE_M)


def synthesize_channels(s: Scenario, seed) -> ChannelSet:
    """Draw one quasi-static realization of all links for the given seed.

    Each link's fading comes from its own named substream (h_en, h_r,
    h_e_est, g in that key order); the estimation error of the eavesdropper
    channel comes from the csi-error substream.  Line-of-sight components
    follow the 2-D geometry: the EN ULA boresight points along +y, the
    eavesdropper ULA likewise, and the surface UPA faces the EN (elevation
    fixed at 0).
    """
    # one fading substream per link: draws for a link do not shift when an
    # unrelated dimension (say N) changes, which keeps cross-scenario
    # comparisons at the same seed maximally paired
    rng_en, rng_r, rng_e, rng_g = (substream(seed, _FADING_KEY, k) for k in range(4))
    csi = substream(seed, _CSI_ERROR_KEY)
    dist = link_distances(s)
    beta = {
        link: path_loss(_clamped(getattr(dist, link)), s.pathloss_ref_db, eta)
        for link, eta in zip(("user_en", "user_hrris", "user_eve", "hrris_en"), s.pathloss_exponents)
    }
    kappa = s.rician_factors
    m, n, e = s.m_antennas, s.n_elements, s.e_antennas
    rows, cols = s.upa_shape

    # arrival angle at a +y-boresight ULA sitting at ``at`` for a source at ``src``
    def ula_angle(at, src):
        return math.atan2(src[0] - at[0], src[1] - at[1])

    # azimuth at the surface (boresight -x, toward the EN) for a node at ``src``
    def upa_azimuth(src):
        return math.atan2(src[1], s.x_h_m - src[0])

    user = (s.x_u_m, s.y_u_m)
    en = (0.0, 0.0)
    eve = (s.x_eve_m, s.y_eve_m)

    h_en = math.sqrt(beta["user_en"]) * draw_rician(
        steering_ula(m, ula_angle(en, user)), kappa.user_en, rng_en)

    if n > 0:
        upa_user = steering_upa(rows, cols, upa_azimuth(user), 0.0)
        h_r = math.sqrt(beta["user_hrris"]) * draw_rician(upa_user, kappa.user_hrris, rng_r)
    else:
        h_r = np.zeros(0, dtype=complex)

    h_e_est = math.sqrt(beta["user_eve"]) * draw_rician(
        steering_ula(e, ula_angle(eve, user)), kappa.user_eve, rng_e)

    if n > 0:
        g_los = np.outer(steering_ula(m, ula_angle(en, (s.x_h_m, 0.0))),
                         np.conj(steering_upa(rows, cols, upa_azimuth(en), 0.0)))
        g = math.sqrt(beta["hrris_en"]) * draw_rician(g_los, kappa.hrris_en, rng_g)
    else:
        g = np.zeros((m, 0), dtype=complex)

    # true eavesdropper channel: estimate plus an error of random direction
    # and magnitude rho * eps * ||estimate||, rho uniform on [0, 1]
    est_norm = float(np.linalg.norm(h_e_est))
    if s.csi_error_bound > 0 and est_norm > 0:
        direction = csi.standard_normal(e) + 1j * csi.standard_normal(e)
        direction /= np.linalg.norm(direction)
        rho = csi.uniform()
        h_e_true = h_e_est + direction * (rho * s.csi_error_bound * est_norm)
    else:
        h_e_true = h_e_est.copy()

    return ChannelSet(h_en=h_en, h_r=h_r, h_e_true=h_e_true, h_e_est=h_e_est, g=g)
