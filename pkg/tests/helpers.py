"""Shared builders and independent oracles for the test suite."""

from itertools import combinations

import numpy as np

from hrris_mec import ChannelSet, HrrisState


def cn(rng, *shape):
    """Circularly symmetric unit-variance complex Gaussian draw."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_channels(rng, m=4, n=6, e=2, scale=1.0):
    """Unstructured random ChannelSet (estimate equals truth, bound trivially met)."""
    h_e = scale * cn(rng, e)
    return ChannelSet(h_en=scale * cn(rng, m), h_r=scale * cn(rng, n),
                      h_e_true=h_e.copy(), h_e_est=h_e, g=scale * cn(rng, m, n))


def random_state(rng, n, n_active=None):
    """Random surface state: unit passive amplitudes, free active ones."""
    if n_active is None:
        n_active = int(rng.integers(0, n + 1))
    active = tuple(sorted(rng.choice(n, size=n_active, replace=False).tolist()))
    amps = np.ones(n)
    if active:
        amps[list(active)] = rng.uniform(0.1, 3.0, len(active))
    phases = rng.uniform(0.0, 2.0 * np.pi, n)
    return HrrisState(amps * np.exp(1j * phases), active)


def waterfill_enum_oracle(gains, budget):
    """Exhaustive-support water-filling oracle, exact for small problems.

    Every candidate support gets its stationary common water level in closed
    form; infeasible candidates are discarded and the best objective wins.
    """
    q = np.asarray(gains, dtype=float)
    k = len(q)
    best_val, best_p = 0.0, np.zeros(k)
    idx_pos = [i for i in range(k) if q[i] > 0]
    for r in range(1, len(idx_pos) + 1):
        for support in combinations(idx_pos, r):
            level = (budget + sum(1.0 / q[i] for i in support)) / r
            p = np.zeros(k)
            for i in support:
                p[i] = level - 1.0 / q[i]
            if p.min() < -1e-15:
                continue
            val = float(np.log1p(q * np.maximum(p, 0.0)).sum())
            if val > best_val:
                best_val, best_p = val, np.maximum(p, 0.0)
    return best_val, best_p


def waterfill_pg_oracle(gains, budget, iters=300_000, tol=1e-11):
    """Accelerated projected-gradient ascent on {p >= 0, sum p = budget}.

    Independent of any water-level reasoning; converges to the unique
    maximizer of the concave objective sum log(1 + gains * p).  Uses
    Nesterov momentum with restart on objective decrease and stops when the
    projected-gradient fixed-point residual falls below tol * budget.
    """
    q = np.asarray(gains, dtype=float)

    def project(p):
        # Euclidean projection onto the scaled simplex
        u = np.sort(p)[::-1]
        css = np.cumsum(u) - budget
        rho = np.nonzero(u - css / np.arange(1, len(p) + 1) > 0)[0][-1]
        theta = css[rho] / (rho + 1.0)
        return np.maximum(p - theta, 0.0)

    def value(p):
        return float(np.log1p(q * p).sum())

    step = 1.0 / max(float((q ** 2).max()), 1e-300)
    p = project(np.full(len(q), budget / len(q)))
    y = p.copy()
    momentum = 1.0
    best = value(p)
    for _ in range(iters):
        p_next = project(y + step * q / (1.0 + q * y))
        if np.abs(p_next - p).max() <= tol * max(budget, 1e-300):
            p = p_next
            break
        momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum ** 2))
        y = p_next + (momentum - 1.0) / momentum_next * (p_next - p)
        val = value(p_next)
        if val < best:  # restart the momentum when it overshoots
            y = p_next.copy()
            momentum_next = 1.0
        best = max(best, val)
        p = p_next
        momentum = momentum_next
    return value(p), p
