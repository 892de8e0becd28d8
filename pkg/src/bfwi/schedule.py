"""Discrete noise schedules and their two-sided accumulated variances.

A bridge schedule discretizes a rate profile beta(t) on [0, T] into
``n_steps`` uniform steps.  ``sigma2_fwd[i]`` accumulates beta from time 0
up to grid node i and ``sigma2_bwd[i]`` from node i up to T, both by
midpoint Riemann sums, so the two sides are exactly complementary:

    sigma2_fwd[i] + sigma2_bwd[i] == sigma2_fwd[n_steps]   (up to rounding)

with sigma2_fwd[0] == 0 and sigma2_bwd[n_steps] == 0 identically.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "NoiseSchedule",
    "CosineAlphaBar",
    "make_symmetric_schedule",
    "make_cosine_alphabar",
    "variances_at",
]

ALPHA_BAR_FLOOR = 1e-5


def _frozen(arr):
    arr = np.asarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NoiseSchedule:
    """Uniform discretization of a diffusion rate on [0, T].

    ``beta[i]`` is the rate at the midpoint of step i (units 1/time);
    the variance arrays live on the n_steps + 1 grid nodes.
    """

    n_steps: int
    horizon_T: float
    beta: np.ndarray        # (n_steps,)
    sigma2_fwd: np.ndarray  # (n_steps + 1,)
    sigma2_bwd: np.ndarray  # (n_steps + 1,)

    @property
    def dt(self):
        return self.horizon_T / self.n_steps

    def node_time(self, node):
        """Physical time of grid node ``node``."""
        return node * self.dt

    def beta_at_node(self, node):
        """Instantaneous rate at a grid node (midpoint values averaged)."""
        if node <= 0:
            return float(self.beta[0])
        if node >= self.n_steps:
            return float(self.beta[-1])
        return 0.5 * float(self.beta[node - 1] + self.beta[node])


@dataclass(frozen=True)
class CosineAlphaBar:
    """Cumulative signal-retention coefficients of a VP cosine schedule."""

    n_steps: int
    alpha_bar: np.ndarray  # (n_steps + 1,), values in (0, 1]


def make_symmetric_schedule(n_steps, beta_min=1e-4, beta_max=0.3, horizon_T=1.0):
    """Build a schedule whose rate shrinks at both ends of [0, T].

    The profile is a piecewise-linear triangle: beta_min at t = 0 and
    t = T, beta_max at t = T/2, sampled at step midpoints.  Values are
    mirrored explicitly so beta[i] == beta[n_steps - 1 - i] holds bitwise.
    """
    if n_steps < 1:
        raise ParameterError(f"n_steps must be >= 1, got {n_steps}")
    if not (0.0 < beta_min <= beta_max):
        raise ParameterError(
            f"need 0 < beta_min <= beta_max, got ({beta_min}, {beta_max})"
        )
    if horizon_T <= 0.0:
        raise ParameterError(f"horizon_T must be positive, got {horizon_T}")

    beta = np.empty(n_steps, dtype=np.float64)
    half = (n_steps + 1) // 2
    idx = np.arange(half, dtype=np.float64)
    # fractional distance of each midpoint from t=0, doubled so 1.0 is T/2
    frac = 2.0 * (idx + 0.5) / n_steps
    beta[:half] = beta_min + (beta_max - beta_min) * frac
    beta[n_steps - half:] = beta[:half][::-1]

    dt = horizon_T / n_steps
    inc = beta * dt
    sigma2_fwd = np.zeros(n_steps + 1, dtype=np.float64)
    sigma2_fwd[1:] = np.cumsum(inc)
    sigma2_bwd = np.zeros(n_steps + 1, dtype=np.float64)
    sigma2_bwd[:-1] = np.cumsum(inc[::-1])[::-1]

    return NoiseSchedule(
        n_steps=int(n_steps),
        horizon_T=float(horizon_T),
        beta=_frozen(beta),
        sigma2_fwd=_frozen(sigma2_fwd),
        sigma2_bwd=_frozen(sigma2_bwd),
    )


def make_cosine_alphabar(n_steps, s_offset=0.008):
    """Cosine cumulative-retention schedule with offset ``s_offset``.

    alpha_bar[i] = cos^2(((i/n + s)/(1 + s)) * pi/2), normalized so the
    first entry is exactly 1, then floored at 1e-5.  The floor can tie the
    last few entries at n_steps ~ 1000; the sequence is non-increasing and
    strictly decreasing above the floor.
    """
    if n_steps < 1:
        raise ParameterError(f"n_steps must be >= 1, got {n_steps}")
    if s_offset < 0.0:
        raise ParameterError(f"s_offset must be >= 0, got {s_offset}")

    i = np.arange(n_steps + 1, dtype=np.float64)
    f = np.cos((i / n_steps + s_offset) / (1.0 + s_offset) * np.pi / 2.0) ** 2
    alpha_bar = np.maximum(f / f[0], ALPHA_BAR_FLOOR)
    return CosineAlphaBar(n_steps=int(n_steps), alpha_bar=_frozen(alpha_bar))


def variances_at(schedule, node):
    """Accumulated variance pair (forward, backward) at a grid node."""
    if not 0 <= node <= schedule.n_steps:
        raise IndexError(
            f"node {node} outside grid [0, {schedule.n_steps}]"
        )
    return float(schedule.sigma2_fwd[node]), float(schedule.sigma2_bwd[node])
