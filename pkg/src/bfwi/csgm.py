"""Conditional score-model baseline: VP corruption and deterministic DDIM.

The baseline corrupts toward a standard Gaussian with a cosine
retention schedule, predicts the clean field at every iteration, and
steps deterministically (zero-noise DDIM).  Conditioning stacks the
seismogram channels and the smoothed model along the channel axis.
"""

from dataclasses import dataclass, field

import numpy as np

from .bridge import node_subgrid
from .errors import ParameterError, ShapeError
from .schedule import CosineAlphaBar

__all__ = ["CsgmState", "vp_forward_sample", "ddim_step", "csgm_sample"]


@dataclass(frozen=True)
class CsgmState:
    """Baseline sampler state: retention coefficients plus conditioning layout."""

    alpha_bar: CosineAlphaBar
    cond_layout: dict = field(
        default_factory=lambda: {"seismogram_channels": 5, "smooth_model_channels": 1}
    )

    def __post_init__(self):
        seis = self.cond_layout.get("seismogram_channels")
        smooth = self.cond_layout.get("smooth_model_channels")
        if seis is None or smooth != 1:
            raise ParameterError(
                "cond_layout must give seismogram_channels and one smooth-model "
                f"channel, got {self.cond_layout}"
            )

    @property
    def n_steps(self):
        return self.alpha_bar.n_steps

    @property
    def cond_channels(self):
        return int(self.cond_layout["seismogram_channels"]) + 1


def _ab(state, node):
    if not 0 <= node <= state.n_steps:
        raise IndexError(f"node {node} outside grid [0, {state.n_steps}]")
    return float(state.alpha_bar.alpha_bar[node])


def vp_forward_sample(c0, node, state, rng):
    """Corrupt c0 to node t: sqrt(ab) * c0 + sqrt(1 - ab) * z."""
    c0 = np.asarray(c0, dtype=np.float64)
    ab = _ab(state, node)
    z = rng.standard_normal(c0.shape)
    return np.sqrt(ab) * c0 + np.sqrt(1.0 - ab) * z


def ddim_step(c_next, c0_hat, node_next, node, state):
    """Deterministic DDIM update from node_next down to node.

    The noise direction is recovered algebraically from the predicted
    clean field, then re-applied at the target retention level:

        eps  = (c_next - sqrt(ab_next) * c0_hat) / sqrt(1 - ab_next)
        out  = sqrt(ab) * c0_hat + sqrt(1 - ab) * eps
    """
    c_next = np.asarray(c_next, dtype=np.float64)
    c0_hat = np.asarray(c0_hat, dtype=np.float64)
    if c_next.shape != c0_hat.shape:
        raise ShapeError(f"field shapes differ: {c_next.shape} vs {c0_hat.shape}")
    if not node < node_next:
        raise ParameterError(f"need node < node_next, got {node}, {node_next}")
    ab_next = _ab(state, node_next)
    ab = _ab(state, node)
    if ab_next >= 1.0:
        # no noise to recover a direction from
        return c0_hat.copy()
    eps = (c_next - np.sqrt(ab_next) * c0_hat) / np.sqrt(1.0 - ab_next)
    return np.sqrt(ab) * c0_hat + np.sqrt(1.0 - ab) * eps


def csgm_sample(denoiser, d_obs, c_smooth, state, config):
    """Deterministic baseline inference from pure noise.

    The initial state is a standard Gaussian draw regardless of the
    smoothed model, which enters only through the conditioning channels
    [d_obs, c_smooth].  Walks the uniform node subgrid with c0 prediction
    followed by :func:`ddim_step`; returns the final field.
    """
    c_smooth = np.asarray(c_smooth, dtype=np.float64)
    d_obs = np.asarray(d_obs, dtype=np.float64)
    cond = np.concatenate([d_obs, c_smooth], axis=-3)
    if cond.shape[-3] != state.cond_channels:
        raise ShapeError(
            f"conditioning stack has {cond.shape[-3]} channels, "
            f"layout expects {state.cond_channels}"
        )
    rng = np.random.default_rng(config.seed)
    nodes = node_subgrid(state.n_steps, config.nfe)
    c = rng.standard_normal(c_smooth.shape)
    for hi, lo in zip(nodes[:-1], nodes[1:]):
        c0_hat = denoiser.predict(c, int(hi), cond)
        c = ddim_step(c, c0_hat, int(hi), int(lo), state)
    return c
