"""Diffusion-bridge sampling between a smoothed field and its sharp original.

Given endpoint fields c0 (sharp) and c1 (smooth) and a
:class:`~bfwi.schedule.NoiseSchedule`, the intermediate state at node t is
Gaussian with

    mean = (sb^2 * c0 + s^2 * c1) / (s^2 + sb^2)
    var  = s^2 * sb^2 / (s^2 + sb^2)

where (s^2, sb^2) are the accumulated variances from the two ends.
Inference walks a strictly decreasing node subgrid from n_steps to 0,
alternating a (guidance-mixed) endpoint prediction with a Gaussian
posterior step whose recursion telescopes to the marginal above, or
integrates the zero-noise transport ODE dc/dt = (beta_t / s_t^2)(c_t - c0).
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError
from .schedule import variances_at

__all__ = [
    "GaussianParams",
    "SamplingConfig",
    "Trajectory",
    "node_subgrid",
    "sb_posterior",
    "sample_bridge_point",
    "ddpm_posterior_step",
    "guided_prediction",
    "sample",
    "ot_ode_trajectory",
    "save_trajectory_npy",
]

SAMPLING_MODES = ("stochastic", "deterministic_mean", "ot_ode")


@dataclass(frozen=True)
class GaussianParams:
    """Isotropic Gaussian over a field: per-entry mean, shared scalar variance."""

    mean: np.ndarray
    var: float


@dataclass(frozen=True)
class SamplingConfig:
    """Inference controls: evaluation count, mode, guidance weight, seed.

    ``nfe`` counts denoiser iterations (the node subgrid has nfe + 1
    nodes); a guidance weight strictly inside (0, 1) doubles the raw
    network calls per iteration.
    """

    nfe: int
    mode: str = "deterministic_mean"
    guidance_eta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.nfe < 1:
            raise ParameterError(f"nfe must be >= 1, got {self.nfe}")
        if self.mode not in SAMPLING_MODES:
            raise ParameterError(
                f"mode must be one of {SAMPLING_MODES}, got {self.mode!r}"
            )

    @classmethod
    def from_json(cls, doc):
        """Parse from a JSON object/string with keys nfe, mode, eta, seed."""
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        known = {"nfe", "mode", "eta", "seed"}
        unknown = set(doc) - known
        if unknown:
            raise ParameterError(f"unknown sampling config keys: {sorted(unknown)}")
        if "nfe" not in doc:
            raise ParameterError("sampling config requires 'nfe'")
        if "seed" not in doc:
            raise ParameterError("sampling config requires an explicit 'seed'")
        return cls(
            nfe=int(doc["nfe"]),
            mode=doc.get("mode", "deterministic_mean"),
            guidance_eta=float(doc.get("eta", 1.0)),
            seed=int(doc["seed"]),
        )

    def to_json_dict(self):
        return {
            "nfe": self.nfe,
            "mode": self.mode,
            "eta": self.guidance_eta,
            "seed": self.seed,
        }


@dataclass
class Trajectory:
    """States visited during one inference run, newest last.

    ``states`` holds (node, field) pairs from the initial guess at node
    n_steps down to the estimate at node 0; length is nfe + 1.
    """

    states: list = field(default_factory=list)

    @property
    def nodes(self):
        return [n for n, _ in self.states]

    @property
    def final(self):
        return self.states[-1][1]


def node_subgrid(n_steps, nfe):
    """Uniformly subsample node indices from n_steps down to 0 inclusive."""
    if nfe < 1:
        raise ParameterError(f"nfe must be >= 1, got {nfe}")
    if nfe > n_steps:
        raise ParameterError(f"nfe={nfe} exceeds schedule n_steps={n_steps}")
    nodes = np.rint(np.linspace(n_steps, 0, nfe + 1)).astype(int)
    nodes[0], nodes[-1] = n_steps, 0
    if not np.all(np.diff(nodes) < 0):
        raise ParameterError(f"subgrid for nfe={nfe} is not strictly decreasing")
    return nodes


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"field shapes differ: {a.shape} vs {b.shape}")


def sb_posterior(c0, c1, node, schedule):
    """Analytic bridge marginal at a node given both endpoints.

    Collapses exactly to (c0, 0) at node 0 and (c1, 0) at node n_steps;
    the two mean weights always sum to 1.
    """
    c0 = np.asarray(c0, dtype=np.float64)
    c1 = np.asarray(c1, dtype=np.float64)
    _check_same_shape(c0, c1)
    s2, s2b = variances_at(schedule, node)
    if node == 0:
        return GaussianParams(mean=c0.copy(), var=0.0)
    if node == schedule.n_steps:
        return GaussianParams(mean=c1.copy(), var=0.0)
    denom = s2 + s2b
    w0 = s2b / denom
    w1 = s2 / denom
    return GaussianParams(mean=w0 * c0 + w1 * c1, var=s2 * s2b / denom)


def sample_bridge_point(c0, c1, node, schedule, rng):
    """Draw the bridge state at a node; exact endpoint at nodes 0 and n_steps."""
    post = sb_posterior(c0, c1, node, schedule)
    if post.var == 0.0:
        return post.mean
    return post.mean + np.sqrt(post.var) * rng.standard_normal(post.mean.shape)


def ddpm_posterior_step(c_next, c0_hat, node_next, node, schedule,
                        stochastic=False, rng=None):
    """One backward Gaussian posterior step from node_next down to node.

    With a2 = sigma2_fwd[node] and d2 = sigma2_fwd[node_next] - a2:

        mean = (d2 * c0_hat + a2 * c_next) / (a2 + d2)
        var  = a2 * d2 / (a2 + d2)

    Recursing these steps with the true c0 reproduces the analytic bridge
    marginal at every visited node.  ``stochastic=False`` returns the mean.
    """
    c_next = np.asarray(c_next, dtype=np.float64)
    c0_hat = np.asarray(c0_hat, dtype=np.float64)
    _check_same_shape(c_next, c0_hat)
    if not 0 <= node < node_next <= schedule.n_steps:
        raise ParameterError(
            f"need 0 <= node < node_next <= {schedule.n_steps}, "
            f"got node={node}, node_next={node_next}"
        )
    a2 = float(schedule.sigma2_fwd[node])
    d2 = float(schedule.sigma2_fwd[node_next]) - a2
    if a2 == 0.0:
        return c0_hat.copy()
    denom = a2 + d2
    mean = (d2 * c0_hat + a2 * c_next) / denom
    var = a2 * d2 / denom
    if not stochastic or var == 0.0:
        return mean
    if rng is None:
        raise ParameterError("stochastic stepping requires an rng")
    return mean + np.sqrt(var) * rng.standard_normal(mean.shape)


def guided_prediction(denoiser, c_t, node, d_obs, eta):
    """Guidance-weighted endpoint prediction.

    Returns eta * predict(c_t, node, d_obs) + (1 - eta) * predict(c_t,
    node, zero observation).  At the endpoints eta in {0, 1} the redundant
    network call is skipped.
    """
    if not 0.0 <= eta <= 1.0:
        warnings.warn(
            f"guidance weight {eta} outside [0, 1]: extrapolated guidance",
            stacklevel=2,
        )
    if eta == 1.0:
        return denoiser.predict(c_t, node, d_obs)
    if eta == 0.0:
        return denoiser.predict(c_t, node, None)
    cond = denoiser.predict(c_t, node, d_obs)
    uncond = denoiser.predict(c_t, node, None)
    return eta * cond + (1.0 - eta) * uncond


def sample(denoiser, c_smooth, d_obs, schedule, config):
    """Run guided bridge inference from a smoothed field.

    Initializes the state at node n_steps with ``c_smooth`` and walks the
    nfe-point subgrid, alternating :func:`guided_prediction` and
    :func:`ddpm_posterior_step`.  Bit-reproducible for a fixed config.
    """
    if config.mode == "ot_ode":
        return ot_ode_trajectory(denoiser, c_smooth, d_obs, schedule, config)
    nodes = node_subgrid(schedule.n_steps, config.nfe)
    rng = np.random.default_rng(config.seed)
    stochastic = config.mode == "stochastic"
    c = np.array(c_smooth, dtype=np.float64)
    traj = Trajectory(states=[(int(nodes[0]), c.copy())])
    for hi, lo in zip(nodes[:-1], nodes[1:]):
        c0_hat = guided_prediction(denoiser, c, int(hi), d_obs, config.guidance_eta)
        c = ddpm_posterior_step(c, c0_hat, int(hi), int(lo), schedule,
                                stochastic=stochastic, rng=rng)
        traj.states.append((int(lo), c.copy()))
    return traj


def ot_ode_trajectory(denoiser, c_smooth, d_obs, schedule, config):
    """Integrate the zero-noise transport ODE backward with explicit Euler.

    dc/dt = (beta_t / sigma2_t)(c_t - c0_hat), re-estimating c0_hat at
    each subgrid node.  The rate is singular at t = 0, where the exact
    solution contracts onto the prediction, so the final state is the last
    c0_hat rather than an Euler update.
    """
    nodes = node_subgrid(schedule.n_steps, config.nfe)
    c = np.array(c_smooth, dtype=np.float64)
    traj = Trajectory(states=[(int(nodes[0]), c.copy())])
    for hi, lo in zip(nodes[:-1], nodes[1:]):
        hi, lo = int(hi), int(lo)
        c0_hat = guided_prediction(denoiser, c, hi, d_obs, config.guidance_eta)
        if lo == 0:
            c = np.array(c0_hat, dtype=np.float64)
        else:
            dt = schedule.node_time(hi) - schedule.node_time(lo)
            rate = schedule.beta_at_node(hi) / float(schedule.sigma2_fwd[hi])
            c = c - dt * rate * (c - c0_hat)
        traj.states.append((lo, c.copy()))
    return traj


def save_trajectory_npy(trajectory, path):
    """Write the stacked trajectory states as one float32 NPY array."""
    stack = np.stack([s for _, s in trajectory.states]).astype(np.float32)
    np.save(path, stack)
    return stack.shape
