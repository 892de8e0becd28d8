"""Procedural velocity models and the blur/noise distortion operator.

Model families mimic common synthetic-benchmark archetypes: flat or
gently curved layer stacks with velocity increasing downward, faulted
variants with dip-slip offsets, and smoothed random-texture fields.  The
distortion operator turns a sharp normalized model c0 into an initial
guess c1 = blur_k(gamma * z + (1 - gamma) * c0) with z standard normal,
k drawn from an integer range and gamma from a real range.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d, gaussian_filter

from .errors import ParameterError

__all__ = [
    "ModelFamily",
    "DistortionParams",
    "FAMILY_PRESETS",
    "OOD_HEAVY_BLUR",
    "OOD_LIGHT_BLUR",
    "generate_velocity",
    "gaussian_blur",
    "distort",
]

FAMILY_KINDS = ("flat_layers", "curved_layers", "flat_fault", "curved_fault",
                "style_like")


@dataclass(frozen=True)
class ModelFamily:
    """Generation recipe for one family of velocity models."""

    kind: str
    layer_count_range: tuple = (2, 8)
    velocity_range: tuple = (1500.0, 4500.0)
    curvature_amplitude: float = 6.0
    fault_throw_range: tuple = (4, 12)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ParameterError(f"kind must be one of {FAMILY_KINDS}, got {self.kind!r}")
        lo, hi = self.layer_count_range
        if not (1 <= lo <= hi):
            raise ParameterError(f"bad layer_count_range {self.layer_count_range}")
        v_lo, v_hi = self.velocity_range
        if not (0 < v_lo <= v_hi):
            raise ParameterError(f"bad velocity_range {self.velocity_range}")
        t_lo, t_hi = self.fault_throw_range
        if not (0 <= t_lo <= t_hi):
            raise ParameterError(f"bad fault_throw_range {self.fault_throw_range}")


FAMILY_PRESETS = {
    "flatvel": ModelFamily(kind="flat_layers"),
    "curvevel": ModelFamily(kind="curved_layers"),
    "flatfault": ModelFamily(kind="flat_fault"),
    "curvefault": ModelFamily(kind="curved_fault"),
    "stylelike": ModelFamily(kind="style_like"),
}


@dataclass(frozen=True)
class DistortionParams:
    """Blur kernel and noise-mixing draws for the initial-guess operator."""

    kernel_size_range: tuple = (8, 16)
    gamma_range: tuple = (0.0, 0.2)
    padding: str = "replicate"

    def __post_init__(self):
        k_lo, k_hi = self.kernel_size_range
        if not (0 <= k_lo <= k_hi):
            raise ParameterError(f"bad kernel_size_range {self.kernel_size_range}")
        g_lo, g_hi = self.gamma_range
        if not (0.0 <= g_lo <= g_hi <= 1.0):
            raise ParameterError(f"bad gamma_range {self.gamma_range}")
        if self.padding != "replicate":
            raise ParameterError(f"only replicate padding is supported, got {self.padding!r}")


# out-of-distribution presets for the robustness study
OOD_HEAVY_BLUR = DistortionParams(kernel_size_range=(16, 24))
OOD_LIGHT_BLUR = DistortionParams(kernel_size_range=(0, 8))


def _layer_velocities(family, n_layers, rng):
    """Per-layer velocities, non-decreasing with depth after jitter."""
    v_lo, v_hi = family.velocity_range
    vels = np.sort(rng.uniform(v_lo, v_hi, n_layers))
    jitter = rng.uniform(-0.02, 0.02, n_layers) * (v_hi - v_lo)
    return np.clip(np.sort(vels + jitter), v_lo, v_hi)


def _interface_rows(h, n_layers, rng):
    """Distinct interior rows separating the layers, shallow to deep."""
    if n_layers == 1:
        return np.empty(0, dtype=int)
    margin = max(2, h // 16)
    rows = rng.choice(np.arange(margin, h - margin), size=n_layers - 1, replace=False)
    return np.sort(rows)


def _curved_interfaces(base_rows, w, amplitude, rng):
    """Perturb each flat interface with up to three smooth sinusoids."""
    x = np.arange(w, dtype=np.float64) / w
    curves = np.empty((len(base_rows), w), dtype=np.float64)
    for i, row in enumerate(base_rows):
        n_waves = rng.integers(1, 4)
        amps = rng.uniform(0.0, 1.0, n_waves)
        amps *= amplitude / max(amps.sum(), 1e-12) * rng.uniform(0.3, 1.0)
        wobble = np.zeros(w)
        for a in amps:
            freq = rng.uniform(0.5, 2.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            wobble += a * np.sin(2.0 * np.pi * freq * x + phase)
        curves[i] = row + wobble
    return curves


def _fill_layers(h, w, iface_curves, vels):
    """Assign per-cell layer indices from (possibly curved) interfaces."""
    rows = np.arange(h, dtype=np.float64)[:, None]
    layer_idx = np.zeros((h, w), dtype=int)
    for curve in iface_curves:
        layer_idx += rows >= curve[None, :]
    return vels[layer_idx]


def _apply_faults(field, family, rng):
    """Shift one flank of one or two dipping planes vertically."""
    h, w = field.shape
    out = field.copy()
    for _ in range(int(rng.integers(1, 3))):
        throw = int(rng.integers(family.fault_throw_range[0],
                                 family.fault_throw_range[1] + 1))
        x0 = rng.uniform(0.25 * w, 0.75 * w)
        slope = rng.uniform(-0.7, 0.7)
        sign = 1 if rng.random() < 0.5 else -1
        rows = np.arange(h)[:, None]
        cols = np.arange(w)[None, :]
        mask = cols > x0 + slope * rows
        src_rows = np.clip(rows - sign * throw, 0, h - 1)
        shifted = out[src_rows[:, 0], :]
        out = np.where(mask, shifted, out)
    return out


def generate_velocity(family, grid, rng):
    """Draw one velocity model of the given family on an (H, W) grid."""
    h, w = grid
    if h < 16 or w < 16:
        raise ParameterError(f"grid must be at least 16 x 16, got {grid}")
    v_lo, v_hi = family.velocity_range

    if family.kind == "style_like":
        noise = rng.standard_normal((h, w))
        smooth = gaussian_filter(noise, sigma=rng.uniform(2.0, 6.0), mode="nearest")
        lo, hi = smooth.min(), smooth.max()
        values = v_lo + (smooth - lo) / max(hi - lo, 1e-12) * (v_hi - v_lo)
        return np.clip(values, v_lo, v_hi)

    n_layers = int(rng.integers(family.layer_count_range[0],
                                family.layer_count_range[1] + 1))
    vels = _layer_velocities(family, n_layers, rng)
    base_rows = _interface_rows(h, n_layers, rng)

    if family.kind in ("curved_layers", "curved_fault"):
        curves = _curved_interfaces(base_rows, w, family.curvature_amplitude, rng)
    else:
        curves = base_rows[:, None] * np.ones((1, w))

    values = _fill_layers(h, w, curves, vels)
    if family.kind in ("flat_fault", "curved_fault"):
        values = _apply_faults(values, family, rng)
    return np.clip(values, v_lo, v_hi)


def blur_sigma(kernel_size):
    """Kernel-size-to-sigma map of the common separable-filter convention."""
    return 0.3 * ((kernel_size - 1) / 2.0 - 1.0) + 0.8


def gaussian_blur(field, kernel_size):
    """Separable normalized Gaussian blur with replicate padding.

    Even kernel sizes are incremented to the next odd size; size 1 is the
    identity.  Constants are preserved exactly up to rounding because the
    kernel sums to 1 and the padding replicates edges.
    """
    if kernel_size < 1:
        raise ParameterError(f"kernel size must be >= 1, got {kernel_size}")
    k = int(kernel_size)
    if k % 2 == 0:
        k += 1
    if k == 1:
        return np.asarray(field, dtype=np.float64).copy()
    sigma = blur_sigma(k)
    x = np.arange(k, dtype=np.float64) - (k - 1) / 2.0
    kernel = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    kernel /= kernel.sum()
    out = correlate1d(np.asarray(field, dtype=np.float64), kernel, axis=-2,
                      mode="nearest")
    return correlate1d(out, kernel, axis=-1, mode="nearest")


def distort(c0, params, rng):
    """Draw (k, gamma) and produce the smoothed initial guess.

    ``c0`` must be normalized to [-1, 1].  Returns (c1, k, gamma); k = 0
    draws are treated as the identity kernel size 1.
    """
    c0 = np.asarray(c0, dtype=np.float64)
    if np.abs(c0).max() > 1.0 + 1e-9:
        raise ParameterError("distort expects a field normalized to [-1, 1]")
    k_lo, k_hi = params.kernel_size_range
    k = int(rng.integers(k_lo, k_hi + 1))
    gamma = float(rng.uniform(*params.gamma_range))
    mix = gamma * rng.standard_normal(c0.shape) + (1.0 - gamma) * c0
    return gaussian_blur(mix, max(k, 1)), k, gamma
