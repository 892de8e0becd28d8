"""Reconstruction quality metrics and batch evaluation.

MAE and MSE are plain per-pixel means.  SSIM uses the canonical
windowed form: 11x11 Gaussian weights (sigma = 1.5), K1 = 0.01,
K2 = 0.03, symmetric boundary extension, no sample-covariance
correction.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ParameterError, ShapeError

__all__ = ["MetricReport", "mae", "mse", "ssim", "evaluate"]

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"field shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mae(a, b):
    """Mean absolute per-pixel difference."""
    a, b = _check_pair(a, b)
    return float(np.mean(np.abs(a - b)))


def mse(a, b):
    """Mean squared per-pixel difference."""
    a, b = _check_pair(a, b)
    return float(np.mean((a - b) ** 2))


def _gaussian_window(size, sigma):
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    w = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


def _windowed_mean(img, w):
    out = correlate1d(img, w, axis=-2, mode="reflect")
    return correlate1d(out, w, axis=-1, mode="reflect")


def ssim(a, b, data_range=2.0):
    """Mean local structural similarity over the last two axes."""
    a, b = _check_pair(a, b)
    if data_range <= 0:
        raise ParameterError(f"data_range must be positive, got {data_range}")
    w = _gaussian_window(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = (_SSIM_K1 * data_range) ** 2
    c2 = (_SSIM_K2 * data_range) ** 2

    mu_a = _windowed_mean(a, w)
    mu_b = _windowed_mean(b, w)
    var_a = _windowed_mean(a * a, w) - mu_a ** 2
    var_b = _windowed_mean(b * b, w) - mu_b ** 2
    cov = _windowed_mean(a * b, w) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


@dataclass
class MetricReport:
    """Per-record metrics with aggregate means and standard errors."""

    per_record_mae: np.ndarray
    per_record_mse: np.ndarray
    per_record_ssim: np.ndarray
    config_echo: dict = field(default_factory=dict)

    @property
    def count(self):
        return len(self.per_record_mae)

    def _agg(self, values):
        values = np.asarray(values, dtype=np.float64)
        n = len(values)
        se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return float(values.mean()), se

    @property
    def mae_mean_se(self):
        return self._agg(self.per_record_mae)

    @property
    def mse_mean_se(self):
        return self._agg(self.per_record_mse)

    @property
    def ssim_mean_se(self):
        return self._agg(self.per_record_ssim)

    def row(self):
        """Flat dict for CSV emission."""
        out = dict(self.config_echo)
        for name in ("mae", "mse", "ssim"):
            mean, se = self._agg(getattr(self, f"per_record_{name}"))
            out[name] = mean
            out[f"{name}_se"] = se
        out["count"] = self.count
        return out


def evaluate(estimator, references, smoothed, observations, configs,
             data_range=2.0, seed_repeats=1):
    """Score an estimator over a validation set for each sampling config.

    ``estimator(c_smooth, d_obs, config, repeat)`` must return the
    reconstructed fields for a batch; it is called once per (config,
    repeat).  With ``seed_repeats`` > 1 the metrics are averaged over
    repeats per record before aggregation (the stochastic protocol).
    """
    references = np.asarray(references, dtype=np.float64)
    n = references.shape[0]
    if n == 0:
        raise ParameterError("validation split is empty")
    reports = []
    for config in configs:
        acc = np.zeros((3, n), dtype=np.float64)
        for rep in range(seed_repeats):
            estimates = np.asarray(
                estimator(smoothed, observations, config, rep), dtype=np.float64
            )
            if estimates.shape != references.shape:
                raise ShapeError(
                    f"estimator returned {estimates.shape}, "
                    f"references are {references.shape}"
                )
            for i in range(n):
                acc[0, i] += mae(estimates[i], references[i])
                acc[1, i] += mse(estimates[i], references[i])
                acc[2, i] += ssim(estimates[i], references[i], data_range)
        acc /= seed_repeats
        echo = config.to_json_dict() if hasattr(config, "to_json_dict") else dict(config)
        echo["seed_repeats"] = seed_repeats
        reports.append(
            MetricReport(
                per_record_mae=acc[0],
                per_record_mse=acc[1],
                per_record_ssim=acc[2],
                config_echo=echo,
            )
        )
    return reports
