# encoding: utf-8
import logging
import math

import numpy as np
from scipy.special import logsumexp

from pyaud.errors import ConfigError, DimensionMismatch

__all__ = ["GaussianMixture", "log_emission", "variance_floor_for"]

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
MIN_VARIANCE_FLOOR = 1e-6


def variance_floor_for(frames, scale=1e-3):
    """Per dimension floor: scale times the global variance."""
    frames = np.asarray(frames, dtype=np.float64)
    if len(frames) == 0:
        raise ConfigError("Cannot derive a variance floor from no frames.")
    return np.maximum(scale * frames.var(axis=0), MIN_VARIANCE_FLOOR)


class GaussianMixture(object):
    """Diagonal covariance Gaussian mixture.

    weights: M vector on the simplex, means and variances: M x D.
    """

    def __init__(self, weights, means, variances):
        super(GaussianMixture, self).__init__()
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        variances = np.atleast_2d(np.asarray(variances, dtype=np.float64))
        if means.shape != variances.shape or means.shape[0] != len(weights):
            raise ConfigError("Inconsistent mixture parameter shapes.")
        if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
            raise ConfigError("Mixture weights must lie on the simplex.")
        if np.any(variances <= 0) or not np.all(np.isfinite(means)):
            raise ConfigError("Mixture variances must be positive.")
        self.weights = weights
        self.means = means
        self.variances = variances
        with np.errstate(divide="ignore"):
            self._log_weights = np.log(weights)
        self._log_norm = -0.5 * (LOG_2PI * means.shape[1] + np.log(variances).sum(axis=1))

    @classmethod
    def from_frames(cls, frames, variance_floor):
        frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
        mean = frames.mean(axis=0)
        var = np.maximum(frames.var(axis=0), variance_floor)
        return cls([1.0], mean[None, :], var[None, :])

    @property
    def n_components(self):
        return len(self.weights)

    @property
    def dim(self):
        return self.means.shape[1]

    def component_log_densities(self, frames):
        """T x M matrix of log w_m + log N(x_t; mu_m, var_m)."""
        frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
        if frames.shape[1] != self.dim:
            msg = "Frame dimension {0} does not match mixture dimension {1}."
            raise DimensionMismatch(msg.format(frames.shape[1], self.dim))
        diff = frames[:, None, :] - self.means[None, :, :]
        mahal = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        return self._log_weights[None, :] + self._log_norm[None, :] - 0.5 * mahal

    def log_likelihoods(self, frames):
        return logsumexp(self.component_log_densities(frames), axis=1)

    def responsibilities(self, frames):
        comp = self.component_log_densities(frames)
        return np.exp(comp - logsumexp(comp, axis=1, keepdims=True))

    def split(self, perturbation=0.2):
        """Twice the components, each mean moved by +/- perturbation * std."""
        offset = perturbation * np.sqrt(self.variances)
        return GaussianMixture(
            np.concatenate([self.weights, self.weights]) * 0.5,
            np.vstack([self.means - offset, self.means + offset]),
            np.vstack([self.variances, self.variances]),
        )

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["weights"], data["means"], data["variances"])

    def __eq__(self, other):
        return (
            isinstance(other, GaussianMixture)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.variances, other.variances)
        )

    def __repr__(self):
        return "<GaussianMixture M: {0} D: {1}>".format(self.n_components, self.dim)


def log_emission(g, frame):
    frame = np.asarray(frame, dtype=np.float64).reshape(-1)
    if len(frame) != g.dim:
        msg = "Frame dimension {0} does not match mixture dimension {1}."
        raise DimensionMismatch(msg.format(len(frame), g.dim))
    return float(g.log_likelihoods(frame[None, :])[0])
