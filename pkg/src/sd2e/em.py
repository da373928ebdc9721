"""Unsupervised exploration: scalar linear-Gaussian state-space EM.

State: random walk z_k = z_{k-1} + w, w ~ N(0, R_w).
Observation: S_k = a * z_k + mu + v, v ~ N(0, R_v), R_v diagonal.

The E-step is a forward Kalman filter followed by a fixed-interval backward
smoother; the M-step refits the per-feature observation weights (a, mu) from
the smoothed sufficient statistics. One instance decodes one axis; X and Y
run as fully independent instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateRegressionError, InputError, NumericalError

DENOM_EPS = 1e-12


@dataclass(frozen=True)
class SSMParams:
    """Observation weights and noise/initialization of one scalar-state model."""

    a: np.ndarray            # (D,) observation gain per feature
    mu: np.ndarray           # (D,) observation offset per feature
    state_noise: float       # R_w, random-walk innovation variance
    obs_noise: np.ndarray    # (D,) diagonal of R_v
    z0: float                # initial state mean
    p0: float                # initial state variance

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        rv = np.asarray(self.obs_noise, dtype=float)
        if a.ndim != 1 or a.shape != mu.shape or a.shape != rv.shape:
            raise InputError(
                f"a/mu/obs_noise must be equal-length vectors, got {a.shape}, {mu.shape}, {rv.shape}"
            )
        if self.state_noise <= 0:
            raise InputError(f"state_noise must be > 0, got {self.state_noise}")
        if self.p0 <= 0:
            raise InputError(f"p0 must be > 0, got {self.p0}")
        if (rv <= 0).any():
            raise InputError("obs_noise diagonal must be strictly positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "obs_noise", rv)

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class Posterior:
    """Smoothed state means and variances, one entry per sample."""

    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float)
        v = np.asarray(self.variances, dtype=float)
        if m.shape != v.shape or m.ndim != 1:
            raise InputError(f"means/variances must be equal-length vectors, got {m.shape}, {v.shape}")
        if (v < 0).any():
            raise InputError("posterior variances must be nonnegative")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)


@dataclass
class EmRun:
    """Result of an EM fit plus bookkeeping counters."""

    params: SSMParams
    posterior: Posterior
    param_deltas: list
    e_steps: int = 0
    m_steps: int = 0


def default_params(dim: int, state_noise: float = 2.0, z0: float = 10.0, p0: float = 10.0) -> SSMParams:
    """All-ones weights and unit observation noise of the given width."""
    return SSMParams(
        a=np.ones(dim),
        mu=np.ones(dim),
        state_noise=state_noise,
        obs_noise=np.ones(dim),
        z0=z0,
        p0=p0,
    )


def _filter(features: np.ndarray, params: SSMParams):
    """Forward Kalman pass in information form (diagonal R_v, scalar state)."""
    k_len = features.shape[0]
    inv_rv = 1.0 / params.obs_noise
    obs_prec = float(np.dot(params.a * inv_rv, params.a))          # a' R_v^-1 a
    proj = (features - params.mu) @ (params.a * inv_rv)            # (K,)

    means_f = np.empty(k_len)
    vars_f = np.empty(k_len)
    m_pred, p_pred = params.z0, params.p0
    for k in range(k_len):
        denom = 1.0 / p_pred + obs_prec
        if not math.isfinite(denom) or denom <= 0:
            raise NumericalError(f"singular innovation covariance at sample {k}")
        p_f = 1.0 / denom
        m_f = p_f * (m_pred / p_pred + proj[k])
        means_f[k] = m_f
        vars_f[k] = p_f
        m_pred = m_f
        p_pred = p_f + params.state_noise
    return means_f, vars_f


def e_step(features: np.ndarray, params: SSMParams) -> Posterior:
    """Smoothed posterior of the scalar state given all observations.

    Forward filter then backward fixed-interval smoother; the first state's
    prior is N(z0, p0) directly (no transition before the first observation).
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != params.dim:
        raise InputError(f"features must be K x {params.dim}, got {features.shape}")
    if features.shape[0] < 1:
        raise InputError("need at least one sample")

    means_f, vars_f = _filter(features, params)
    k_len = features.shape[0]
    means_s = np.empty(k_len)
    vars_s = np.empty(k_len)
    means_s[-1] = means_f[-1]
    vars_s[-1] = vars_f[-1]
    for k in range(k_len - 2, -1, -1):
        p_pred = vars_f[k] + params.state_noise
        gain = vars_f[k] / p_pred
        means_s[k] = means_f[k] + gain * (means_s[k + 1] - means_f[k])
        vars_s[k] = vars_f[k] + gain * gain * (vars_s[k + 1] - p_pred)
    return Posterior(means=means_s, variances=np.maximum(vars_s, 0.0))


def m_step(features: np.ndarray, posterior: Posterior, variant: str = "ols"):
    """Refit (a, mu) per feature column from the smoothed statistics.

    variant "ols" uses the standard weighted least-squares normal-equation
    denominator K*sum(z^2 + P) - (sum z)^2; variant "paper" uses
    sum(z^2 + P) - sum z, which is dimensionally odd and vanishes on trivially
    solvable instances but is kept for fidelity experiments.
    """
    features = np.asarray(features, dtype=float)
    z = posterior.means
    p = posterior.variances
    k_len = features.shape[0]
    if z.shape[0] != k_len:
        raise InputError(f"posterior length {z.shape[0]} != feature rows {k_len}")
    if k_len < 2:
        raise InputError("need at least 2 samples for the weight update")
    if variant not in ("ols", "paper"):
        raise InputError(f"unknown denominator variant {variant!r}")

    sum_z = z.sum()
    sum_zz = float(z @ z + p.sum())
    sum_s = features.sum(axis=0)
    sum_sz = features.T @ z

    if variant == "ols":
        denom = k_len * sum_zz - sum_z * sum_z
    else:
        denom = sum_zz - sum_z
    if abs(denom) < DENOM_EPS:
        raise DegenerateRegressionError(variant, denom)

    a = (k_len * sum_sz - sum_z * sum_s) / denom
    mu = (sum_s - a * sum_z) / k_len
    return a, mu


def set_weights(params: SSMParams, a_new: np.ndarray, mu_new: np.ndarray) -> SSMParams:
    """Replace the observation weights, leaving noise/initialization untouched."""
    a_new = np.asarray(a_new, dtype=float)
    mu_new = np.asarray(mu_new, dtype=float)
    if a_new.shape != (params.dim,) or mu_new.shape != (params.dim,):
        raise InputError(
            f"weight dimension mismatch: expected ({params.dim},), got {a_new.shape}/{mu_new.shape}"
        )
    return replace(params, a=a_new, mu=mu_new)


def run_em(features: np.ndarray, init: SSMParams, iterations: int, variant: str = "ols") -> EmRun:
    """Alternate e_step/m_step for a fixed number of rounds.

    Deterministic: identical inputs give bit-identical outputs. The recorded
    param_deltas hold the L2 change of (a, mu) per iteration.
    """
    if iterations < 1:
        raise InputError(f"iterations must be >= 1, got {iterations}")
    params = init
    posterior = None
    deltas = []
    e_count = m_count = 0
    for it in range(iterations):
        try:
            posterior = e_step(features, params)
            e_count += 1
            a_new, mu_new = m_step(features, posterior, variant=variant)
            m_count += 1
        except NumericalError as exc:
            raise NumericalError(f"EM failed at iteration {it}: {exc}") from exc
        deltas.append(
            float(np.sqrt(np.sum((a_new - params.a) ** 2) + np.sum((mu_new - params.mu) ** 2)))
        )
        params = set_weights(params, a_new, mu_new)
    return EmRun(params=params, posterior=posterior, param_deltas=deltas, e_steps=e_count, m_steps=m_count)
