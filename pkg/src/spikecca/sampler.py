"""Paired Gaussian sampling under the finite-rank correlation model.

Two constructions are provided.  The coupled sampler draws noise W and a
second vector Y independently and sets X = W + T Y with a diagonal
rectangular coupling T; it retains (W, T) so the finite-sample perturbation
identities can be checked downstream.  The general sampler applies the block
square root of the joint covariance to two independent normal matrices and
also supports unit spikes (perfect correlation).

Randomness contract: a PCG64 bit generator seeded through a SeedSequence.
Per-replicate streams use the root seed with the replicate index as spawn
key, so parallel replicates are independent and order-insensitive.  Normal
variates are produced by the inverse distribution function applied to the
generator's 53-bit uniforms (exact zeros, probability 2^-53 per draw, are
lifted to 2^-55 so the map is total).  Fixing the transform keeps sampled
matrices bitwise reproducible for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError, UnsupportedModelError
from .model import ModelConfig, mixing_weights, spike_to_t

_MIN_UNIFORM = 2.0**-55


def seeded_rng(seed: int) -> np.random.Generator:
    """Root generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replicate, derived by spawn key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def standard_normal_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Matrix of i.i.d. standard normals via the inverse distribution function."""
    u = rng.random((rows, cols))
    np.maximum(u, _MIN_UNIFORM, out=u)
    return ndtri(u)


def coupling_product(T: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """T @ Y for a diagonal rectangular T, computed row by row.

    This is the arithmetic path the coupled sampler uses; reusing it makes
    reconstruction of the latent noise bitwise exact.
    """
    p, q = T.shape
    m = min(p, q)
    diag = np.diagonal(T)[:m]
    out = np.zeros((p, Y.shape[1]))
    out[:m] = diag[:, None] * Y[:m]
    return out


@dataclass(frozen=True)
class Latent:
    """Simulation-time objects of the coupled construction X = W + T Y."""

    W: np.ndarray
    T: np.ndarray
    k: int


@dataclass(frozen=True)
class DataPair:
    """Paired data matrices X (p x n) and Y (q x n), columns are samples."""

    X: np.ndarray
    Y: np.ndarray
    latent: Latent | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        Y = np.ascontiguousarray(np.asarray(self.Y, dtype=float))
        if X.ndim != 2 or Y.ndim != 2:
            raise ConfigurationError("X and Y must be two-dimensional matrices")
        if X.shape[1] != Y.shape[1]:
            raise ConfigurationError(
                f"X and Y must share the sample dimension: {X.shape} vs {Y.shape}"
            )
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def p(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.Y.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]


def _coupling_matrix(config: ModelConfig) -> np.ndarray:
    T = np.zeros((config.p, config.q))
    for i, r in enumerate(config.spikes.r):
        T[i, i] = spike_to_t(r)
    return T


def sample_coupled(config: ModelConfig, rng: np.random.Generator | None = None) -> DataPair:
    """Draw a pair via the coupled construction, retaining the latent (W, T).

    W (p x n) and Y (q x n) are independent standard normal matrices and
    X = W + T Y with T[i, i] the strength of spike i.  The population
    squared canonical correlations of this construction are exactly the
    spikes.  The stored W is the residual X - T Y, so reconstructing it from
    the pair is bitwise exact.  Unit spikes are rejected here; use
    :func:`sample_general` for those.
    """
    if any(r == 1.0 for r in config.spikes.r):
        raise UnsupportedModelError(
            "the coupled construction has no finite strength for a unit spike; "
            "sample_general handles r = 1 (the top eigenvalue is then 1 "
            "deterministically)"
        )
    if rng is None:
        rng = seeded_rng(config.seed)
    w_draw = standard_normal_matrix(rng, config.p, config.n)
    Y = standard_normal_matrix(rng, config.q, config.n)
    T = _coupling_matrix(config)
    coupled = coupling_product(T, Y)
    X = w_draw + coupled
    W = X - coupled
    return DataPair(X=X, Y=Y, latent=Latent(W=W, T=T, k=config.spikes.k))


def sample_general(config: ModelConfig, rng: np.random.Generator | None = None) -> DataPair:
    """Draw a pair through the block square root of the joint covariance.

    Stacks two independent standard normal matrices and mixes row i < k of
    each with weights (alpha_i, beta_i); rows beyond k pass through.  Unit
    spikes are supported: alpha = beta = 1/sqrt(2) makes the corresponding
    rows of X and Y identical, so the top sample eigenvalue is exactly 1.
    No latent is retained.
    """
    if rng is None:
        rng = seeded_rng(config.seed)
    W1 = standard_normal_matrix(rng, config.p, config.n)
    W2 = standard_normal_matrix(rng, config.q, config.n)
    k = config.spikes.k
    X = W1.copy()
    Y = W2.copy()
    if k:
        weights = [mixing_weights(r) for r in config.spikes.r]
        alpha = np.array([w[0] for w in weights])
        beta = np.array([w[1] for w in weights])
        X[:k] = alpha[:, None] * W1[:k] + beta[:, None] * W2[:k]
        Y[:k] = beta[:, None] * W1[:k] + alpha[:, None] * W2[:k]
    return DataPair(X=X, Y=Y, latent=None)


def subtract_means(pair: DataPair) -> DataPair:
    """Center each variable (row) at its sample mean.

    The latent is dropped: the coupled identity no longer holds exactly after
    centering.
    """
    if pair.n < 2:
        raise ConfigurationError(f"centering needs at least two samples, got n = {pair.n}")
    X = pair.X - pair.X.mean(axis=1, keepdims=True)
    Y = pair.Y - pair.Y.mean(axis=1, keepdims=True)
    return DataPair(X=X, Y=Y, latent=None)
