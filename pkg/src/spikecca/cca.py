"""Sample covariances and squared sample canonical correlations.

The stable path never inverts a covariance block: it orthonormalizes the row
spaces of the two data matrices and takes singular values of the product of
the bases, which equal the cosines of the principal angles between the row
spaces.  Their squares are the eigenvalues of the canonical correlation
matrix.  A direct brute-force eigensolve of the textbook matrix product is
kept as an oracle for small problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SingularityError, SpectrumRangeError
from .sampler import DataPair

#: relative eigenvalue floor below which a covariance block counts as singular
COND_THRESHOLD = 1e-10

#: numerical slack allowed outside [0, 1] before clamping
RANGE_SLACK = 1e-10


@dataclass(frozen=True)
class SampleCov:
    """Covariance blocks Sxx = X X'/n, Syy = Y Y'/n, Sxy = X Y'/n.

    The divisor is n, not n - 1; it cancels in canonical correlations.
    """

    Sxx: np.ndarray
    Syy: np.ndarray
    Sxy: np.ndarray
    divisor: int


@dataclass(frozen=True)
class EigenReport:
    """Sorted squared sample canonical correlations with shape metadata."""

    lambdas: np.ndarray
    p: int
    q: int
    n: int
    method: str

    def __post_init__(self):
        lam = np.ascontiguousarray(np.asarray(self.lambdas, dtype=float))
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)


def sample_covariances(pair: DataPair) -> SampleCov:
    """Covariance blocks of a data pair."""
    if pair.n < 2:
        raise ConfigurationError(f"need at least two samples, got n = {pair.n}")
    n = pair.n
    return SampleCov(
        Sxx=pair.X @ pair.X.T / n,
        Syy=pair.Y @ pair.Y.T / n,
        Sxy=pair.X @ pair.Y.T / n,
        divisor=n,
    )


def _clamp_spectrum(lam: np.ndarray, method: str) -> np.ndarray:
    low, high = lam.min(initial=0.0), lam.max(initial=0.0)
    if low < -RANGE_SLACK or high > 1.0 + RANGE_SLACK:
        raise SpectrumRangeError(
            f"{method} eigenvalues left [0, 1] beyond slack: min {low}, max {high}"
        )
    return np.clip(lam, 0.0, 1.0)


def _row_space_basis(M: np.ndarray, block: str) -> np.ndarray:
    """Orthonormal basis (rows) of the row space of M, with a rank guard.

    The condition check mirrors the covariance block M M'/n: it fails when the
    smallest eigenvalue drops below COND_THRESHOLD times the largest.
    """
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0 or (s[-1] / s[0]) ** 2 <= COND_THRESHOLD:
        cond = np.inf if s[-1] == 0.0 else (s[0] / s[-1]) ** 2
        raise SingularityError(block, cond)
    return vh


def squared_canonical_correlations(pair: DataPair) -> EigenReport:
    """Squared sample canonical correlations by the projection method.

    Requires p < n and q < n and numerically nonsingular covariance blocks.
    Values are clamped to [0, 1] after a small-slack check; a violation beyond
    the slack raises instead of silently clamping.
    """
    if not (pair.p < pair.n and pair.q < pair.n):
        raise ConfigurationError(
            f"need p < n and q < n, got p = {pair.p}, q = {pair.q}, n = {pair.n}"
        )
    qx = _row_space_basis(pair.X, "Sxx")
    qy = _row_space_basis(pair.Y, "Syy")
    sigma = np.linalg.svd(qx @ qy.T, compute_uv=False)
    lam = _clamp_spectrum(sigma * sigma, "stable")
    return EigenReport(lambdas=lam, p=pair.p, q=pair.q, n=pair.n, method="stable")


def brute_force_ccs(pair: DataPair) -> EigenReport:
    """Oracle: eigenvalues of the explicitly formed canonical correlation matrix.

    Forms the smaller-side product with explicit inverses, for p, q <= 64.
    """
    if max(pair.p, pair.q) > 64:
        raise ConfigurationError(
            f"brute force oracle is limited to p, q <= 64, got p = {pair.p}, q = {pair.q}"
        )
    cov = sample_covariances(pair)
    for block, mat in (("Sxx", cov.Sxx), ("Syy", cov.Syy)):
        cond = np.linalg.cond(mat)
        if not cond < 1.0 / COND_THRESHOLD:
            raise SingularityError(block, cond)
    sxx_inv = np.linalg.inv(cov.Sxx)
    syy_inv = np.linalg.inv(cov.Syy)
    if pair.q <= pair.p:
        M = syy_inv @ cov.Sxy.T @ sxx_inv @ cov.Sxy
    else:
        M = sxx_inv @ cov.Sxy @ syy_inv @ cov.Sxy.T
    eigs = np.sort(np.linalg.eigvals(M).real)[::-1]
    lam = _clamp_spectrum(eigs, "brute-force")
    return EigenReport(lambdas=lam, p=pair.p, q=pair.q, n=pair.n, method="brute-force")


def empirical_cdf(report: EigenReport, x: float) -> float:
    """Fraction of the min(p, q) eigenvalues at or below x (right continuous)."""
    count = len(report.lambdas)
    if count == 0:
        return 0.0
    return float(np.count_nonzero(report.lambdas <= x)) / count
