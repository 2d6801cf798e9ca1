"""Finite-sample determinant oracle for outlier certification.

The spiked canonical correlation matrix differs from its null counterpart by
a low-rank perturbation Delta = T Syw + Swy T' + T Syy T' built from the
latent noise W and coupling T.  An eigenvalue of the spiked matrix that is
not an eigenvalue of the null matrix must be a root of

    det(I + (1 - lam) V Phi(lam) U) = 0,

where Delta = U V is a thin factorization into k^2 + 2k columns and
Phi(lam) = (Swy Syy^{-1} Syw - lam Sww)^{-1} is the null-side resolvent.
This module builds the factors, evaluates the resolvent through a projection
split (never through explicit covariance inverses), evaluates the reduced
determinant, and compares the finite-sample matrix M_n(z) = I + (1-z) V
Phi(z) U entrywise with its deterministic limit.

Everything here needs the latent (W, T): the decomposition is a
simulation-time object, not identifiable from the data alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    NumericalError,
    ResolventSingularityError,
    UnsupportedModelError,
)
from .model import ratios_from_dims
from .rmt import f as limit_f
from .rmt import h as limit_h
from .rmt import wachter_edges
from .sampler import DataPair

_DELTA_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class PerturbationFactors:
    """Thin factors U (p x (k^2+2k)), V ((k^2+2k) x p) with Delta = U V."""

    U: np.ndarray
    V: np.ndarray
    Delta: np.ndarray


@dataclass(frozen=True)
class MnComparison:
    """Finite-sample matrix M_n(z) next to its deterministic limit M(z)."""

    finite: np.ndarray
    limit: np.ndarray

    def max_abs_diff(self) -> float:
        return float(np.max(np.abs(self.finite - self.limit)))


class DeterminantOracle:
    """Workspace caching the null-side blocks of one data pair.

    Use this class directly when evaluating the determinant or the resolvent
    at many points; the module-level functions rebuild it per call.
    """

    def __init__(self, pair: DataPair):
        if pair.latent is None:
            raise UnsupportedModelError(
                "determinant verification needs the latent (W, T) retained by "
                "the coupled sampler"
            )
        self.pair = pair
        W = pair.latent.W
        Y = pair.Y
        n = pair.n
        self.k = pair.latent.k
        self.t = np.diagonal(pair.latent.T)[: self.k].copy()
        self.S_ww = W @ W.T / n
        self.S_wy = W @ Y.T / n
        self.S_yy = Y @ Y.T / n
        # Projection split of the null resolvent argument: with Q an
        # orthonormal basis of the row space of Y, E = (W Q')(W Q')'/n and
        # H = Sww - E computed from the residual, so no inverse of Syy is
        # ever formed.
        q_basis = np.linalg.svd(Y, full_matrices=False)[2]
        A = W @ q_basis.T
        self.E = A @ A.T / n
        resid = W - A @ q_basis
        self.H = resid @ resid.T / n

    # -- factorization ----------------------------------------------------

    def factors(self) -> PerturbationFactors:
        if self.k < 1:
            raise UnsupportedModelError("factorization needs at least one spike")
        p, k, t = self.pair.p, self.k, self.t
        chi = np.outer(t, t) * self.S_yy[:k, :k]
        u_vecs = self.S_wy[:, :k]

        def unit(i: int) -> np.ndarray:
            e = np.zeros(p)
            e[i] = 1.0
            return e

        u_cols, v_rows = [], []
        for i in range(k):
            e_i = unit(i)
            u_cols += [chi[i, i] * e_i, t[i] * e_i, t[i] * u_vecs[:, i]]
            v_rows += [e_i, u_vecs[:, i], e_i]
        for i in range(k):
            for j in range(k):
                if j == i:
                    continue
                u_cols.append(chi[i, j] * unit(j))
                v_rows.append(unit(i))
        U = np.column_stack(u_cols)
        V = np.vstack(v_rows)
        delta = U @ V

        T = self.pair.latent.T
        direct = T @ self.S_wy.T + self.S_wy @ T.T + T @ self.S_yy @ T.T
        scale = max(1.0, float(np.max(np.abs(direct))))
        err = float(np.max(np.abs(delta - direct)))
        if err > _DELTA_CHECK_TOL * scale:
            raise NumericalError(
                f"factorization check failed: |UV - Delta| = {err:.3e} "
                f"exceeds {_DELTA_CHECK_TOL:.0e} relative"
            )
        return PerturbationFactors(U=U, V=V, Delta=delta)

    # -- resolvent and determinant ----------------------------------------

    def resolvent_argument(self, lam: float) -> np.ndarray:
        return (1.0 - lam) * self.E - lam * self.H

    def phi(self, lam: float) -> np.ndarray:
        arg = self.resolvent_argument(lam)
        svals = np.linalg.svd(arg, compute_uv=False)
        if svals[0] == 0.0 or svals[-1] <= 1e-10 * svals[0]:
            cond = np.inf if svals[-1] == 0.0 else svals[0] / svals[-1]
            raise ResolventSingularityError(
                "resolvent argument",
                cond,
                f"lam = {lam} is too close to a null-case eigenvalue "
                f"(condition estimate {cond:.3e})",
            )
        return np.linalg.inv(arg)

    def reduced_matrix(self, lam: float) -> np.ndarray:
        factors = self.factors()
        core = factors.V @ self.phi(lam) @ factors.U
        return np.eye(core.shape[0]) + (1.0 - lam) * core

    def normalized_det(self, lam: float) -> float:
        M = self.reduced_matrix(lam)
        norms = np.linalg.norm(M, axis=1)
        if np.any(norms == 0.0):
            return 0.0
        return float(np.linalg.det(M) / np.prod(norms))

    def limit_matrix(self, z: float) -> np.ndarray:
        """Entrywise limit of the reduced matrix at a real z beyond the bulk.

        One 3 x 3 block per spike built from f(z) and h(z) on the leading
        diagonal; the trailing rows replicate unit vectors of the leading
        sector and inherit the same first-row limits (t^2 f, t f), which sit
        below the diagonal and leave the determinant equal to the product of
        the 3 x 3 block determinants.  All remaining entries vanish.
        """
        ratios = ratios_from_dims(self.pair.p, self.pair.q, self.pair.n)
        fz = limit_f(z, ratios)
        hz = limit_h(z, ratios)
        k = self.k
        dim = k * k + 2 * k
        M = np.eye(dim)
        for i, ti in enumerate(self.t):
            block = np.array(
                [
                    [ti * ti * fz, ti * fz, 0.0],
                    [0.0, 0.0, ti * hz],
                    [ti * ti * fz, ti * fz, 0.0],
                ]
            )
            M[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] += block
        for i, ti in enumerate(self.t):
            for m in range(k - 1):
                row = 3 * k + i * (k - 1) + m
                M[row, 3 * i] += ti * ti * fz
                M[row, 3 * i + 1] += ti * fz
        return M


def build_factors(pair: DataPair) -> PerturbationFactors:
    """Assemble U, V with Delta = U V, checked against the direct formula."""
    return DeterminantOracle(pair).factors()


def phi_matrix(pair: DataPair, lam: float) -> np.ndarray:
    """Null-side resolvent Phi(lam), via the projection split of its argument."""
    return DeterminantOracle(pair).phi(lam)


def finite_n_det(pair: DataPair, lam: float) -> float:
    """det(I + (1 - lam) V Phi(lam) U), scaled by the product of row norms.

    The scaling makes "vanishes at an outlier" a scale-free statement: the
    normalized value is at most 1 in magnitude.
    """
    return DeterminantOracle(pair).normalized_det(lam)


def mn_entry_convergence(pair: DataPair, z: float) -> MnComparison:
    """Entries of M_n(z) = I + (1-z) V Phi(z) U next to their limits.

    Intended for statistical comparison across replicates at a real z beyond
    the bulk edge; see :meth:`DeterminantOracle.limit_matrix` for the limit
    structure.
    """
    z = float(z)
    oracle = DeterminantOracle(pair)
    edge = wachter_edges(ratios_from_dims(pair.p, pair.q, pair.n)).d_right
    if not z > edge:
        raise DomainError(f"need a real z beyond the bulk edge {edge}, got {z}")
    return MnComparison(finite=oracle.reduced_matrix(z), limit=oracle.limit_matrix(z))
