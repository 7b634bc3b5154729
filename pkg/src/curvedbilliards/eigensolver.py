"""Real-symmetric eigenvalue engine: dense full solves and a Lanczos
iteration with full reorthogonalization for the lowest part of large sparse
operators.

The dense path is backed by LAPACK (numpy.linalg.eigh).  The Lanczos path is
self-contained: deterministic given a seed, restartable on breakdown, with
per-pair residual certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class NonSymmetricError(ValueError):
    """Input operator is not symmetric within tolerance."""


class EigenConvergenceError(RuntimeError):
    """Iteration failed to converge within its budget."""


@dataclass
class EigenResult:
    values: np.ndarray          # ascending
    vectors: np.ndarray | None  # columns orthonormal, or None
    residuals: np.ndarray       # ||A v - lambda v|| per reported pair
    method: str
    iterations: int = 0

    def __post_init__(self):
        order = np.argsort(self.values, kind="stable")
        if not np.array_equal(order, np.arange(len(self.values))):
            self.values = self.values[order]
            self.residuals = self.residuals[order]
            if self.vectors is not None:
                self.vectors = self.vectors[:, order]


def _as_matvec(op):
    """Accept ndarray / scipy sparse / callable; return (matvec, dim)."""
    if callable(op) and not hasattr(op, "shape"):
        raise TypeError("bare callables need a dimension: use solve_lowest_k(op, k, n=dim)")
    if sp.issparse(op):
        csr = op.tocsr()
        return (lambda v: csr @ v), op.shape[0]
    arr = np.asarray(op)
    return (lambda v: arr @ v), arr.shape[0]


def solve_dense(a, compute_vectors=True, sym_tol=1e-12) -> EigenResult:
    """All eigenpairs of a dense symmetric matrix.

    Rejects input whose asymmetry exceeds sym_tol * ||A||.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    scale = np.max(np.abs(a)) if a.size else 0.0
    defect = np.max(np.abs(a - a.T)) if a.size else 0.0
    if scale > 0 and defect > sym_tol * scale:
        raise NonSymmetricError(f"asymmetry {defect:.3e} exceeds {sym_tol:.1e} * ||A||")
    if compute_vectors:
        vals, vecs = np.linalg.eigh(a)
        residuals = np.linalg.norm(a @ vecs - vecs * vals[None, :], axis=0)
    else:
        vals = np.linalg.eigvalsh(a)
        vecs = None
        residuals = np.zeros_like(vals)
    return EigenResult(values=vals, vectors=vecs, residuals=residuals, method="dense")


def _check_symmetry_stochastic(matvec, n, rng, tol=1e-10, trials=3):
    for _ in range(trials):
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        ax = matvec(x)
        ay = matvec(y)
        scale = max(np.linalg.norm(ax) * np.linalg.norm(y),
                    np.linalg.norm(ay) * np.linalg.norm(x), 1e-300)
        if abs(x @ ay - y @ ax) > tol * scale:
            raise NonSymmetricError("operator failed the stochastic symmetry probe")


def solve_lowest_k(op, k, tol=1e-8, seed=0, n=None, max_steps=None,
                   compute_vectors=True, check_every=25) -> EigenResult:
    """Lowest k eigenpairs of a symmetric operator by Lanczos iteration.

    Full reorthogonalization (two classical Gram–Schmidt sweeps per step)
    against the whole stored basis; deterministic for a given seed.  A
    reported pair satisfies ||A v - lambda v|| < tol * spread, where spread
    is the Ritz-value range seen in the final tridiagonal.  Breakdown
    triggers a restart with a fresh seed (at most 3).
    """
    if callable(op) and not hasattr(op, "shape"):
        if n is None:
            raise TypeError("dimension n required for a callable operator")
        matvec, dim = op, n
    else:
        matvec, dim = _as_matvec(op)
    if not (1 <= k <= dim):
        raise ValueError("need 1 <= k <= dim")
    if max_steps is None:
        max_steps = min(dim, max(10 * k, 600))
    max_steps = min(max_steps, dim)

    last_error = None
    for attempt in range(4):
        rng = np.random.Generator(np.random.Philox(key=seed + 1000 * attempt))
        _check_symmetry_stochastic(matvec, dim, rng)
        try:
            return _lanczos(matvec, dim, k, tol, rng, max_steps,
                            compute_vectors, check_every)
        except _LanczosBreakdown as err:
            last_error = err
            continue
    raise EigenConvergenceError(f"Lanczos broke down after 3 restarts: {last_error}")


class _LanczosBreakdown(RuntimeError):
    pass


def _lanczos(matvec, dim, k, tol, rng, max_steps, compute_vectors, check_every):
    Q = np.empty((dim, max_steps))
    alphas = np.empty(max_steps)
    betas = np.empty(max_steps)  # betas[j] links q_j and q_{j+1}

    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    Q[:, 0] = q
    beta_prev = 0.0
    q_prev = np.zeros(dim)

    m = 0
    while m < max_steps:
        u = matvec(Q[:, m])
        alphas[m] = Q[:, m] @ u
        r = u - alphas[m] * Q[:, m] - beta_prev * q_prev
        # two reorthogonalization sweeps keep the basis orthonormal to ~1e-14
        for _ in range(2):
            r -= Q[:, : m + 1] @ (Q[:, : m + 1].T @ r)
        beta = np.linalg.norm(r)
        m += 1

        converged = False
        if m >= max(k + 2, 3) and (m % check_every == 0 or m == max_steps or beta == 0.0):
            theta, S = _tridiag_eig(alphas[:m], betas[: m - 1])
            spread = max(theta[-1] - theta[0], abs(theta[-1]), 1e-300)
            resid_est = np.abs(beta * S[-1, :k])
            converged = np.all(resid_est < tol * spread)

        if converged or m == max_steps or beta == 0.0:
            if beta == 0.0 and m < k:
                raise _LanczosBreakdown(f"invariant subspace of size {m} < k")
            if not converged and m == max_steps and beta != 0.0:
                theta, S = _tridiag_eig(alphas[:m], betas[: m - 1])
                spread = max(theta[-1] - theta[0], abs(theta[-1]), 1e-300)
                resid_est = np.abs(beta * S[-1, :k])
                if not np.all(resid_est < tol * spread):
                    raise EigenConvergenceError(
                        f"lowest {k} pairs not converged after {m} Lanczos steps "
                        f"(worst residual {resid_est.max():.3e} vs "
                        f"{tol * spread:.3e}); raise max_steps")
            theta, S = _tridiag_eig(alphas[:m], betas[: m - 1])
            values = theta[:k]
            if compute_vectors:
                vectors = Q[:, :m] @ S[:, :k]
                # certified residuals on the returned vectors
                residuals = np.array([np.linalg.norm(matvec(vectors[:, i]) -
                                                     values[i] * vectors[:, i])
                                      for i in range(k)])
            else:
                vectors = None
                residuals = np.abs(beta * S[-1, :k])
            return EigenResult(values=values, vectors=vectors,
                               residuals=residuals, method="iterative",
                               iterations=m)

        betas[m - 1] = beta
        q_prev = Q[:, m - 1]
        q = r / beta
        Q[:, m] = q
        beta_prev = beta

    raise EigenConvergenceError("unreachable")


def _tridiag_eig(alphas, betas):
    from scipy.linalg import eigh_tridiagonal

    return eigh_tridiagonal(alphas, betas)
