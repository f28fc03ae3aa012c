"""Lanczos machinery: the stored-vector increasing-orders baseline and a batch solver.

Two comparison methods live here.  The increasing-orders variant keeps all
Lanczos vectors of a shifted Laplacian and augments the factorization as the
requested pair count grows; the batch method rebuilds the factorization from
scratch for every K.  The same recurrence also backs the restarted
leading-pair solver that the incremental path can plug in.

"Leading" eigenpairs are ordered by magnitude, largest |value| first.  For
the shifted operator every nontrivial eigenvalue is negative, so the leading
pairs are the most negative ones, which map back to the smallest eigenvalues
of the Laplacian via value + sigma.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .eigensolve import (
    ConvergenceError,
    EigenBasis,
    SolveResult,
    SolverConfig,
    canonical_sign,
    default_max_iters,
    kernel_basis,
)
from .graph import ComponentLabeling, LaplacianMatrix

__all__ = [
    "SymmetricOperator",
    "MatrixOperator",
    "ShiftedKernelOperator",
    "LanczosState",
    "RitzSet",
    "WorkLogRow",
    "LanczosIOResult",
    "shifted_operator",
    "operator_norm_estimate",
    "as_operator",
    "lanczos_init",
    "lanczos_extend",
    "ritz_pairs",
    "ritz_residual",
    "lanczos_io",
    "lanczos_smallest",
    "batch_smallest",
    "leading_eigenpair_lanczos",
]

BREAKDOWN_FACTOR = 1e-13
WORK_LOG_HEADER = "method,K,Z,iterations,wall_time_ms,residual"


class SymmetricOperator(Protocol):
    @property
    def n(self) -> int: ...

    def matvec(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class MatrixOperator:
    """Adapter exposing a dense or sparse symmetric matrix as an operator."""

    matrix: Any

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x


@dataclass(frozen=True)
class ShiftedKernelOperator:
    """y = L x + sigma * V_d (V_d^T x) - sigma x with V_d the kernel basis.

    For a connected graph and the plain Laplacian this is exactly
    L + (s/n) 1 1^T - s I; the kernel form extends it to disconnected graphs
    and the normalized kind.  The nontrivial spectrum is {lambda_i - sigma}
    with the kernel moved to 0.
    """

    laplacian: LaplacianMatrix
    kernel: np.ndarray
    sigma: float

    @property
    def n(self) -> int:
        return self.laplacian.n

    def matvec(self, x: np.ndarray) -> np.ndarray:
        k = self.kernel
        return self.laplacian.matrix @ x + self.sigma * (k @ (k.T @ x)) - self.sigma * x

    def project_out_basis(self, x: np.ndarray) -> np.ndarray:
        k = self.kernel
        return x - k @ (k.T @ x)


def shifted_operator(
    laplacian: LaplacianMatrix, labeling: ComponentLabeling | None = None
) -> ShiftedKernelOperator:
    base = kernel_basis(laplacian, labeling)
    return ShiftedKernelOperator(laplacian=laplacian, kernel=base.vectors, sigma=base.sigma)


def as_operator(m: Any) -> SymmetricOperator:
    if hasattr(m, "matvec") and hasattr(m, "n"):
        return m
    if isinstance(m, np.ndarray) or sp.issparse(m):
        return MatrixOperator(matrix=m)
    raise TypeError(f"cannot interpret {type(m)!r} as a symmetric operator")


def operator_norm_estimate(op: SymmetricOperator, iters: int = 50, seed: int = 0) -> float:
    """Operator-norm estimate from a fixed number of power iterations."""
    op = as_operator(op)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iters):
        y = op.matvec(x)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        estimate = norm
        x = y / norm
    return estimate


@dataclass
class LanczosState:
    """Growing Lanczos factorization Q, T of one symmetric operator.

    Q keeps every vector (full reorthogonalization on every step), T is
    stored as its diagonal ``alpha`` and off-diagonal ``beta``.  ``resid``
    carries the un-normalized next recurrence vector so extensions resume
    exactly where the last block stopped.  ``complete`` is set once Z
    reaches the space dimension.  ``matvecs`` counts operator applications.
    """

    op: SymmetricOperator
    q: np.ndarray
    alpha: list[float] = field(default_factory=list)
    beta: list[float] = field(default_factory=list)
    z: int = 0
    z_ini: int = 0
    tolerance: float = 0.0
    op_norm: float = 0.0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    resid: np.ndarray | None = None
    complete: bool = False
    matvecs: int = 0

    @property
    def n(self) -> int:
        return self.op.n

    def q_view(self) -> np.ndarray:
        return self.q[:, : self.z]

    def tridiagonal(self) -> np.ndarray:
        t = np.diag(np.asarray(self.alpha))
        if self.beta:
            off = np.asarray(self.beta)
            t += np.diag(off, 1) + np.diag(off, -1)
        return t


@dataclass(frozen=True)
class RitzSet:
    """Leading Ritz pairs of the current tridiagonal matrix.

    ``values`` are ordered by magnitude (largest first), ``vectors`` holds
    the matching eigenvectors of T as columns, ``residual_estimates[i]`` is
    |beta_{Z-1} * U[Z, i]|, the cheap residual bound of the stored T.
    """

    values: np.ndarray
    vectors: np.ndarray
    residual_estimates: np.ndarray


def _new_state(op: SymmetricOperator, rng: np.random.Generator, tolerance: float, op_norm: float) -> LanczosState:
    return LanczosState(
        op=op,
        q=np.zeros((op.n, min(32, op.n))),
        tolerance=tolerance,
        op_norm=op_norm,
        rng=rng,
    )


def _orthogonalize(vec: np.ndarray, q: np.ndarray) -> np.ndarray:
    # Two Gram-Schmidt passes keep the basis orthonormal to ~1e-15.
    for _ in range(2):
        vec = vec - q @ (q.T @ vec)
    return vec


def _install_vector(state: LanczosState, vec: np.ndarray) -> None:
    """Append a unit vector, record its diagonal entry, cache the next residual."""
    if state.z == state.q.shape[1]:
        grown = np.zeros((state.n, max(8, 2 * state.q.shape[1])))
        grown[:, : state.z] = state.q[:, : state.z]
        state.q = grown
    state.q[:, state.z] = vec
    state.z += 1
    w = state.op.matvec(vec)
    state.matvecs += 1
    state.op_norm = max(state.op_norm, float(np.linalg.norm(w)))
    state.alpha.append(float(vec @ w))
    state.resid = _orthogonalize(w, state.q_view())


def _random_orthogonal_start(state: LanczosState) -> np.ndarray | None:
    for _ in range(20):
        cand = _orthogonalize(state.rng.standard_normal(state.n), state.q_view())
        norm = np.linalg.norm(cand)
        if norm > 1e-8:
            return cand / norm
    return None


def _lanczos_step(state: LanczosState) -> bool:
    """Append one Lanczos vector; returns False once the space is exhausted."""
    if state.z >= state.n:
        state.complete = True
        return False
    if state.z == 0:
        start = _random_orthogonal_start(state)
        if start is None:
            state.complete = True
            return False
        _install_vector(state, start)
        return True
    beta = float(np.linalg.norm(state.resid))
    if beta <= BREAKDOWN_FACTOR * max(state.op_norm, 1e-300):
        # Invariant subspace found: restart with a fresh orthogonal direction.
        fresh = _random_orthogonal_start(state)
        if fresh is None:
            state.complete = True
            return False
        state.beta.append(0.0)
        _install_vector(state, fresh)
        return True
    state.beta.append(beta)
    _install_vector(state, state.resid / beta)
    return True


def lanczos_init(
    m: Any,
    z_ini: int = 20,
    seed: int = 0,
    tolerance: float | None = None,
) -> LanczosState:
    """Build the first ``z_ini`` Lanczos vectors of a symmetric operator.

    The start vector is seeded-random and full reorthogonalization runs on
    every step; a breakdown (invariant subspace) restarts the recurrence
    with a fresh random direction orthogonal to everything stored.  When no
    tolerance is given it defaults to machine epsilon times the operator
    norm, estimated by 50 power iterations.  If the space dimension is
    below ``z_ini`` the state is truncated and flagged complete.
    """
    op = as_operator(m)
    rng = np.random.default_rng(seed)
    if tolerance is None:
        op_norm = operator_norm_estimate(op, iters=50, seed=seed)
        tolerance = float(np.finfo(np.float64).eps) * op_norm
    else:
        op_norm = 0.0
    state = _new_state(op, rng, tolerance, op_norm)
    state.z_ini = z_ini
    target = min(z_ini, op.n)
    while state.z < target and _lanczos_step(state):
        pass
    if state.z >= op.n:
        state.complete = True
    return state


def lanczos_extend(state: LanczosState, z_aug: int) -> LanczosState:
    """Continue the stored recurrence by ``z_aug`` vectors (capped at n).

    The coupling off-diagonal between the old and new blocks is kept: the
    recurrence resumes from the cached residual of the last block, so Q U
    stays an eigenvector approximation of the operator.
    """
    if state.complete:
        return state
    target = min(state.z + z_aug, state.n)
    while state.z < target and _lanczos_step(state):
        pass
    if state.z >= state.n:
        state.complete = True
    return state


def ritz_pairs(state: LanczosState, k: int) -> RitzSet:
    """The k leading (largest-magnitude) eigenpairs of the tridiagonal T."""
    if k > state.z:
        raise ValueError(f"requested {k} Ritz pairs from a Z={state.z} factorization")
    alpha = np.asarray(state.alpha)
    if state.z == 1:
        values, vectors = alpha.copy(), np.ones((1, 1))
    else:
        # The plain QR driver is slower than stemr but never fails to converge.
        values, vectors = scipy.linalg.eigh_tridiagonal(
            alpha, np.asarray(state.beta), lapack_driver="stev"
        )
    order = np.argsort(-np.abs(values), kind="stable")[:k]
    values = values[order]
    vectors = vectors[:, order]
    if state.beta:
        residuals = np.abs(state.beta[-1] * vectors[-1, :])
    else:
        residuals = np.zeros(k)
    return RitzSet(values=values, vectors=vectors, residual_estimates=residuals)


def ritz_residual(state: LanczosState, rs: RitzSet, k: int) -> float:
    """|T(Z-1, Z) * U(Z, k)|: the cheap residual bound for the k-th leading pair."""
    if k > rs.values.shape[0]:
        raise ValueError(f"RitzSet holds {rs.values.shape[0]} pairs, asked for pair {k}")
    if state.z < 2:
        return 0.0
    return float(rs.residual_estimates[k - 1])


@dataclass(frozen=True)
class WorkLogRow:
    method: str
    k: int
    z: int
    iterations: int
    wall_time_ms: float
    residual: float

    def to_csv_row(self) -> str:
        return (
            f"{self.method},{self.k},{self.z},{self.iterations},"
            f"{self.wall_time_ms:.3f},{self.residual:.6e}"
        )


@dataclass(frozen=True)
class LanczosIOResult:
    values: np.ndarray
    vectors: np.ndarray
    work_log: list[WorkLogRow]
    exhausted: bool


def lanczos_io(
    m: Any,
    k_target: int,
    z_ini: int = 20,
    z_aug: int = 10,
    tolerance: float | None = None,
    seed: int = 0,
) -> LanczosIOResult:
    """Increasing-orders Lanczos: K leading pairs reusing all stored vectors.

    For each K from 1 to ``k_target`` the stored factorization is augmented
    by ``z_aug`` vectors until the K-th leading Ritz pair's residual bound
    drops under the tolerance.  Eigenvectors are Q U.  When Z reaches n
    without meeting the tolerance the exact full-space pairs are returned
    with ``exhausted`` set.
    """
    op = as_operator(m)
    if k_target > op.n:
        raise ValueError(f"k_target={k_target} exceeds the dimension {op.n}")
    state = lanczos_init(op, z_ini=z_ini, seed=seed, tolerance=tolerance)
    work_log: list[WorkLogRow] = []
    rs = ritz_pairs(state, min(1, k_target))
    for k in range(1, k_target + 1):
        t0 = time.perf_counter()
        matvecs_before = state.matvecs
        while True:
            if state.z < k:
                lanczos_extend(state, max(z_aug, k - state.z))
            rs = ritz_pairs(state, k)
            residual = ritz_residual(state, rs, k)
            if state.complete:
                residual = 0.0  # full space, pairs are exact
                break
            if residual <= state.tolerance:
                break
            lanczos_extend(state, z_aug)
        work_log.append(
            WorkLogRow(
                method="lanczos_io",
                k=k,
                z=state.z,
                iterations=state.matvecs - matvecs_before,
                wall_time_ms=(time.perf_counter() - t0) * 1e3,
                residual=residual,
            )
        )
    vectors = state.q_view() @ rs.vectors
    return LanczosIOResult(
        values=rs.values.copy(),
        vectors=vectors,
        work_log=work_log,
        exhausted=state.complete,
    )


def batch_smallest(
    laplacian: LaplacianMatrix,
    k: int,
    cfg: SolverConfig | None = None,
    labeling: ComponentLabeling | None = None,
) -> EigenBasis:
    """From-scratch solve of the K smallest eigenpairs (no reuse across calls).

    Kernel pairs come analytically from the component structure; the rest
    run the shifted-operator Lanczos loop with a fresh seeded random start
    until every wanted Ritz pair's true residual meets ``cfg.tol * sigma``.
    Output matches the incremental basis contract (ascending values,
    orthonormal columns, canonical signs).
    """
    cfg = cfg or SolverConfig()
    base = kernel_basis(laplacian, labeling)
    if not base.delta <= k <= laplacian.n:
        raise ValueError(f"k must lie in [{base.delta}, {laplacian.n}], got {k}")
    if k == base.delta:
        return base
    op = ShiftedKernelOperator(laplacian=laplacian, kernel=base.vectors, sigma=base.sigma)
    sigma = base.sigma
    wanted = k - base.delta
    accept = max(cfg.tol * sigma, 64 * float(np.finfo(np.float64).eps) * sigma * np.sqrt(op.n))
    budget = cfg.max_iters if cfg.max_iters is not None else 50 * default_max_iters(op.n)
    state = lanczos_init(
        op, z_ini=min(max(20, wanted + 5), op.n), seed=cfg.seed, tolerance=cfg.tol * sigma
    )
    while True:
        rs = ritz_pairs(state, min(wanted, state.z))
        enough = rs.values.shape[0] >= wanted
        estimate = float(np.max(rs.residual_estimates)) if enough else np.inf
        if state.complete:
            break
        if enough and estimate <= accept:
            vectors = state.q_view() @ rs.vectors
            true_res = _true_residuals(op, rs.values, vectors)
            state.matvecs += wanted
            if float(np.max(true_res)) <= accept:
                break
        if state.matvecs > budget:
            raise ConvergenceError(
                f"batch solve exceeded the {budget} mat-vec budget (residual {estimate:.3e})",
                value=float(rs.values[0] + sigma) if rs.values.size else np.nan,
                vector=state.q_view() @ rs.vectors[:, 0] if rs.values.size else np.zeros(op.n),
                iterations=state.matvecs,
                residual=estimate,
            )
        lanczos_extend(state, 10)
    rs = ritz_pairs(state, wanted)
    values = rs.values + sigma
    vectors = state.q_view() @ rs.vectors
    basis = base
    mat = laplacian.matrix
    for j in range(wanted):
        vec = vectors[:, j]
        vec = vec - basis.vectors @ (basis.vectors.T @ vec)
        vec = canonical_sign(vec / np.linalg.norm(vec))
        value = float(values[j])
        residual = float(np.linalg.norm(mat @ vec - value * vec))
        basis = basis.extended(value, vec, residual)
    return basis


def lanczos_smallest(
    laplacian: LaplacianMatrix,
    k: int,
    cfg: SolverConfig | None = None,
    labeling: ComponentLabeling | None = None,
    z_ini: int = 20,
    z_aug: int = 10,
    tolerance: float | None = None,
) -> tuple[EigenBasis, list[WorkLogRow]]:
    """Increasing-orders run assembled as an eigenbasis of the K smallest pairs.

    The shifted operator's leading pairs map back to the smallest nontrivial
    eigenpairs; the kernel pairs are reinserted analytically so values start
    with the zeros.  Ritz values within tolerance of zero would map to the
    deflation artifact at sigma and are dropped defensively.
    """
    cfg = cfg or SolverConfig()
    base = kernel_basis(laplacian, labeling)
    if not base.delta <= k <= laplacian.n:
        raise ValueError(f"k must lie in [{base.delta}, {laplacian.n}], got {k}")
    if k == base.delta:
        return base, []
    op = ShiftedKernelOperator(laplacian=laplacian, kernel=base.vectors, sigma=base.sigma)
    sigma = base.sigma
    wanted = k - base.delta
    result = lanczos_io(op, wanted, z_ini=z_ini, z_aug=z_aug, tolerance=tolerance, seed=cfg.seed)
    keep = np.abs(result.values) > 1e-8 * sigma
    values = result.values[keep] + sigma
    vectors = result.vectors[:, keep]
    if values.shape[0] < wanted:
        raise ConvergenceError(
            f"increasing-orders run produced {values.shape[0]} nontrivial pairs, wanted {wanted}",
            value=np.nan,
            vector=np.zeros(op.n),
            iterations=sum(row.iterations for row in result.work_log),
            residual=np.inf,
        )
    basis = base
    mat = laplacian.matrix
    for j in range(wanted):
        vec = vectors[:, j]
        vec = vec - basis.vectors @ (basis.vectors.T @ vec)
        vec = canonical_sign(vec / np.linalg.norm(vec))
        value = float(values[j])
        residual = float(np.linalg.norm(mat @ vec - value * vec))
        basis = basis.extended(value, vec, residual)
    return basis, result.work_log


def _true_residuals(op: SymmetricOperator, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    out = np.empty(values.shape[0])
    for j in range(values.shape[0]):
        v = vectors[:, j]
        out[j] = np.linalg.norm(op.matvec(v) - values[j] * v)
    return out


def leading_eigenpair_lanczos(op: SymmetricOperator, cfg: SolverConfig) -> SolveResult:
    """Restarted Lanczos solve for the leading (largest-|value|) eigenpair.

    Grows a Krylov factorization until the leading Ritz pair's true residual
    is under ``cfg.tol * sigma`` (or the round-off floor); when the space
    hits a cap the recurrence restarts from the current Ritz vector.
    Matches the power solver's return contract so the two are
    interchangeable behind ``SolverConfig.method``.
    """
    op = as_operator(op)
    sigma = getattr(op, "sigma", None)
    if sigma is None or sigma <= 0:
        sigma = max(operator_norm_estimate(op, seed=cfg.seed), 1e-300)
    threshold = cfg.tol * sigma
    floor = 64 * float(np.finfo(np.float64).eps) * sigma * np.sqrt(op.n)
    accept = max(threshold, floor)
    budget = cfg.max_iters if cfg.max_iters is not None else default_max_iters(op.n)
    rng = np.random.default_rng(cfg.seed)
    restart_cap = min(op.n, 350)
    start: np.ndarray | None = None
    best: tuple[float, np.ndarray, int, float] | None = None
    spent = 0
    for _restart in range(60):
        state = _new_state(op, rng, threshold, sigma)
        if start is None:
            seed_vec = rng.standard_normal(op.n)
            if hasattr(op, "project_out_basis"):
                seed_vec = op.project_out_basis(seed_vec)
            norm = float(np.linalg.norm(seed_vec))
            if norm < 1e-12:
                continue
            start = seed_vec / norm
        _install_vector(state, start)
        start = None
        last_checked = 0
        while True:
            lanczos_extend(state, 10 if state.z >= 20 else 20 - state.z)
            rs = ritz_pairs(state, 1)
            estimate = float(rs.residual_estimates[0])
            at_cap = state.z >= restart_cap
            if (estimate <= 0.5 * accept and state.z > last_checked) or state.complete or at_cap:
                last_checked = state.z
                vec = state.q_view() @ rs.vectors[:, 0]
                vec /= np.linalg.norm(vec)
                y = op.matvec(vec)
                state.matvecs += 1
                theta = float(vec @ y)
                residual = float(np.linalg.norm(y - theta * vec))
                if residual <= accept or state.complete:
                    return SolveResult(
                        value=theta,
                        vector=vec,
                        iterations=spent + state.matvecs,
                        residual=residual,
                    )
                if best is None or residual < best[3]:
                    best = (theta, vec.copy(), spent + state.matvecs, residual)
                if at_cap:
                    start = vec
                    spent += state.matvecs
                    break
            if spent + state.matvecs > budget:
                theta, vec, iters, residual = (
                    best
                    if best is not None
                    else (float(rs.values[0]), state.q_view() @ rs.vectors[:, 0], spent + state.matvecs, estimate)
                )
                raise ConvergenceError(
                    f"Lanczos leading-pair solve exceeded the {budget} mat-vec budget "
                    f"(best residual {residual:.3e})",
                    value=theta,
                    vector=vec,
                    iterations=iters,
                    residual=residual,
                )
    theta, vec, iters, residual = best if best is not None else (np.nan, np.zeros(op.n), spent, np.inf)
    raise ConvergenceError(
        "Lanczos leading-pair solve did not converge after 60 restarts",
        value=theta,
        vector=vec,
        iterations=iters,
        residual=residual,
    )
