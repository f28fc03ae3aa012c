"""Incremental smallest-eigenpair computation for graph Laplacians.

Given the K smallest eigenpairs of a Laplacian L, the (K+1)-th smallest
eigenpair is the leading (largest-magnitude) eigenpair of the deflated
operator

    y = L x + sum_{k<=K} (sigma - lambda_k) (v_k . x) v_k - sigma x,

whose spectrum is {lambda_i - sigma : i > K} together with K zeros.  The
shift sigma is the total strength s for the plain Laplacian and 2 for the
normalized one, so every remaining eigenvalue maps below zero and the
target lambda_{K+1} - sigma has the largest magnitude.  Extracting that
leading pair and adding sigma back extends the basis by one.

The built-in leading-pair solver is plain power iteration with periodic
re-orthogonalization against the deflated columns.  The solver slot is
pluggable: ``SolverConfig.method`` selects "power", "lanczos" (a restarted
Lanczos leading-pair solver, far faster when the spectral gap is small
relative to sigma), or "auto" which uses power iteration only on very small
problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .graph import ComponentLabeling, LaplacianKind, LaplacianMatrix, _components_from_csr
from .ioutil import array_from_json, array_to_json

__all__ = [
    "Eigenpair",
    "EigenBasis",
    "DeflatedOperator",
    "SolverConfig",
    "SolveResult",
    "ConvergenceError",
    "default_max_iters",
    "kernel_basis",
    "deflated_operator",
    "apply_deflated",
    "leading_eigenpair_power",
    "next_eigenpair",
    "next_eigenpair_detailed",
    "extend_to",
    "dense_oracle",
    "basis_to_json",
    "basis_from_json",
]

DENSE_ORACLE_MAX_N = 2000

# Largest problem where "auto" still uses power iteration: above this the
# default iteration budget cannot push the residual to tol*sigma because the
# relevant gaps shrink relative to sigma roughly like 1/n.
AUTO_POWER_MAX_N = 12


class ConvergenceError(RuntimeError):
    """Leading-pair solve missed the tolerance; carries the best iterate."""

    def __init__(self, message: str, value: float, vector: np.ndarray, iterations: int, residual: float):
        super().__init__(message)
        self.value = value
        self.vector = vector
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class Eigenpair:
    value: float
    vector: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the leading-eigenpair solve.

    ``max_iters=None`` resolves to ``default_max_iters(n)`` at solve time.
    ``seed`` fixes the start vector; reruns with the same config are
    bit-identical.
    """

    tol: float = 1e-10
    max_iters: int | None = None
    seed: int = 0
    reorthogonalize_every: int = 10
    method: Literal["auto", "power", "lanczos"] = "auto"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.method not in ("auto", "power", "lanczos"):
            raise ValueError(f"unknown method {self.method!r}")


def default_max_iters(n: int) -> int:
    return 10 * math.ceil(math.log(max(n, 2)) ** 2) + 1000


@dataclass(frozen=True)
class SolveResult:
    """Leading eigenpair of the deflated operator plus solve diagnostics."""

    value: float
    vector: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class EigenBasis:
    """The K smallest eigenpairs of one Laplacian, columns orthonormal.

    ``values`` ascend, the first ``delta`` of them are the kernel (one zero
    per connected component), and ``sigma`` is the deflation shift the basis
    was built under.  ``residuals[i]`` is the measured ||L v_i - value_i v_i||.
    """

    kind: LaplacianKind
    values: np.ndarray
    vectors: np.ndarray
    delta: int
    sigma: float
    residuals: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False
        self.vectors.flags.writeable = False
        self.residuals.flags.writeable = False

    @property
    def k(self) -> int:
        return int(self.values.shape[0])

    def extended(self, value: float, vector: np.ndarray, residual: float) -> "EigenBasis":
        return EigenBasis(
            kind=self.kind,
            values=np.append(self.values, value),
            vectors=np.column_stack([self.vectors, vector]),
            delta=self.delta,
            sigma=self.sigma,
            residuals=np.append(self.residuals, residual),
        )


@dataclass(frozen=True)
class DeflatedOperator:
    """Rank-perturbed shifted Laplacian whose leading pair is the next eigenpair.

    ``matvec`` costs one sparse mat-vec plus K dot products and axpys.  It is
    pure and safe to share across threads.
    """

    laplacian: LaplacianMatrix
    basis: EigenBasis

    @property
    def n(self) -> int:
        return self.laplacian.n

    @property
    def sigma(self) -> float:
        return self.basis.sigma

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {x.shape}")
        v = self.basis.vectors
        coef = (self.sigma - self.basis.values) * (v.T @ x)
        return self.laplacian.matrix @ x + v @ coef - self.sigma * x

    def project_out_basis(self, x: np.ndarray) -> np.ndarray:
        v = self.basis.vectors
        return x - v @ (v.T @ x)

    def to_dense(self) -> np.ndarray:
        v = self.basis.vectors
        lam = self.basis.values
        dense = self.laplacian.matrix.toarray()
        dense += (v * (self.sigma - lam)) @ v.T
        dense -= self.sigma * np.eye(self.n)
        return dense


def deflated_operator(laplacian: LaplacianMatrix, basis: EigenBasis) -> DeflatedOperator:
    if basis.kind is not laplacian.kind:
        raise ValueError("basis kind does not match the Laplacian kind")
    if basis.vectors.shape[0] != laplacian.n:
        raise ValueError("basis dimension does not match the Laplacian")
    return DeflatedOperator(laplacian=laplacian, basis=basis)


def apply_deflated(op: DeflatedOperator, x: np.ndarray) -> np.ndarray:
    return op.matvec(np.asarray(x, dtype=np.float64))


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip so the largest-magnitude entry is positive (ties: lowest index)."""
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v


def kernel_basis(laplacian: LaplacianMatrix, labeling: ComponentLabeling | None = None) -> EigenBasis:
    """Analytic zero-eigenvalue basis: one scaled component indicator per component.

    For the plain Laplacian column c is the unit-normalized indicator of
    component c; for the normalized kind it is S^(1/2) times the indicator,
    unit-normalized.
    """
    if labeling is None:
        labeling = _components_from_csr(laplacian.matrix)
    if labeling.labels.shape[0] != laplacian.n:
        raise ValueError("labeling does not match the Laplacian dimension")
    n, delta = laplacian.n, labeling.count
    vectors = np.zeros((n, delta))
    for c in range(delta):
        members = labeling.labels == c
        if laplacian.kind is LaplacianKind.NORMALIZED:
            col = np.where(members, np.sqrt(laplacian.node_strengths), 0.0)
        else:
            col = members.astype(np.float64)
        vectors[:, c] = col / np.linalg.norm(col)
    return EigenBasis(
        kind=laplacian.kind,
        values=np.zeros(delta),
        vectors=vectors,
        delta=delta,
        sigma=laplacian.sigma,
        residuals=np.zeros(delta),
    )


def leading_eigenpair_power(op: DeflatedOperator, cfg: SolverConfig) -> SolveResult:
    """Power iteration for the leading (largest-|value|) eigenpair of the operator.

    Iterates y = op(x), x = y/||y||, re-orthogonalizing x against the
    deflated columns every ``reorthogonalize_every`` steps, until the
    residual ||op(x) - theta x|| with theta = x.op(x) drops to tol*sigma.
    A start that lands in the deflated span is retried with a fresh random
    vector, at most 5 restarts.
    """
    n = op.n
    if op.basis.k >= n:
        raise ValueError("no undeflated directions left (K >= n)")
    sigma = op.sigma
    max_iters = cfg.max_iters if cfg.max_iters is not None else default_max_iters(n)
    rng = np.random.default_rng(cfg.seed)
    threshold = cfg.tol * sigma
    best: tuple[float, np.ndarray, int, float] | None = None
    total_iters = 0
    for _restart in range(6):
        x = op.project_out_basis(rng.standard_normal(n))
        norm = np.linalg.norm(x)
        if norm < 1e-12:
            continue
        x /= norm
        for _ in range(max_iters - total_iters):
            total_iters += 1
            y = op.matvec(x)
            theta = float(x @ y)
            residual = float(np.linalg.norm(y - theta * x))
            if residual <= threshold:
                return SolveResult(value=theta, vector=x, iterations=total_iters, residual=residual)
            if best is None or residual < best[3]:
                best = (theta, x.copy(), total_iters, residual)
            ynorm = float(np.linalg.norm(y))
            if ynorm < 1e-280:
                break  # iterate collapsed into the deflated span; restart
            x = y / ynorm
            if total_iters % cfg.reorthogonalize_every == 0:
                x = op.project_out_basis(x)
                x /= np.linalg.norm(x)
            if total_iters >= max_iters:
                theta, vec, it, res = best
                raise ConvergenceError(
                    f"power iteration did not reach residual {threshold:.3e} "
                    f"in {max_iters} iterations (best {res:.3e})",
                    value=theta,
                    vector=vec,
                    iterations=it,
                    residual=res,
                )
    if best is not None:
        theta, vec, it, res = best
        raise ConvergenceError(
            "power iteration start vector kept collapsing into the deflated span",
            value=theta,
            vector=vec,
            iterations=it,
            residual=res,
        )
    raise ConvergenceError(
        "power iteration could not build a start vector outside the deflated span",
        value=math.nan,
        vector=np.zeros(n),
        iterations=total_iters,
        residual=math.inf,
    )


def _solve_leading(op: DeflatedOperator, cfg: SolverConfig) -> SolveResult:
    method = cfg.method
    if method == "auto":
        method = "power" if op.n <= AUTO_POWER_MAX_N else "lanczos"
    if method == "power":
        return leading_eigenpair_power(op, cfg)
    from .lanczos import leading_eigenpair_lanczos

    return leading_eigenpair_lanczos(op, cfg)


def next_eigenpair_detailed(
    laplacian: LaplacianMatrix, basis: EigenBasis, cfg: SolverConfig | None = None
) -> tuple[Eigenpair, SolveResult]:
    """next_eigenpair plus the raw solve diagnostics (iterations, residual)."""
    cfg = cfg or SolverConfig()
    if basis.k < basis.delta:
        raise ValueError("basis must contain the full kernel (K >= delta)")
    if basis.k >= laplacian.n:
        raise ValueError("spectrum exhausted (K >= n)")
    op = deflated_operator(laplacian, basis)
    result = _solve_leading(op, cfg)
    vec = op.project_out_basis(result.vector)
    vec /= np.linalg.norm(vec)
    return Eigenpair(value=result.value + op.sigma, vector=canonical_sign(vec)), result


def next_eigenpair(
    laplacian: LaplacianMatrix, basis: EigenBasis, cfg: SolverConfig | None = None
) -> Eigenpair:
    """Compute the (K+1)-th smallest eigenpair given the K smallest ones.

    Returns (theta + sigma, x) where (theta, x) is the leading pair of the
    deflated operator.  The vector comes back orthogonal to the basis and
    sign-canonicalized.
    """
    pair, _ = next_eigenpair_detailed(laplacian, basis, cfg)
    return pair


def extend_to(
    laplacian: LaplacianMatrix,
    labeling: ComponentLabeling | None,
    k_target: int,
    cfg: SolverConfig | None = None,
) -> EigenBasis:
    """Grow an eigenbasis from the kernel to the K smallest eigenpairs.

    Each extension solves one leading-pair problem on the freshly deflated
    operator; the per-step seed is derived from the config seed and K so
    reruns are identical.
    """
    cfg = cfg or SolverConfig()
    basis = kernel_basis(laplacian, labeling)
    if not basis.delta <= k_target <= laplacian.n:
        raise ValueError(
            f"k_target must lie in [{basis.delta}, {laplacian.n}], got {k_target}"
        )
    mat = laplacian.matrix
    while basis.k < k_target:
        step_cfg = replace(cfg, seed=_derive_seed(cfg.seed, basis.k + 1))
        try:
            pair = next_eigenpair(laplacian, basis, step_cfg)
        except ConvergenceError as err:
            raise ConvergenceError(
                f"extension to K={basis.k + 1} failed: {err}",
                value=err.value,
                vector=err.vector,
                iterations=err.iterations,
                residual=err.residual,
            ) from err
        residual = float(np.linalg.norm(mat @ pair.vector - pair.value * pair.vector))
        basis = basis.extended(pair.value, pair.vector, residual)
    return basis


def _derive_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence(entropy=[seed, k]).generate_state(1)[0])


def dense_oracle(laplacian: LaplacianMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Full dense eigendecomposition (ascending), independent of the incremental path."""
    if laplacian.n > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense oracle limited to n <= {DENSE_ORACLE_MAX_N}, got {laplacian.n}")
    values, vectors = np.linalg.eigh(laplacian.matrix.toarray())
    return values, vectors


def basis_to_json(basis: EigenBasis) -> dict:
    """JSON-safe container for an eigenbasis; array payloads round-trip bit-exactly."""
    return {
        "format": "lapinc-eigenbasis/1",
        "kind": basis.kind.value,
        "delta": basis.delta,
        "sigma": basis.sigma,
        "values": array_to_json(basis.values),
        "vectors": array_to_json(basis.vectors),
        "residuals": array_to_json(basis.residuals),
        "tolerance_report": {
            "max_residual": float(basis.residuals.max()) if basis.k else 0.0,
            "orthonormality_defect": float(
                np.max(np.abs(basis.vectors.T @ basis.vectors - np.eye(basis.k)))
            )
            if basis.k
            else 0.0,
        },
    }


def basis_from_json(obj: dict) -> EigenBasis:
    if obj.get("format") != "lapinc-eigenbasis/1":
        raise ValueError("not a serialized eigenbasis")
    return EigenBasis(
        kind=LaplacianKind(obj["kind"]),
        values=array_from_json(obj["values"]),
        vectors=array_from_json(obj["vectors"]),
        delta=int(obj["delta"]),
        sigma=float(obj["sigma"]),
        residuals=array_from_json(obj["residuals"]),
    )
