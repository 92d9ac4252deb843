"""Dense complex linear algebra with explicit accuracy contracts.

All operators in this package are square ``numpy`` arrays of ``complex128``.
The Hermitian eigensolver wraps LAPACK and enforces the residual,
orthonormality and trace contracts the physics modules rely on.  Eigenvectors
inside numerically degenerate clusters are re-orthogonalized against a fixed
canonical order so that repeated runs (and golden files) are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, UsageError

# Default bound on max_k ||A v_k - w_k v_k||_2 relative to max(1, ||A||_max * dim).
DEFAULT_EIGH_TOL = 1e-10

# Consecutive eigenvalues closer than this (times the same scale) are treated
# as one degenerate cluster when canonicalizing eigenvectors.
_CLUSTER_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Validate and return `a` as a square, finite complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise UsageError("matrix dimension must be at least 1")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise UsageError("matrix contains non-finite entries")
    return m


def _check_same_dim(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise UsageError(
            f"{op}: dimension mismatch, {a.shape[0]} vs {b.shape[0]}"
        )


def mat_add(a, b) -> np.ndarray:
    """Entrywise sum of two equal-dimension square matrices."""
    a, b = as_matrix(a), as_matrix(b)
    _check_same_dim(a, b, "mat_add")
    return a + b


def mat_mul(a, b) -> np.ndarray:
    """Matrix product of two equal-dimension square matrices."""
    a, b = as_matrix(a), as_matrix(b)
    _check_same_dim(a, b, "mat_mul")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose. An exact involution: adjoint(adjoint(a)) == a."""
    return as_matrix(a).conj().T.copy()


def commutator(a, b) -> np.ndarray:
    """a @ b - b @ a."""
    a, b = as_matrix(a), as_matrix(b)
    _check_same_dim(a, b, "commutator")
    return a @ b - b @ a


def norm_max(a) -> float:
    """Largest entry magnitude; the scale used by the accuracy contracts."""
    return float(np.max(np.abs(a))) if np.asarray(a).size else 0.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Result of `eigh`.

    eigenvalues   -- real, ascending.
    eigenvectors  -- k-th column pairs with the k-th eigenvalue; columns
                     orthonormal and deterministically phased.
    residual_norm -- max_k ||A v_k - w_k v_k||_2 over all pairs.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norm: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _canonical_cluster_basis(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis for the span of `vecs` (columns).

    Gram-Schmidt over projector columns in ascending basis-index order, so
    the output does not depend on the arbitrary rotation LAPACK returns for
    a degenerate cluster. Falls back to the input if the greedy sweep cannot
    find enough independent columns (it always can in practice).
    """
    dim, g = vecs.shape
    proj = vecs @ vecs.conj().T
    chosen: list[np.ndarray] = []
    for j in range(dim):
        w = proj[:, j].copy()
        for v in chosen:
            w -= v * (v.conj() @ w)
        # second pass for numerical orthogonality
        for v in chosen:
            w -= v * (v.conj() @ w)
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            chosen.append(w / nrm)
            if len(chosen) == g:
                break
    if len(chosen) != g:
        return vecs
    # order by the basis index of the dominant component, ties by next index
    def order_key(v: np.ndarray) -> tuple[int, int]:
        mags = np.abs(v)
        top = np.argsort(-mags, kind="stable")
        return int(top[0]), int(top[1]) if dim > 1 else 0

    chosen.sort(key=order_key)
    return np.column_stack(chosen)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        i = int(np.argmax(np.abs(col)))
        pivot = col[i]
        if abs(pivot) > 0.0:
            out[:, k] = col * (pivot.conjugate() / abs(pivot))
    return out


def eigh(a, tol: float = DEFAULT_EIGH_TOL) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix with verified accuracy.

    The input is symmetrized via (a + a†)/2 before solving; the caller is
    responsible for passing a matrix that is Hermitian to within roundoff.
    Raises ComputationError (carrying the achieved residual) if the residual
    or orthonormality contract cannot be met, and UsageError on non-finite
    input.
    """
    if tol <= 0.0:
        raise UsageError(f"eigh tolerance must be positive, got {tol}")
    a = as_matrix(a)
    h = 0.5 * (a + a.conj().T)
    scale = max(1.0, norm_max(h) * h.shape[0])
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"eigensolver did not converge: {exc}") from exc

    # canonicalize degenerate clusters, then fix every phase
    ctol = _CLUSTER_TOL * scale
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > ctol:
            if k - start > 1:
                v[:, start:k] = _canonical_cluster_basis(v[:, start:k])
            start = k
    v = _fix_phases(v)

    residual = float(
        np.max(np.linalg.norm(h @ v - v * w[np.newaxis, :], axis=0))
    )
    if not residual <= tol * scale:
        raise ComputationError(
            f"eigh residual {residual:.3e} exceeds bound {tol * scale:.3e}"
        )
    ortho = norm_max(v.conj().T @ v - np.eye(len(w)))
    if not ortho <= 1e-10:
        raise ComputationError(f"eigenvector orthonormality defect {ortho:.3e}")
    trace_gap = abs(np.sum(w) - np.trace(h).real)
    if not trace_gap <= 1e-10 * len(w) * max(1.0, norm_max(h)):
        raise ComputationError(
            f"eigenvalue sum deviates from trace by {trace_gap:.3e}"
        )
    return EigenDecomposition(
        eigenvalues=w, eigenvectors=v, residual_norm=residual
    )


def eigvalsh(a, tol: float = DEFAULT_EIGH_TOL) -> np.ndarray:
    """Ascending eigenvalues only (trace-checked); cheaper than full `eigh`."""
    del tol
    a = as_matrix(a)
    h = 0.5 * (a + a.conj().T)
    try:
        w = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"eigensolver did not converge: {exc}") from exc
    trace_gap = abs(np.sum(w) - np.trace(h).real)
    if not trace_gap <= 1e-10 * len(w) * max(1.0, norm_max(h)):
        raise ComputationError(
            f"eigenvalue sum deviates from trace by {trace_gap:.3e}"
        )
    return w


def dump_matrix(a) -> str:
    """Debug text dump: one row per line, entries as `re+imi`, 17 significant digits."""
    a = as_matrix(a)
    lines = []
    for row in a:
        lines.append(
            " ".join(f"{e.real:.17g}{e.imag:+.17g}i" for e in row)
        )
    return "\n".join(lines)
