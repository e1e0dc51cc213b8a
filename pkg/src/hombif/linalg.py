"""Small dense linear algebra kernels.

Everything here is a pure function of its inputs. Matrices are plain
``numpy`` float arrays; subspaces are carried as :class:`SubspaceFrame`.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError

DEFAULT_TOL = 1e-9


def as_matrix(m, name="matrix"):
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class SubspaceFrame:
    """Orthonormal basis (as columns of ``basis``) of a subspace of R^N."""

    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise InvalidInputError("frame basis must be 2-D (ambient_dim x k)")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def k(self):
        return self.basis.shape[1]

    @property
    def vectors(self):
        return [self.basis[:, j] for j in range(self.k)]

    def projector(self):
        """Orthogonal projector onto the span."""
        return self.basis @ self.basis.T

    def is_orthonormal(self, tol=None):
        tol = self.tol if tol is None else tol
        g = self.basis.T @ self.basis
        return bool(np.all(np.abs(g - np.eye(self.k)) <= tol))

    def contains(self, other, tol=None):
        """True when every column of ``other`` lies in this span."""
        tol = self.tol if tol is None else tol
        if other.k == 0:
            return True
        resid = other.basis - self.projector() @ other.basis
        return bool(np.linalg.norm(resid, axis=0).max() < tol)

    def same_span(self, other, tol=None):
        return self.k == other.k and self.contains(other, tol) and other.contains(self, tol)

    def canonical(self):
        """Flip column signs so each column's largest entry (lowest index on ties) is positive."""
        if self.k == 0:
            return self
        b = self.basis.copy()
        for j in range(b.shape[1]):
            i = int(np.argmax(np.abs(b[:, j])))
            if b[i, j] < 0:
                b[:, j] = -b[:, j]
        return SubspaceFrame(b, self.tol)


def _as_columns(vectors):
    if isinstance(vectors, SubspaceFrame):
        return vectors.basis
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return np.array(vectors, dtype=float)
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vecs:
        return None
    dims = {v.size for v in vecs}
    if len(dims) != 1:
        raise InvalidInputError("vectors must share one ambient dimension")
    return np.column_stack(vecs)


def orthonormalize(vectors, tol=DEFAULT_TOL, ambient_dim=None):
    """Modified Gram-Schmidt (two passes) in input order.

    ``vectors`` is a list of vectors or a 2-D array whose columns are the
    vectors. Columns whose residual after projection drops below ``tol`` are
    discarded.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    cols = _as_columns(vectors)
    if cols is None or cols.shape[1] == 0:
        n = ambient_dim if ambient_dim is not None else (0 if cols is None else cols.shape[0])
        return SubspaceFrame(np.zeros((n, 0)), tol)
    if not np.all(np.isfinite(cols)):
        raise InvalidInputError("vectors have non-finite entries")
    kept = []
    for j in range(cols.shape[1]):
        v = cols[:, j].copy()
        for _ in range(2):
            for q in kept:
                v -= (q @ v) * q
        r = np.linalg.norm(v)
        if r < tol:
            continue
        kept.append(v / r)
    basis = np.column_stack(kept) if kept else np.zeros((cols.shape[0], 0))
    return SubspaceFrame(basis, tol)


def subspace_intersection(f1, f2, tol=DEFAULT_TOL):
    """Orthonormal basis of span(f1) ∩ span(f2) from principal angles.

    Directions whose cosine exceeds ``1 - tol`` are counted as shared.
    """
    if not 0 < tol < 1:
        raise InvalidInputError("tol must lie in (0, 1)")
    if f1.ambient_dim != f2.ambient_dim:
        raise InvalidInputError("frames live in different ambient dimensions")
    n = f1.ambient_dim
    if f1.k == 0 or f2.k == 0:
        return SubspaceFrame(np.zeros((n, 0)), tol)
    u, s, _ = np.linalg.svd(f1.basis.T @ f2.basis)
    m = int(np.sum(s > 1 - tol))
    return orthonormalize(f1.basis @ u[:, :m], tol=tol, ambient_dim=n)


def singular_values(m):
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def min_singular_value(m):
    return float(singular_values(m)[-1])


def det_sign(m, tol=DEFAULT_TOL):
    """Sign of det(m) from an LU factorization with partial pivoting.

    Returns 0 when |det| divided by the product of row norms (Hadamard's
    bound) is below ``tol``.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"det_sign needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 1
    a = as_matrix(a)
    row_norms = np.linalg.norm(a, axis=1)
    if np.any(row_norms == 0):
        return 0
    with warnings.catch_warnings():
        # exactly singular input is reported through the zero pivot below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0):
        return 0
    log_ratio = np.sum(np.log(np.abs(diag))) - np.sum(np.log(row_norms))
    if log_ratio < np.log(tol):
        return 0
    swaps = int(np.sum(piv != np.arange(len(piv))))
    sign = (-1) ** swaps * int(np.prod(np.sign(diag)))
    return int(sign)


def row_basis(p, rank, reference=None):
    """Orthonormal rows spanning the row space of ``p``, so ``p x = 0`` iff ``rows @ x = 0``.

    With ``reference`` (rows from a nearby parameter value) the new rows are
    obtained by projecting the reference onto the row space, which keeps the
    basis continuous along a path; otherwise the sign convention of
    :meth:`SubspaceFrame.canonical` applies.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[1]
    if rank == 0:
        return np.zeros((0, n))
    _, _, vt = np.linalg.svd(p)
    space = SubspaceFrame(vt[:rank].T)
    if reference is not None:
        aligned = orthonormalize(space.projector() @ np.asarray(reference, dtype=float).T)
        if aligned.k == rank:
            return aligned.basis.T
    return space.canonical().basis.T
