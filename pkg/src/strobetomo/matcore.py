"""Dense complex linear algebra for small superoperators.

Everything in this package runs through a handful of primitives collected
here: Kronecker products, column-major vectorization, Hilbert-Schmidt inner
products, spectral decompositions with degeneracy clustering, matrix
exponential action, and tolerance-aware rank / linear solves.

Conventions fixed once and for all:

* ``vec`` stacks columns (column-major / Fortran order), so that
  ``vec(X @ Y @ Z) == kron(Z.T, X) @ vec(Y)``.  Row-major stacking breaks
  that identity, and with it every generator built in :mod:`.channels`.
* Numerical rank uses a *relative* singular-value cutoff, default
  ``1e-9`` times the largest singular value (overridable per call, or
  globally through the ``STROBE_TOL`` environment variable).
* Eigenvalues are reported sorted by (real, imaginary) part, and values
  within ``1e-8`` of each other relative to the spectral diameter are
  clustered before geometric multiplicities are computed: numerical
  eigensolvers never return exactly equal values for a degenerate pair.

Matrices are plain ``numpy.ndarray`` objects with complex dtype; the
module works on anything array-like but always returns ndarrays.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "ConditioningError",
    "NumericalFailure",
    "Spectrum",
    "SolveResult",
    "default_rank_tol",
    "as_matrix",
    "kron",
    "vec",
    "unvec",
    "hs_inner",
    "eig",
    "expm_apply",
    "rank_with_tol",
    "solve",
    "vandermonde_solve",
]

#: Relative singular-value cutoff separating true degeneracy from rounding
#: for O(1) entries at up to 16x16 superoperator scale.
DEFAULT_RANK_TOL = 1e-9

#: Eigenvalues closer than this fraction of the spectral diameter are
#: treated as a single degenerate cluster.
CLUSTER_TOL = 1e-8


class ConditioningError(RuntimeError):
    """A linear system or plan was rejected as too ill-conditioned.

    Carries the offending condition number in :attr:`condition` and the
    name of the matrix that triggered the rejection in :attr:`matrix_name`.
    """

    def __init__(self, message: str, condition: float, matrix_name: str = ""):
        super().__init__(message)
        self.condition = condition
        self.matrix_name = matrix_name


class NumericalFailure(RuntimeError):
    """An underlying numerical routine failed to converge or produced
    non-finite output; the computation cannot be silently degraded."""


def default_rank_tol() -> float:
    """Relative rank tolerance, honouring the ``STROBE_TOL`` env var."""
    raw = os.environ.get("STROBE_TOL")
    if raw is None:
        return DEFAULT_RANK_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise ValueError(f"STROBE_TOL must be a float, got {raw!r}") from exc
    if tol <= 0:
        raise ValueError(f"STROBE_TOL must be positive, got {tol}")
    return tol


def as_matrix(obj) -> np.ndarray:
    """Validate and convert array-like input to a 2-D complex ndarray.

    Rejects non-2-D shapes, empty axes and non-finite entries.  Use this at
    every boundary where matrices enter from user input.
    """
    m = np.asarray(obj, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix axes must be nonempty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product (thin wrapper, kept for a uniform vocabulary)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def vec(m) -> np.ndarray:
    """Column-major vectorization: stack the columns of ``m``."""
    return np.ravel(as_matrix(m), order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape {v.size} entries into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^dagger b)``.

    Conjugate-linear in the first argument, like the physics convention the
    projection formulas rely on.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))  # vdot conjugates its first argument


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with algebraic multiplicity plus degeneracy clustering.

    ``eigenvalues`` lists all values (algebraic multiplicity), sorted by
    (real, imaginary).  ``clusters`` groups numerically coincident values:
    one ``(representative, algebraic, geometric)`` triple per cluster, in
    the same ordering.  ``geometric`` per eigenvalue is exposed through
    :attr:`geometric_multiplicities`, aligned with ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    clusters: tuple[tuple[complex, int, int], ...]
    tolerance: float
    geometric_multiplicities: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def max_geometric_multiplicity(self) -> int:
        return max(c[2] for c in self.clusters)

    def distinct_values(self) -> np.ndarray:
        """One representative per cluster (degenerate values collapsed)."""
        return np.array([c[0] for c in self.clusters])


def _cluster_indices(values: np.ndarray, tol_abs: float) -> list[list[int]]:
    """Group sorted eigenvalue indices into chains closer than ``tol_abs``."""
    groups: list[list[int]] = []
    for i in range(values.size):
        if groups and abs(values[i] - values[groups[-1][-1]]) <= tol_abs:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def eig(m, tol: float | None = None) -> Spectrum:
    """Full spectrum with clustered geometric multiplicities.

    Eigenvalues are sorted by (real, imaginary) part.  Values within
    ``CLUSTER_TOL`` x spectral diameter are treated as one degenerate
    cluster; the geometric multiplicity of each cluster is the numerical
    null-space dimension of ``m - lambda I`` at the given rank tolerance.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"eig requires a square matrix, got shape {m.shape}")
    if tol is None:
        tol = default_rank_tol()
    try:
        values = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc

    order = np.lexsort((values.imag, values.real))
    values = values[order]

    diameter = float(np.max(np.abs(values[:, None] - values[None, :]))) if values.size > 1 else 0.0
    tol_abs = CLUSTER_TOL * diameter
    dim = m.shape[0]

    clusters: list[tuple[complex, int, int]] = []
    geo = np.empty(dim, dtype=int)
    for group in _cluster_indices(values, tol_abs):
        rep = complex(np.mean(values[group]))
        shifted = m - rep * np.eye(dim)
        sv = np.linalg.svd(shifted, compute_uv=False)
        if sv[0] == 0:  # m is exactly rep * I
            nullity = dim
        else:
            cutoff = max(tol * sv[0], tol_abs)
            nullity = int(np.sum(sv <= cutoff))
        nullity = max(1, min(nullity, len(group)))
        clusters.append((rep, len(group), nullity))
        geo[group] = nullity

    return Spectrum(
        eigenvalues=values,
        clusters=tuple(clusters),
        tolerance=tol,
        geometric_multiplicities=geo,
    )


def expm_apply(m, t: float, v) -> np.ndarray:
    """Action of the matrix exponential: ``exp(m t) @ v``.

    Dimensions here are tiny (at most ~100x100 by charter), so the dense
    scaling-and-squaring exponential is both the simplest and the most
    robust choice; no Krylov/expmv machinery is warranted.
    """
    m = np.asarray(m, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expm_apply requires a square matrix, got {m.shape}")
    if v.shape[0] != m.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {m.shape}, vector {v.shape}")
    if t == 0:
        return v.copy()
    out = scipy.linalg.expm(m * t) @ v
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("matrix exponential produced non-finite entries")
    return out


def rank_with_tol(vectors, tol: float | None = None) -> int:
    """Numerical rank of a family of equal-length vectors.

    Column-pivoted elimination on norm-scaled columns: each nonzero vector
    is first normalized (making the count exactly invariant under nonzero
    column scaling and under permutation), then the pivoted-QR diagonal is
    thresholded at ``tol`` times its largest entry.  The pivoted diagonal
    measures how much genuinely new direction each column adds, which keeps
    near-dependent families (Krylov stacks of clustered spectra) from being
    written off by the squared conditioning an SVD of the raw stack sees.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("rank_with_tol requires at least one vector")
    if tol is None:
        tol = default_rank_tol()
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    cols = []
    for v in vectors:
        v = np.asarray(v, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm > 0:
            cols.append(v / norm)
    if not cols:
        return 0
    a = np.column_stack(cols)
    r = scipy.linalg.qr(a, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return 0
    return int(np.sum(diag > tol * diag[0]))


@dataclass(frozen=True)
class SolveResult:
    """Solution of a square linear system plus its 2-norm condition number."""

    solution: np.ndarray
    condition: float


def solve(a, b, *, name: str = "matrix", max_condition: float = 1e15) -> SolveResult:
    """Solve ``a x = b`` and report the condition number of ``a``.

    Raises :class:`ConditioningError` when ``a`` is singular at working
    precision or its condition number exceeds ``max_condition``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > max_condition:
        raise ConditioningError(
            f"{name} is singular to working precision (condition {cond:.3e})",
            condition=cond,
            matrix_name=name,
        )
    x = np.linalg.solve(a, b)
    return SolveResult(solution=x, condition=cond)


def vandermonde_solve(nodes, values) -> np.ndarray:
    """Coefficients ``c`` with ``sum_k c_k node_j^k = value_j`` for all j.

    The nodes must be pairwise distinct; repeated nodes make the system
    singular and are rejected up front with an exact check.
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    values = np.asarray(values, dtype=complex).ravel()
    if nodes.size != values.size:
        raise ValueError(f"{nodes.size} nodes but {values.size} values")
    if nodes.size == 0:
        raise ValueError("vandermonde_solve requires at least one node")
    diffs = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(diffs, np.inf)
    if np.min(diffs) == 0:
        raise ValueError("vandermonde_solve requires pairwise distinct nodes")
    v = np.vander(nodes, increasing=True)
    return np.linalg.solve(v, values)
