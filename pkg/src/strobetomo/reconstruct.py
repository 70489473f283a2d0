"""End-to-end stroboscopic reconstruction.

The pipeline recovers an unknown initial state rho(0) from expectation
values of a *single* observable Q measured at p = n^2 - 1 time instants,
given the evolution generator L.  The chain of identities:

1.  rho(t) = exp(L t) rho(0), and exp(L t) is a polynomial in L of degree
    mu - 1 (mu = minimal-polynomial degree), with coefficients alpha_k(t)
    interpolating e^{lambda t} on the spectrum.
2.  Hence m(t_j) = Tr(Q rho(t_j)) = sum_k alpha_k(t_j) g_k with the Krylov
    projections g_k = <(L*)^k [Q], rho(0)>.
3.  When {I, Q, L*[Q], ..., (L*)^{n^2-2}[Q]} spans the operator space, the
    top power (L*)^{n^2-1}[Q] decomposes in that basis, and the trace
    constraint Tr rho = 1 removes one more unknown: p = n^2 - 1 instants
    suffice, and rho(0) is recovered from the basis projections.

Numerical realization.  All of the above is basis-covariant, and the raw
power sequence is catastrophically ill-conditioned already at n = 3 (it is
a monomial Vandermonde system over clustered eigenvalues: condition
numbers of the raw Gram matrix routinely exceed 1e16, far beyond the 1e8
validity gate).  The plan therefore orthonormalizes the Krylov sequence
(ordered QR, so basis element 0 is I/sqrt(n), element 1 is the component
of Q orthogonal to it, and so on) and runs the identical algebra in that
basis: the reduced p x p system then has the *intrinsic* conditioning of
the measurement design itself, and the Gram recovery is exact.  Operator
coordinates are taken in a real orthonormal Hermitian basis, keeping every
intermediate real.

The reduced-system rows are assembled from exp(L* t_j)[Q] directly — for
an optimal generator (simple spectrum, hence nonderogatory) this equals
the alpha-expansion sum_k alpha_k(t_j) (L*)^k [Q] exactly, while avoiding
the cancellation that explicit high-order alpha coefficients introduce.
The alpha matrix itself is still computed, stored on the plan, and
verified against its interpolation invariant.

Measurement simulation follows the Born rule on Q's eigenbasis with a
multinomial shot model; per-instant substreams are spawned from one seed,
so records are reproducible regardless of evaluation order.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import analysis, matcore
from .matcore import ConditioningError, vec, unvec, expm_apply

__all__ = [
    "TimeGrid",
    "AlphaCoefficients",
    "MeasurementRecord",
    "ReconstructionPlan",
    "ReconstructionResult",
    "default_time_grid",
    "alpha_at",
    "evolve",
    "expectation",
    "measure",
    "simulate_records",
    "plan",
    "execute",
    "reconstruct_trajectory",
    "records_to_csv",
    "records_from_csv",
]

#: Plans whose reduced or Gram condition number reaches this bound are
#: rejected: linear inversion past it cannot be trusted in double precision.
CONDITION_LIMIT = 1e8


# ---------------------------------------------------------------------------
# time grids and alpha coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing measurement instants 0 < t_1 < ... < t_p <= T."""

    instants: tuple[float, ...]
    horizon: float

    def __post_init__(self):
        ts = tuple(float(t) for t in self.instants)
        if not ts:
            raise ValueError("time grid must contain at least one instant")
        if ts[0] <= 0:
            raise ValueError(f"instants must be positive, got t_1 = {ts[0]}")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("instants must be strictly increasing")
        if self.horizon < ts[-1]:
            raise ValueError("horizon must cover the last instant")
        object.__setattr__(self, "instants", ts)

    @property
    def p(self) -> int:
        return len(self.instants)


def default_time_grid(gen, p: int, tol: float | None = None) -> TimeGrid:
    """Equispaced grid t_j = j T / p with horizon T = 1 / |lambda|_max.

    The horizon is one e-folding of the fastest decay mode, which keeps all
    e^{lambda_j t} factors well away from underflow while still sampling
    distinct decay phases.  Conditioning is *checked* downstream (in
    :func:`plan`), never assumed from the grid.
    """
    if p < 1:
        raise ValueError(f"grid needs at least one instant, got p = {p}")
    report = analysis.spectral_report(gen, tol=tol)
    if report.eta != 1:
        raise ValueError(
            f"default grid requires an optimal generator (eta = 1), got eta = {report.eta}"
        )
    lam_max = float(np.max(np.abs(report.spectrum.eigenvalues)))
    if lam_max <= 0:
        raise ValueError("zero spectrum: no decay scale to set a horizon")
    horizon = 1.0 / lam_max
    instants = tuple((j + 1) * horizon / p for j in range(p))
    return TimeGrid(instants=instants, horizon=horizon)


@dataclass(frozen=True)
class AlphaCoefficients:
    """Interpolation coefficients of exp(L t) as a polynomial in L.

    ``coefficients[k]`` multiplies L^k; ``nodes`` are the distinct
    eigenvalues used as interpolation nodes, so that
    sum_k coefficients[k] nodes_j^k = e^{nodes_j t} for every j.
    """

    t: float
    coefficients: np.ndarray
    nodes: np.ndarray

    def residual(self) -> float:
        """Max interpolation defect over the nodes."""
        vals = np.polynomial.polynomial.polyval(self.nodes, self.coefficients)
        return float(np.max(np.abs(vals - np.exp(self.nodes * self.t))))


def alpha_at(gen, t: float, tol: float | None = None) -> AlphaCoefficients:
    """Coefficients alpha_k(t) with exp(L t) = sum_k alpha_k(t) L^k.

    Valid for generators with simple spectrum (the eta = 1 regime): the
    coefficients interpolate e^{lambda t} over the n^2 distinct
    eigenvalues.  Degenerate spectra fall outside the supported path and
    are reported as errors.
    """
    report = analysis.spectral_report(gen, tol=tol)
    nodes = report.spectrum.distinct_values()
    if nodes.size != report.dim:
        raise ValueError(
            "alpha coefficients need pairwise distinct eigenvalues; "
            f"spectrum has {nodes.size} distinct values for dimension {report.dim}"
        )
    coeffs = matcore.vandermonde_solve(nodes, np.exp(nodes * t))
    return AlphaCoefficients(t=float(t), coefficients=coeffs, nodes=nodes)


# ---------------------------------------------------------------------------
# evolution, expectation, measurement
# ---------------------------------------------------------------------------


def evolve(gen, rho0, t: float) -> np.ndarray:
    """rho(t) = unvec(exp(L t) vec rho0)."""
    rho0 = matcore.as_matrix(rho0)
    n = rho0.shape[0]
    return unvec(expm_apply(np.asarray(gen, dtype=complex), t, vec(rho0)), n, n)


def expectation(q, rho) -> float:
    """Tr(Q rho) for Hermitian Q; the imaginary part (rounding only) is
    checked and discarded."""
    q = np.asarray(q, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    val = complex(np.trace(q @ rho))
    scale = max(abs(val), 1.0)
    if abs(val.imag) > 1e-10 * scale:
        raise ValueError(f"expectation value has a non-negligible imaginary part: {val}")
    return float(val.real)


def measure(q, rho, shots, seed=None, t: float = 0.0) -> "MeasurementRecord":
    """One measurement record, exact or shot-noisy.

    ``shots="exact"`` returns Tr(Q rho).  A finite shot count draws that
    many outcomes from Q's eigenvalues with Born probabilities
    <q_k|rho|q_k> (multinomially, seeded) and returns the sample mean.
    ``t`` only labels the record; the state passed in is already rho(t).
    """
    q = np.asarray(q, dtype=complex)
    rho = matcore.as_matrix(rho)
    if shots == "exact":
        return MeasurementRecord(t=t, value=expectation(q, rho), shots="exact")
    shots = int(shots)
    if shots < 1:
        raise ValueError(f"shot count must be >= 1, got {shots}")
    evals, evecs = np.linalg.eigh((q + q.conj().T) / 2.0)
    probs = np.real(np.einsum("ij,jk,ki->i", evecs.conj().T, rho, evecs))
    if np.min(probs) < -1e-8:
        raise ValueError(
            f"invalid density matrix: Born probability {np.min(probs):.3e} < -1e-8"
        )
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if total <= 0:
        raise ValueError("invalid density matrix: zero total probability")
    probs /= total
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    value = float(np.dot(counts, evals) / shots)
    return MeasurementRecord(t=t, value=value, shots=shots)


@dataclass(frozen=True)
class MeasurementRecord:
    """(time instant, measured expectation value, shot count or "exact")."""

    t: float
    value: float
    shots: int | str

    def __post_init__(self):
        if self.shots != "exact":
            if int(self.shots) < 1:
                raise ValueError(f"shot count must be >= 1, got {self.shots}")
            object.__setattr__(self, "shots", int(self.shots))


def simulate_records(gen, q, rho0, grid: TimeGrid, shots, seed=None) -> list[MeasurementRecord]:
    """Simulate the full measurement campaign over a time grid.

    Each instant gets its own substream spawned from ``seed`` (fresh
    identically-prepared ensembles per instant), so the record list is
    deterministic for a fixed seed independent of evaluation order.
    """
    gen = np.asarray(gen, dtype=complex)
    rho0 = matcore.as_matrix(rho0)
    if shots == "exact":
        child_seeds = [None] * grid.p
    else:
        child_seeds = np.random.SeedSequence(seed).spawn(grid.p)
    records = []
    for t, sub in zip(grid.instants, child_seeds):
        rho_t = evolve(gen, rho0, t)
        records.append(measure(q, rho_t, shots, seed=sub, t=t))
    return records


# ---------------------------------------------------------------------------
# planning and execution
# ---------------------------------------------------------------------------


def _hermitian_basis(n: int) -> list[np.ndarray]:
    """Real-orthonormal basis of Hermitian n x n matrices under <A,B> =
    Tr(A B): I/sqrt(n), symmetric and antisymmetric off-diagonal pairs,
    then traceless diagonal matrices."""
    ops = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = 1.0
            ops.append(e / np.sqrt(2.0))
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = -1j
            e[j, i] = 1j
            ops.append(e / np.sqrt(2.0))
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -float(k)
        ops.append(np.diag(d).astype(complex) / np.linalg.norm(d))
    return ops


def _herm_coords(m: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the orthonormal basis."""
    return np.array([matcore.hs_inner(b, m).real for b in basis])


def _from_herm_coords(c: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(basis[0])
    for ci, b in zip(c, basis):
        out = out + ci * b
    return out


@dataclass(frozen=True)
class ReconstructionPlan:
    """Everything needed to invert a measurement campaign.

    ``basis`` is the orthonormalized Krylov basis (basis[0] = I/sqrt(n));
    ``beta`` the coordinates of the top Krylov power (L*)^{n^2-1}[Q] in
    that basis; ``alpha_matrix`` the p x n^2 matrix of alpha_k(t_j);
    ``reduced_matrix`` the p x p system acting on the unknown basis
    projections (the known trace component already eliminated);
    ``forward_matrix`` its p x n^2 parent including the trace column.
    """

    generator: np.ndarray
    observable: analysis.ObservableSpec
    grid: TimeGrid
    basis: tuple[np.ndarray, ...]
    beta: np.ndarray
    alpha_matrix: np.ndarray
    reduced_matrix: np.ndarray
    forward_matrix: np.ndarray
    gram_matrix: np.ndarray
    condition_reduced: float
    condition_gram: float
    tolerance: float

    @property
    def dim(self) -> int:
        return self.observable.dim

    @property
    def p(self) -> int:
        return self.grid.p

    @property
    def valid(self) -> bool:
        return (
            self.condition_reduced < CONDITION_LIMIT
            and self.condition_gram < CONDITION_LIMIT
        )


def plan(gen, q, grid: TimeGrid, tol: float | None = None) -> ReconstructionPlan:
    """Build and validate a reconstruction plan.

    Requirements checked here: the generator is optimal (eta = 1), the
    observable passes the Krylov span check, and the grid has exactly
    p = n^2 - 1 distinct instants.  The reduced system and the Gram matrix
    of the working basis must both be conditioned below 1e8, otherwise a
    :class:`~strobetomo.matcore.ConditioningError` narrates which matrix
    failed.
    """
    gen = np.asarray(gen, dtype=complex)
    obs = q if isinstance(q, analysis.ObservableSpec) else analysis.ObservableSpec.from_matrix(q)
    n = obs.dim
    n2 = n * n
    if gen.shape != (n2, n2):
        raise ValueError(f"generator shape {gen.shape} does not match observable dim {n}")
    report = analysis.spectral_report(gen, tol=tol)
    if report.eta != 1:
        raise ValueError(
            f"reconstruction from a single observable requires eta = 1, got eta = {report.eta}"
        )
    if grid.p != n2 - 1:
        raise ValueError(
            f"single-observable reconstruction needs p = n^2 - 1 = {n2 - 1} instants, "
            f"got {grid.p}"
        )
    if not analysis.span_check(gen, obs.matrix, tol=tol):
        raise ValueError("observable fails the Krylov span check (inadmissible)")

    basis_h = _hermitian_basis(n)
    dual = gen.conj().T

    # Raw Krylov sequence I, Q, L*[Q], ..., (L*)^{n^2-1}[Q] in real coords.
    cols = np.empty((n2, n2 + 1))
    cols[:, 0] = _herm_coords(np.eye(n, dtype=complex), basis_h)
    v = vec(obs.matrix)
    for k in range(n2):
        cols[:, k + 1] = _herm_coords(unvec(v, n, n), basis_h)
        v = dual @ v

    # Orthonormal working basis spanning the same flags, sign-fixed so the
    # leading element is exactly I/sqrt(n).
    q_orth, r_tri = np.linalg.qr(cols[:, :n2])
    signs = np.sign(np.diag(r_tri))
    signs[signs == 0] = 1.0
    q_orth = q_orth * signs
    beta = q_orth.T @ cols[:, n2]

    working_basis = tuple(_from_herm_coords(q_orth[:, u], basis_h) for u in range(n2))
    gram = q_orth.T @ q_orth
    cond_gram = float(np.linalg.cond(gram))

    # Forward rows: exp(L* t_j)[Q] expressed in working-basis coordinates.
    # For a simple spectrum this *is* sum_k alpha_k(t_j) (L*)^k [Q], but
    # evaluated through its generating exponential for stability.
    qv = vec(obs.matrix)
    forward = np.empty((grid.p, n2))
    for j, t in enumerate(grid.instants):
        w = expm_apply(dual, t, qv)
        forward[j] = q_orth.T @ _herm_coords(unvec(w, n, n), basis_h)
    reduced = forward[:, 1:]
    cond_reduced = float(np.linalg.cond(reduced))

    alpha_matrix = np.column_stack(
        [alpha_at(gen, t, tol=tol).coefficients for t in grid.instants]
    ).T

    used_tol = tol if tol is not None else matcore.default_rank_tol()
    result = ReconstructionPlan(
        generator=gen,
        observable=obs,
        grid=grid,
        basis=working_basis,
        beta=beta,
        alpha_matrix=alpha_matrix,
        reduced_matrix=reduced,
        forward_matrix=forward,
        gram_matrix=gram,
        condition_reduced=cond_reduced,
        condition_gram=cond_gram,
        tolerance=used_tol,
    )
    if cond_reduced >= CONDITION_LIMIT:
        raise ConditioningError(
            f"reduced coefficient matrix condition {cond_reduced:.3e} reaches the "
            f"{CONDITION_LIMIT:.0e} validity bound; the measurement design cannot be "
            "inverted reliably (try a different grid or observable)",
            condition=cond_reduced,
            matrix_name="reduced coefficient matrix",
        )
    if cond_gram >= CONDITION_LIMIT:
        raise ConditioningError(
            f"Krylov Gram matrix condition {cond_gram:.3e} reaches the "
            f"{CONDITION_LIMIT:.0e} validity bound",
            condition=cond_gram,
            matrix_name="Gram matrix",
        )
    return result


@dataclass(frozen=True)
class ReconstructionResult:
    """Recovered initial state plus inversion diagnostics.

    ``estimate`` is Hermitian with unit trace by construction (symmetrized
    and trace-renormalized).  ``psd_estimate`` is the optional
    eigenvalue-clipped variant, present only when requested.
    """

    estimate: np.ndarray
    residual_norm: float
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    condition_reduced: float
    condition_gram: float
    psd_estimate: np.ndarray | None = None


def execute(
    plan_: ReconstructionPlan, records, *, psd_project: bool = False
) -> ReconstructionResult:
    """Invert a measurement campaign against a plan.

    Records must align with the plan's grid (one record per instant).  The
    reduced system is solved for the unknown basis projections, the trace
    constraint supplies the known one, and the state is assembled through
    the Gram system of the working basis.
    """
    records = list(records)
    grid = plan_.grid
    if len(records) != grid.p:
        raise ValueError(f"expected {grid.p} records, got {len(records)}")
    by_t = sorted(records, key=lambda r: r.t)
    for rec, t in zip(by_t, grid.instants):
        if abs(rec.t - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(
                f"record at t = {rec.t} does not match any plan instant (expected {t})"
            )
    m = np.array([rec.value for rec in by_t], dtype=float)

    n = plan_.dim
    # Known projection of rho(0) on basis[0] = I/sqrt(n) from Tr rho = 1.
    h0 = 1.0 / np.sqrt(n)
    rhs = m - plan_.forward_matrix[:, 0] * h0
    sol = matcore.solve(
        plan_.reduced_matrix, rhs, name="reduced coefficient matrix",
        max_condition=CONDITION_LIMIT,
    )
    projections = np.concatenate([[h0], sol.solution.real])

    gram_sol = matcore.solve(
        plan_.gram_matrix, projections, name="Gram matrix", max_condition=CONDITION_LIMIT
    )
    coeffs = gram_sol.solution.real

    raw = np.zeros((n, n), dtype=complex)
    for x_u, b_u in zip(coeffs, plan_.basis):
        raw = raw + x_u * b_u

    residual = float(np.linalg.norm(plan_.reduced_matrix @ sol.solution - rhs))
    herm_defect = float(np.max(np.abs(raw - raw.conj().T)))
    trace_defect = float(abs(np.trace(raw).real - 1.0))

    estimate = (raw + raw.conj().T) / 2.0
    estimate = estimate / np.trace(estimate).real
    min_eig = float(np.min(np.linalg.eigvalsh(estimate)))

    psd = _psd_projection(estimate) if psd_project else None
    return ReconstructionResult(
        estimate=estimate,
        residual_norm=residual,
        hermiticity_defect=herm_defect,
        trace_defect=trace_defect,
        min_eigenvalue=min_eig,
        condition_reduced=plan_.condition_reduced,
        condition_gram=plan_.condition_gram,
        psd_estimate=psd,
    )


def _psd_projection(rho: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues and renormalize the trace."""
    evals, evecs = np.linalg.eigh(rho)
    clipped = np.clip(evals, 0.0, None)
    total = clipped.sum()
    if total <= 0:
        raise ValueError("PSD projection undefined: no positive spectral weight")
    clipped /= total
    return (evecs * clipped) @ evecs.conj().T


def reconstruct_trajectory(gen, result: ReconstructionResult, times) -> list[np.ndarray]:
    """Propagate the recovered initial state along the known dynamics."""
    return [evolve(gen, result.estimate, float(t)) for t in times]


# ---------------------------------------------------------------------------
# record CSV I/O
# ---------------------------------------------------------------------------

_CSV_HEADER = ["t", "value", "shots"]


def records_to_csv(records, path_or_file) -> None:
    """Write measurement records as CSV with columns ``t, value, shots``.

    Floats use the shortest round-trip decimal representation
    (``repr``-style), so re-reading reproduces the records exactly.
    """

    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for rec in records:
            writer.writerow([repr(float(rec.t)), repr(float(rec.value)), rec.shots])

    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_file)


def records_from_csv(path_or_file) -> list[MeasurementRecord]:
    """Read measurement records written by :func:`records_to_csv`."""

    def _read(fh):
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != _CSV_HEADER:
            raise ValueError(f"measurement CSV must start with header {','.join(_CSV_HEADER)}")
        out = []
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"malformed record row: {row!r}")
            t, value, shots = row
            shots_val: int | str = "exact" if shots.strip() == "exact" else int(shots)
            out.append(MeasurementRecord(t=float(t), value=float(value), shots=shots_val))
        return out

    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, newline="") as fh:
            return _read(fh)
    return _read(path_or_file)
