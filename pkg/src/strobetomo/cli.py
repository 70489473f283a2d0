"""Command-line interface.

Four subcommands::

    strobetomo analyze           # spectral/optimality report for a family
    strobetomo check-observable  # admissibility of a Hermitian observable
    strobetomo reconstruct       # simulate-measure-reconstruct, or invert
                                 # an external measurement CSV
    strobetomo scan              # sweep parameter grids to CSV

Exit codes are part of the contract: 0 success/optimal/admissible,
2 valid-but-degenerate or inadmissible, 3 conditioning failure, 1 for any
input error.  JSON reports carry a ``schema_version`` field; complex
matrices serialize as ``{"rows": r, "cols": c, "data": [[re, im], ...]}``
with ROW-MAJOR data order (serialization order is deliberately independent
of the column-major vec convention used internally).  Measurement CSVs use
the ``t,value,shots`` layout of :mod:`strobetomo.reconstruct`.

The ``STROBE_TOL`` environment variable overrides the default relative
rank tolerance (1e-9) everywhere; the ``--tol`` flag overrides both for a
single invocation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, channels, matcore, reconstruct

__all__ = ["main", "matrix_to_json", "matrix_from_json"]

SCHEMA_VERSION = "1"

#: Hard cap on scan grid size.
SCAN_POINT_CAP = 10_000_000

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DEGENERATE = 2
EXIT_CONDITIONING = 3


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def matrix_to_json(m) -> dict:
    """Row-major [re, im] pair encoding of a complex matrix."""
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(x.real), float(x.imag)] for x in m.reshape(-1, order="C")],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`, with full input validation."""
    if not isinstance(obj, dict):
        raise ValueError("matrix JSON must be an object")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"matrix JSON needs rows, cols and data fields: {exc}") from exc
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ValueError(f"matrix data must hold rows*cols = {rows * cols} entries")
    flat = []
    for entry in data:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValueError(f"matrix entries must be [re, im] pairs, got {entry!r}")
        flat.append(complex(float(entry[0]), float(entry[1])))
    m = np.array(flat, dtype=complex).reshape(rows, cols, order="C")
    return matcore.as_matrix(m)


def _complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fail(message: str, code: int = EXIT_INPUT) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# model construction from CLI arguments
# ---------------------------------------------------------------------------


def _parse_params(model: str, raw: str, gamma: float):
    values = [float(x) for x in raw.split(",") if x.strip() != ""]
    if model == "two-level":
        if len(values) != 3:
            raise ValueError(f"two-level model takes 3 parameters, got {len(values)}")
        return channels.TwoLevelParams(*values, gamma=gamma)
    if model == "three-level":
        if len(values) != 6:
            raise ValueError(f"three-level model takes 6 parameters, got {len(values)}")
        return channels.ThreeLevelParams(*values, gamma=gamma)
    raise ValueError(f"unknown model {model!r}")


def _validity(model: str, params) -> channels.ValidityReport:
    if model == "two-level":
        return channels.validate_two_level(params)
    return channels.validate_three_level(params)


def _generator(model: str, params) -> np.ndarray:
    if model == "two-level":
        return channels.generator_two_level(params)
    return channels.generator_three_level(params)


def _params_json(model: str, params) -> dict:
    if model == "two-level":
        return {"a1": params.a1, "a2": params.a2, "a3": params.a3}
    out = {f"a{i}": getattr(params, f"a{i}") for i in range(1, 7)}
    out["a7"] = params.a7
    out["a8"] = params.a8
    return out


def _load_observable(path: str) -> analysis.ObservableSpec:
    with open(path) as fh:
        obj = json.load(fh)
    return analysis.ObservableSpec.from_matrix(matrix_from_json(obj))


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    try:
        params = _parse_params(args.model, args.params, args.gamma)
    except ValueError as exc:
        return _fail(str(exc))
    validity = _validity(args.model, params)
    if not validity.cptp_domain:
        return _fail("; ".join(validity.violations))

    gen = _generator(args.model, params)
    report = analysis.spectral_report(gen)
    opt = analysis.optimality_report(gen)

    payload = {
        "schema_version": SCHEMA_VERSION,
        "model": args.model,
        "gamma": args.gamma,
        "params": _params_json(args.model, params),
        "validity": {
            "cptp_domain": validity.cptp_domain,
            "nondegenerate": validity.nondegenerate,
            "violations": list(validity.violations),
        },
        "spectral": {
            "eigenvalues": [_complex_to_json(z) for z in report.spectrum.eigenvalues],
            "clusters": [
                {"value": _complex_to_json(v), "algebraic": a, "geometric": g}
                for v, a, g in report.spectrum.clusters
            ],
            "eta": report.eta,
            "mu": report.mu,
            "discriminant": _complex_to_json(report.discriminant),
            "tolerance": report.tolerance,
        },
        "optimality": {
            "eta": opt.eta,
            "mu": opt.mu,
            "mu_nonderogatory": opt.mu_nonderogatory,
            "mu_alternative_claim": opt.mu_alternative_claim,
            "discriminant_nonzero": opt.discriminant_nonzero,
            "optimal": opt.optimal,
            "criteria_agree": opt.criteria_agree,
            "notes": list(opt.notes),
        },
    }
    _emit(payload, args.output)
    return EXIT_OK if opt.optimal else EXIT_DEGENERATE


# ---------------------------------------------------------------------------
# check-observable
# ---------------------------------------------------------------------------


def cmd_check_observable(args) -> int:
    try:
        params = _parse_params(args.model, args.params, args.gamma)
    except ValueError as exc:
        return _fail(str(exc))
    validity = _validity(args.model, params)
    if not validity.cptp_domain:
        return _fail("; ".join(validity.violations))
    try:
        obs = _load_observable(args.observable)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail(f"cannot load observable: {exc}")

    gen = _generator(args.model, params)
    basis = analysis.krylov_basis(gen, obs.matrix)
    admissible = basis.admissible
    payload = {
        "schema_version": SCHEMA_VERSION,
        "model": args.model,
        "admissible": admissible,
        "rank": basis.rank,
        "required": basis.vectors.shape[0],
        "determinant_magnitude": float(abs(np.linalg.det(basis.vectors))),
        "condition": basis.condition,
    }
    if obs.dim == 2:
        payload["closed_form"] = {
            "A": obs.a,
            "B": obs.b,
            "C": obs.c,
            "D": obs.d,
            "admissible": analysis.two_level_admissible(obs),
        }
    _emit(payload, args.output)
    return EXIT_OK if admissible else EXIT_DEGENERATE


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------


def cmd_reconstruct(args) -> int:
    try:
        params = _parse_params(args.model, args.params, args.gamma)
    except ValueError as exc:
        return _fail(str(exc))
    validity = _validity(args.model, params)
    if not validity.cptp_domain:
        return _fail("; ".join(validity.violations))
    gen = _generator(args.model, params)
    n = 2 if args.model == "two-level" else 3
    p_needed = n * n - 1

    if not validity.nondegenerate:
        print(
            "error: degenerate parameters (eta > 1): a single observable cannot "
            "reconstruct the state",
            file=sys.stderr,
        )
        return EXIT_DEGENERATE

    # Observable: file wins over seed.
    try:
        if args.observable:
            obs = _load_observable(args.observable)
        elif args.observable_seed is not None:
            obs = analysis.random_admissible_observable(gen, args.observable_seed)
        else:
            return _fail("provide --observable FILE or --observable-seed SEED")
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail(f"cannot obtain observable: {exc}")

    simulation = args.records is None
    truth = None
    try:
        if simulation:
            if not args.rho0:
                return _fail("simulation mode needs --rho0 FILE (or pass --records CSV)")
            with open(args.rho0) as fh:
                truth = matrix_from_json(json.load(fh))
            if truth.shape != (n, n):
                return _fail(f"rho0 must be {n}x{n}, got {truth.shape}")
            if np.max(np.abs(truth - truth.conj().T)) > 1e-10:
                return _fail("rho0 must be Hermitian")
            if abs(np.trace(truth).real - 1.0) > 1e-10:
                return _fail(f"rho0 must have unit trace, got {np.trace(truth).real}")
            shots: int | str
            if args.shots == "exact":
                shots = "exact"
            else:
                shots = int(args.shots)
                if args.seed is None:
                    return _fail("finite shot counts require --seed for reproducibility")
            grid = _build_grid(args.grid, gen, p_needed)
            records = reconstruct.simulate_records(
                gen, obs.matrix, truth, grid, shots, seed=args.seed
            )
            if args.records_out:
                reconstruct.records_to_csv(records, args.records_out)
        else:
            records = reconstruct.records_from_csv(args.records)
            instants = [rec.t for rec in records]
            if len(set(instants)) != len(instants):
                return _fail("records CSV contains duplicate time instants")
            ordered = sorted(instants)
            grid = reconstruct.TimeGrid(instants=tuple(ordered), horizon=ordered[-1])
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    try:
        plan_ = reconstruct.plan(gen, obs, grid)
    except matcore.ConditioningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITIONING
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    try:
        result = reconstruct.execute(plan_, records, psd_project=args.psd_project)
    except matcore.ConditioningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITIONING
    except ValueError as exc:
        return _fail(str(exc))

    payload = {
        "schema_version": SCHEMA_VERSION,
        "model": args.model,
        "gamma": args.gamma,
        "params": _params_json(args.model, params),
        "grid": {"instants": list(plan_.grid.instants), "horizon": plan_.grid.horizon},
        "observable": matrix_to_json(obs.matrix),
        "shots": ("external" if not simulation else shots),
        "estimate": matrix_to_json(result.estimate),
        "residual_norm": result.residual_norm,
        "hermiticity_defect": result.hermiticity_defect,
        "trace_defect": result.trace_defect,
        "min_eigenvalue": result.min_eigenvalue,
        "condition_reduced": result.condition_reduced,
        "condition_gram": result.condition_gram,
        "psd_estimate": (
            matrix_to_json(result.psd_estimate) if result.psd_estimate is not None else None
        ),
    }
    if truth is not None:
        payload["frobenius_error"] = float(np.linalg.norm(result.estimate - truth))
    _emit(payload, args.output)
    return EXIT_OK


def _build_grid(spec: str, gen, p: int) -> reconstruct.TimeGrid:
    if spec == "default":
        return reconstruct.default_time_grid(gen, p)
    instants = tuple(float(x) for x in spec.split(",") if x.strip() != "")
    return reconstruct.TimeGrid(instants=instants, horizon=max(instants))


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


def _parse_range(raw: str) -> list[float]:
    """Either a single float or an inclusive lo:hi:step range."""
    if ":" not in raw:
        return [float(raw)]
    parts = raw.split(":")
    if len(parts) != 3:
        raise ValueError(f"range syntax is lo:hi:step, got {raw!r}")
    lo, hi, step = (float(x) for x in parts)
    if step <= 0:
        raise ValueError(f"range step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"range upper bound {hi} below lower bound {lo}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def _scan_point(task) -> list[str]:
    """One CSV row; returns strings so formatting is fixed at the worker."""
    model, values, gamma = task
    if model == "two-level":
        params = channels.TwoLevelParams(*values, gamma=gamma)
        validity = channels.validate_two_level(params)
    else:
        params = channels.ThreeLevelParams(*values, gamma=gamma)
        validity = channels.validate_three_level(params)
    row = [repr(v) for v in values]
    row.append("true" if validity.cptp_domain else "false")
    row.append("true" if validity.nondegenerate else "false")
    if validity.cptp_domain:
        gen = _generator(model, params)
        report = analysis.spectral_report(gen)
        row += [str(report.eta), str(report.mu), repr(float(report.discriminant.real))]
    else:
        row += ["", "", ""]
    return row


def cmd_scan(args) -> int:
    model = args.model
    names = ("a1", "a2", "a3") if model == "two-level" else ("a1", "a2", "a3", "a4", "a5", "a6")
    try:
        axes = []
        for name in names:
            raw = getattr(args, name)
            if raw is None:
                raise ValueError(f"scan over {model} requires --{name}")
            axes.append(_parse_range(raw))
    except ValueError as exc:
        return _fail(str(exc))

    total = 1
    for axis in axes:
        total *= len(axis)
    if total == 0:
        return _fail("empty grid")
    if total > SCAN_POINT_CAP:
        return _fail(f"grid holds {total} points, above the {SCAN_POINT_CAP} cap")

    tasks = []
    indices = [0] * len(axes)
    # Lexicographic order over grid indices, last axis fastest.
    while True:
        values = tuple(axes[i][indices[i]] for i in range(len(axes)))
        tasks.append((model, values, args.gamma))
        for i in reversed(range(len(axes))):
            indices[i] += 1
            if indices[i] < len(axes[i]):
                break
            indices[i] = 0
        else:
            break

    if args.workers > 1:
        import multiprocessing

        with multiprocessing.Pool(args.workers) as pool:
            rows = pool.map(_scan_point, tasks)  # map preserves task order
    else:
        rows = [_scan_point(t) for t in tasks]

    header = list(names) + ["cptp_domain", "nondegenerate", "eta", "mu", "discriminant"]
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_model_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", required=True, choices=["two-level", "three-level"])
    sub.add_argument(
        "--params",
        required=True,
        help="comma-separated a-coefficients (3 for two-level, 6 for three-level)",
    )
    sub.add_argument("--gamma", type=float, default=1.0, help="decoherence rate (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strobetomo",
        description="Stroboscopic tomography toolkit: generator diagnostics, "
        "observable admissibility, and single-observable state reconstruction.",
    )
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="relative rank tolerance (overrides STROBE_TOL; default 1e-9)",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_analyze = subs.add_parser("analyze", help="spectral and optimality report")
    _add_model_arguments(p_analyze)
    p_analyze.add_argument("--output", help="write the JSON report here instead of stdout")
    p_analyze.set_defaults(func=cmd_analyze)

    p_check = subs.add_parser("check-observable", help="observable admissibility check")
    _add_model_arguments(p_check)
    p_check.add_argument("--observable", required=True, help="observable matrix JSON file")
    p_check.add_argument("--output", help="write the JSON report here instead of stdout")
    p_check.set_defaults(func=cmd_check_observable)

    p_rec = subs.add_parser("reconstruct", help="run or invert a measurement campaign")
    _add_model_arguments(p_rec)
    p_rec.add_argument("--observable", help="observable matrix JSON file")
    p_rec.add_argument(
        "--observable-seed",
        type=int,
        help="draw a random admissible observable from this seed instead",
    )
    p_rec.add_argument("--rho0", help="initial state JSON file (simulation mode)")
    p_rec.add_argument(
        "--shots",
        default="exact",
        help='shot count per instant, or "exact" (simulation mode; default exact)',
    )
    p_rec.add_argument("--seed", type=int, help="measurement RNG seed (finite shots)")
    p_rec.add_argument(
        "--grid",
        default="default",
        help='"default" for the equispaced spectral grid, or comma-separated instants',
    )
    p_rec.add_argument("--records", help="invert this measurement CSV instead of simulating")
    p_rec.add_argument("--records-out", help="also write simulated records to this CSV")
    p_rec.add_argument(
        "--psd-project",
        action="store_true",
        help="include the eigenvalue-clipped PSD variant in the report",
    )
    p_rec.add_argument("--output", help="write the JSON result here instead of stdout")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_scan = subs.add_parser("scan", help="sweep parameter grids to CSV")
    p_scan.add_argument("--model", required=True, choices=["two-level", "three-level"])
    for name in ("a1", "a2", "a3", "a4", "a5", "a6"):
        p_scan.add_argument(f"--{name}", help=f"{name} value or lo:hi:step range")
    p_scan.add_argument("--gamma", type=float, default=1.0)
    p_scan.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")
    p_scan.add_argument("--output", help="write CSV here instead of stdout")
    p_scan.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    previous = os.environ.get("STROBE_TOL")
    if args.tol is not None:
        if args.tol <= 0:
            return _fail(f"--tol must be positive, got {args.tol}")
        os.environ["STROBE_TOL"] = repr(args.tol)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_INPUT
    finally:
        if args.tol is not None:  # keep the override scoped to this invocation
            if previous is None:
                os.environ.pop("STROBE_TOL", None)
            else:
                os.environ["STROBE_TOL"] = previous


if __name__ == "__main__":
    sys.exit(main())
