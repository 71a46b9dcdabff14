"""Command-line front end: generate or load a pencil, solve, compare, report.

Usage revolves around one ``solve`` command.  The input pencil comes either
from a pair of Matrix Market files or from a generator spec file (flat
key=value lines).  Results are written as JSON or CSV; quadrature sweeps
and baseline comparisons are optional extra sections.  See the README for
the file formats.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import baselines as _baselines
from . import contour as _contour
from . import mmio
from ._rng import stream
from .errors import (
    ConfigurationError,
    ContourEigError,
    InputFormatError,
    SolveFailureError,
)
from .lsq import METHODS, LsqConfig
from .pencil import (
    Embedding,
    KroneckerSpec,
    MatrixPencil,
    make_kronecker_pencil,
    max_relative_error,
    sample_finite_eigs,
    sample_nilpotent_sizes,
)

__all__ = ["main", "entry", "parse_complex", "run_comparison"]

SCHEMA_VERSION = 1

_STEP_LABELS = (
    ("setup", "1 probes and quadrature"),
    ("moments", "2 moment assembly"),
    ("truncation", "3 svd truncation"),
    ("reduced_eig", "4 reduced eigenproblem"),
    ("recovery", "5 eigenpair recovery"),
)


class _UsageError(ContourEigError, ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' style scalars, including bare-coefficient forms like '1+i'."""
    s = text.strip().replace(" ", "").replace("i", "j")
    if s in ("j", "+j"):
        s = "1j"
    elif s == "-j":
        s = "-1j"
    else:
        s = re.sub(r"(?<![0-9.])j", "1j", s)
    try:
        return complex(s)
    except ValueError as exc:
        raise _UsageError(f"cannot parse complex scalar {text!r}") from exc


def _parse_spec_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InputFormatError(f"{path}:{lineno}: expected key = value")
                key, value = line.split("=", 1)
                entries[key.strip().lower()] = value.strip()
    except OSError as exc:
        raise InputFormatError(f"cannot read spec file {path}: {exc}") from exc
    return entries


_SPEC_KEYS = {
    "finite_eigs", "eta", "t", "nilpotent_sizes", "rho", "q", "r", "nu",
    "m", "n", "embed", "seed",
}


def build_generator_spec(entries: dict[str, str], center: complex, radius: float) -> KroneckerSpec:
    """Assemble a generation spec from parsed key=value entries.

    Either explicit ``finite_eigs`` ("lam:size, lam:size") or ``eta`` with an
    optional forced in-region count ``t`` (sampled clear of the circle);
    either explicit ``nilpotent_sizes`` or a sampled partition of ``rho``.
    ``m``/``n`` may replace ``r``/``q``, which are then derived from the
    block dimension identity.
    """
    unknown = set(entries) - _SPEC_KEYS
    if unknown:
        raise InputFormatError(f"unknown spec keys: {sorted(unknown)}")
    seed = int(entries.get("seed", "0"))

    if "finite_eigs" in entries and "eta" in entries:
        raise InputFormatError("give either finite_eigs or eta, not both")
    if "finite_eigs" in entries:
        finite = []
        for item in re.split(r"[;,]", entries["finite_eigs"]):
            item = item.strip()
            if not item:
                continue
            if ":" in item:
                lam_text, size_text = item.rsplit(":", 1)
                finite.append((parse_complex(lam_text), int(size_text)))
            else:
                finite.append((parse_complex(item), 1))
    elif "eta" in entries:
        eta = int(entries["eta"])
        forced = int(entries["t"]) if "t" in entries else None
        lams = sample_finite_eigs(
            eta, seed, center=center, radius=radius, forced_inside=forced
        )
        finite = [(lam, 1) for lam in lams]
    else:
        raise InputFormatError("spec needs finite_eigs or eta")

    if "nilpotent_sizes" in entries and "rho" in entries:
        raise InputFormatError("give either nilpotent_sizes or rho, not both")
    if "nilpotent_sizes" in entries:
        sizes = tuple(
            int(tok) for tok in re.split(r"[;,]", entries["nilpotent_sizes"]) if tok.strip()
        )
    elif "rho" in entries:
        sizes = sample_nilpotent_sizes(int(entries["rho"]), seed)
    else:
        sizes = ()

    eta_total = sum(size for _, size in finite)
    rho_total = sum(sizes)
    nu = int(entries.get("nu", "0"))

    if "q" in entries:
        q = int(entries["q"])
    elif "n" in entries:
        q = int(entries["n"]) - eta_total - rho_total - nu
        if q < 0:
            raise InputFormatError("n is smaller than the block columns require")
    else:
        q = 0
    if "r" in entries:
        r = int(entries["r"])
    elif "m" in entries:
        r = int(entries["m"]) - eta_total - rho_total - (nu + 1 if nu else 0)
        if r < 0:
            raise InputFormatError("m is smaller than the block rows require")
    else:
        r = 0

    embed_text = entries.get("embed", "dense").lower()
    if embed_text.startswith("givens"):
        density = float(embed_text.split(":", 1)[1]) if ":" in embed_text else 0.001
        embed = Embedding.givens(density)
    elif embed_text in ("dense", "identity"):
        embed = Embedding(embed_text)
    else:
        raise InputFormatError(f"unknown embed value {embed_text!r}")

    return KroneckerSpec(
        finite_eigs=tuple(finite),
        nilpotent_sizes=sizes,
        q=q,
        r=r,
        nu=nu,
        embed=embed,
        seed=seed,
    )


def _parse_sweep(text: str) -> list[int]:
    match = re.fullmatch(r"(\d+):(\d+):(\d+)", text.strip())
    if not match:
        raise _UsageError(f"--sweep expects a:b:step, got {text!r}")
    start, stop, step = (int(g) for g in match.groups())
    if step < 1 or stop < start:
        raise _UsageError(f"--sweep range {text!r} is empty")
    return list(range(start, stop + 1, step))


def _float_or_none(value: float):
    return None if value is None or not math.isfinite(value) else value


def _pair_record(pair, vector_path: str | None, index: int) -> dict:
    record = {
        "lambda_re": _float_or_none(pair.eigenvalue.real if pair.finite else math.inf),
        "lambda_im": _float_or_none(pair.eigenvalue.imag if pair.finite else math.inf),
        "rrn": _float_or_none(pair.rrn),
        "in_region": pair.in_region,
    }
    if vector_path is not None:
        record["vector_path"] = f"{vector_path}#column={index}"
    return record


def run_comparison(pencil, cfg, kinds, truth=None):
    """Run the projection solver plus the requested baselines; tabulate outcomes.

    Baselines whose shape precondition fails are recorded with an error
    string instead of aborting the harness.
    """
    center, radius = cfg.center, cfg.radius
    expected = truth.count_inside(center, radius) if truth is not None else None
    true_inside = truth.eigs_inside(center, radius) if truth is not None else None

    rows = []
    start = time.perf_counter()
    proposed = _contour.solve(pencil, cfg)
    elapsed = time.perf_counter() - start
    rows.append(_comparison_row("proposed", proposed, expected, true_inside, elapsed))

    for kind in kinds:
        label = kind if isinstance(kind, str) else kind.value
        filtered = label.endswith("p")
        base_kind = _baselines.BaselineKind(label[:-1] if filtered else label)
        try:
            start = time.perf_counter()
            result = _baselines.run_baseline(
                pencil,
                base_kind,
                (center, radius),
                cfg.seed,
                contour_cfg=cfg if filtered else None,
            )
            elapsed = time.perf_counter() - start
        except ContourEigError as exc:
            rows.append({"method": label, "error": str(exc)})
            continue
        rows.append(_comparison_row(label, result, expected, true_inside, elapsed))
    return rows


def _comparison_row(method, result, expected, true_inside, elapsed):
    rerr = math.nan
    if true_inside is not None and len(true_inside):
        rerr = max_relative_error(result.in_region_eigenvalues(), true_inside)
    return {
        "method": method,
        "found_in_region": result.found_in_region,
        "expected": expected,
        "max_rerr": _float_or_none(rerr),
        "max_rrn": _float_or_none(result.max_rrn()),
        "seconds": elapsed,
    }


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _write_text(path, text)


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contoureig",
        description="Interior eigenvalues of (possibly nonsquare) matrix pencils",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="solve one pencil inside a circular region")
    p.add_argument("--matrix-a", help="Matrix Market file for A")
    p.add_argument("--matrix-b", help="Matrix Market file for B")
    p.add_argument("--generate", help="generator spec file (key = value lines)")
    p.add_argument("--center", default="0+0i", help="region center, e.g. 1+1i")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("-N", "--num-quad", type=int, default=48)
    p.add_argument("-L", "--probes", type=int, default=4)
    p.add_argument("-M", "--moments", type=int, default=2)
    p.add_argument("--solver", choices=METHODS, default="dense-pinv")
    p.add_argument("--tol", type=float, default=1e-14)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep", help="quadrature sweep a:b:step (needs --generate)")
    p.add_argument("--baselines", help="comma list from f1,f2,f3,f4,f1p,f3p")
    p.add_argument("--timing", action="store_true", help="print per-step timing table")
    p.add_argument("--vectors", action="store_true", help="write eigenvectors to a sidecar file")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--threads", type=int, default=0, help="node-solve workers (0 = all cores)")
    return parser


def _load_input(args, center, radius):
    has_files = args.matrix_a is not None or args.matrix_b is not None
    if args.generate and has_files:
        raise _UsageError("choose one input: --generate or --matrix-a/--matrix-b")
    if args.generate:
        spec = build_generator_spec(_parse_spec_file(args.generate), center, radius)
        return make_kronecker_pencil(spec)
    if args.matrix_a is None or args.matrix_b is None:
        raise _UsageError("need both --matrix-a and --matrix-b, or --generate")
    a = mmio.read_matrix(args.matrix_a)
    b = mmio.read_matrix(args.matrix_b)
    return MatrixPencil(a, b), None


def _print_timing(timings) -> None:
    shares = timings.shares()
    print("step                       seconds    share")
    for key, label in _STEP_LABELS:
        seconds = getattr(timings, key)
        print(f"{label:<25}{seconds:>10.4f}{shares[key]:>9.2%}")
    print(f"{'total':<25}{timings.total:>10.4f}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code in (0, None) else 1

        center = parse_complex(args.center)
        if args.radius <= 0:
            raise _UsageError("--radius must be positive")
        threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
        cfg = _contour.ContourConfig(
            center=center,
            radius=args.radius,
            num_quad=args.num_quad,
            probes=args.probes,
            moments=args.moments,
            lsq=LsqConfig(method=args.solver, rel_tol=args.tol, max_iters=args.max_iters),
            seed=args.seed,
            threads=threads,
        )
        pencil, truth = _load_input(args, center, cfg.radius)

        if args.sweep:
            if truth is None:
                raise _UsageError("--sweep requires --generate (ground truth for errors)")
            n_values = _parse_sweep(args.sweep)
            rows = _contour.convergence_sweep(pencil, cfg, n_values, truth=truth)
            fmt = args.format or "csv"
            if fmt == "csv":
                text = _csv_text(
                    ("N", "max_rerr", "max_rrn", "seconds"),
                    [(r.num_quad, repr(r.max_rerr), repr(r.max_rrn), repr(r.seconds)) for r in rows],
                )
                _write_text(args.out, text)
            else:
                payload = {
                    "schema_version": SCHEMA_VERSION,
                    "sweep": [
                        {
                            "N": r.num_quad,
                            "max_rerr": _float_or_none(r.max_rerr),
                            "max_rrn": _float_or_none(r.max_rrn),
                            "seconds": r.seconds,
                        }
                        for r in rows
                    ],
                }
                _write_json(args.out, payload)
            return 0

        result, timings = _contour.solve_timed(pencil, cfg)
        if args.timing:
            _print_timing(timings)

        vector_path = None
        if args.vectors:
            base = args.out if args.out not in (None, "-") else "results"
            vector_path = f"{base}.vectors.mtx"
            if result.pairs:
                mmio.write_matrix(vector_path, np.column_stack([p.vector for p in result.pairs]))

        comparison = None
        if args.baselines:
            kinds = [tok.strip().lower() for tok in args.baselines.split(",") if tok.strip()]
            valid = {"f1", "f2", "f3", "f4", "f1p", "f3p"}
            bad = set(kinds) - valid
            if bad:
                raise _UsageError(f"unknown baselines: {sorted(bad)}")
            comparison = run_comparison(pencil, cfg, kinds, truth=truth)

        fmt = args.format or "json"
        if fmt == "json":
            payload = {
                "schema_version": SCHEMA_VERSION,
                "region": {
                    "center_re": center.real,
                    "center_im": center.imag,
                    "radius": cfg.radius,
                },
                "num_in_region": result.found_in_region,
                "pairs": [
                    _pair_record(pair, vector_path, idx)
                    for idx, pair in enumerate(result.pairs)
                ],
            }
            if truth is not None:
                payload["expected_in_region"] = truth.count_inside(center, cfg.radius)
            if comparison is not None:
                payload["comparison"] = comparison
            _write_json(args.out, payload)
        else:
            if comparison is not None:
                header = ("method", "found_in_region", "expected", "max_rerr", "max_rrn", "seconds")
                rows = [
                    tuple(_fmt_cell(row.get(key)) for key in header)
                    for row in comparison
                ]
            else:
                header = ("lambda_re", "lambda_im", "rrn", "in_region")
                rows = [
                    (
                        repr(p.eigenvalue.real if p.finite else math.inf),
                        repr(p.eigenvalue.imag if p.finite else math.inf),
                        repr(p.rrn),
                        p.in_region,
                    )
                    for p in result.pairs
                ]
            _write_text(args.out, _csv_text(header, rows))
        return 0
    except SolveFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ContourEigError, ConfigurationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
