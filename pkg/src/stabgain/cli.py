"""Command-line interface: ``stabgain analyze | locus | check | trials``.

System specification files are JSON with ascending coefficient order
(constant term first), for example::

    {"domain": "continuous",
     "fraction": {"den": [0.1304, 1.21, 0.825, 1.0], "num": [12.5, 7.5, 1.0]}}

or ``{"domain": ..., "matrices": {"A": [[...]], "b": [...], "c": [...]}}``.
An optional ``"tolerances"`` object overrides fields of
:class:`~stabgain.gain_intervals.AnalysisOptions`; command-line flags take
precedence over both.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .gain_intervals import AnalysisOptions, AnalysisReport, EmptyStabilizingSet, analyze
from .lti import NonMinimal, StateSpaceSiso, TransferFraction, closed_loop_poly, companion_realization, is_minimal, to_transfer
from .poly import all_roots
from .stability import verdict

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGRADED = 2
EXIT_NOT_STABLE = 3


class SpecError(ValueError):
    pass


# -- spec files -------------------------------------------------------------


def load_spec(path) -> tuple[TransferFraction, dict]:
    """Parse a spec file into a transfer family and its tolerance overrides."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    return parse_spec(data)


def parse_spec(data: dict) -> tuple[TransferFraction, dict]:
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    domain = data.get("domain", "continuous")
    has_m, has_f = "matrices" in data, "fraction" in data
    if has_m == has_f:
        raise SpecError("spec needs exactly one of 'matrices' or 'fraction'")
    tolerances = data.get("tolerances", {}) or {}
    try:
        if has_m:
            m = data["matrices"]
            sys_ = StateSpaceSiso(np.array(m["A"], dtype=float), m["b"], m["c"], domain)
            tf = to_transfer(sys_)
        else:
            f = data["fraction"]
            den = np.asarray(f["den"], dtype=float)
            num = np.asarray(f["num"], dtype=float)
            nz = np.flatnonzero(den)
            if nz.size == 0:
                raise SpecError("denominator is zero")
            if den[nz[-1]] != 1.0:
                print(f"warning: denominator leading coefficient {float(den[nz[-1]]):g} normalized to 1", file=sys.stderr)
            tf = TransferFraction.from_coeffs(den, num, domain)
            if not is_minimal(companion_realization(tf)):
                raise NonMinimal("system is not minimal")
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed spec: {exc}") from exc
    return tf, dict(tolerances)


def build_options(overrides: dict, args) -> AnalysisOptions:
    names = {f.name for f in dataclasses.fields(AnalysisOptions)}
    unknown = set(overrides) - names
    if unknown:
        raise SpecError(f"unknown tolerances: {sorted(unknown)}")
    opts = dict(overrides)
    for name in ("real_tol", "dedup_tol", "eps"):
        value = getattr(args, name, None)
        if value is not None:
            opts[name] = value
    return AnalysisOptions(**opts)


# -- output -----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        if math.isnan(x):
            return '"nan"'
        return format(x, ".17g")
    return json.dumps(x)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats fixed at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _fmt(obj)


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "domain": report.domain,
        "n": report.n,
        "critical_gains": [
            {
                "k": g.k,
                "boundary": [{"param": b.param, "multiplicity": b.multiplicity} for b in g.boundary_roots],
                "tangent": g.tangent,
            }
            for g in report.critical_gains
        ],
        "intervals": [
            {
                "lo": iv.lo,
                "hi": iv.hi,
                "unstable_count": iv.unstable_count,
                "stabilizing": iv.stabilizing,
                "representative_k": iv.representative_k,
            }
            for iv in report.intervals
        ],
        "components": report.num_stabilizing_components,
        "bound": report.bound,
        "bound_satisfied": report.bound_satisfied,
        "unbounded_stabilizing": report.unbounded_stabilizing,
        "degraded": report.degraded,
        "flags": list(report.flags),
    }


def write_atomic(path, text: str):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(output, text)


# -- locus ------------------------------------------------------------------


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Reorder ``cur`` so each entry continues the nearest ``prev`` root
    (greedy on globally smallest distances)."""
    dist = np.abs(prev[:, None] - cur[None, :])
    out = np.empty_like(cur)
    free_p = set(range(prev.size))
    free_c = set(range(cur.size))
    for flat in np.argsort(dist, axis=None, kind="stable"):
        i, j = divmod(int(flat), cur.size)
        if i in free_p and j in free_c:
            out[i] = cur[j]
            free_p.discard(i)
            free_c.discard(j)
            if not free_p:
                break
    return out


def locus_rows(tf: TransferFraction, k_lo: float, k_hi: float, samples: int):
    prev = None
    for k in np.linspace(k_lo, k_hi, samples):
        roots = all_roots(closed_loop_poly(tf, k)).expanded()
        roots = np.array(sorted(roots, key=lambda z: (z.real, z.imag))) if prev is None else _match(prev, roots)
        worst = roots.real.max() if tf.domain == "continuous" else np.abs(roots).max()
        for i, z in enumerate(roots):
            yield float(k), i, float(z.real), float(z.imag), float(worst)
        prev = roots


def locus_csv(tf: TransferFraction, k_lo: float, k_hi: float, samples: int) -> str:
    buf = io.StringIO()
    buf.write("k,root_index,re,im,max_re_or_modulus\n")
    for k, i, re, im, worst in locus_rows(tf, k_lo, k_hi, samples):
        buf.write(f"{k:.17g},{i},{re:.17g},{im:.17g},{worst:.17g}\n")
    return buf.getvalue()


# -- commands ---------------------------------------------------------------


def cmd_analyze(args) -> int:
    tf, tol = load_spec(args.spec)
    report = analyze(tf, build_options(tol, args))
    _emit(dumps(report_to_dict(report)) + "\n", args.output)
    return EXIT_DEGRADED if report.degraded else EXIT_OK


def cmd_locus(args) -> int:
    tf, _ = load_spec(args.spec)
    if args.samples < 2 or not args.k_min < args.k_max:
        raise SpecError("need samples >= 2 and k_min < k_max")
    _emit(locus_csv(tf, args.k_min, args.k_max, args.samples), args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    tf, tol = load_spec(args.spec)
    eps = build_options(tol, args).eps
    v = verdict(closed_loop_poly(tf, args.k), tf.domain, eps)
    print(f"k = {args.k:.17g}: {v}")
    return EXIT_OK if v.stable else EXIT_NOT_STABLE


def cmd_trials(args) -> int:
    from .trials import run_trials

    opts = build_options({}, args)
    domains = ("continuous", "discrete") if args.domain == "both" else (args.domain,)
    ns = range(args.n_min, args.n_max + 1)
    summary = run_trials(ns, args.count, domains, args.seed, opts, args.workers)
    print("components histogram (n: {components: trials})")
    for n, hist in sorted(summary.histogram().items()):
        body = ", ".join(f"{c}: {hist[c]}" for c in sorted(hist))
        print(f"  n={n}: {{{body}}}  bound={math.ceil(n / 2)}")
    print(f"interlacing fraction: {summary.interlacing_fraction():.4f}")
    for r in summary.failures:
        print(f"FAIL n={r.n} domain={r.domain} seed={r.seed}: {', '.join(r.violations)}", file=sys.stderr)
    print(f"{len(summary.results)} trials, {len(summary.failures)} with violations")
    return EXIT_OK if summary.ok else EXIT_ERROR


def _add_tolerance_flags(p):
    d = AnalysisOptions()
    p.add_argument("--real-tol", type=float, help=f"realness tolerance for boundary roots (default {d.real_tol:g})")
    p.add_argument("--dedup-tol", type=float, help=f"relative critical-gain merge tolerance (default {d.dedup_tol:g})")
    p.add_argument("--eps", type=float, help=f"stability boundary tolerance (default {d.eps:g})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabgain", description="Stabilizing output-feedback gain intervals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decompose the gain axis and write a JSON report")
    p.add_argument("spec")
    p.add_argument("-o", "--output", help="report path (default stdout)")
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("locus", help="write root-locus samples as CSV")
    p.add_argument("spec")
    p.add_argument("--k-min", type=float, required=True)
    p.add_argument("--k-max", type=float, required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_locus)

    p = sub.add_parser("check", help="stability verdict at one gain")
    p.add_argument("spec")
    p.add_argument("k", type=float)
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("trials", help="randomized analyzer-versus-oracle suite")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--count", type=int, default=500, help="trials per n per domain")
    p.add_argument("--domain", choices=["continuous", "discrete", "both"], default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_trials)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NonMinimal, EmptyStabilizingSet, SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
