"""Command-line front end.

Subcommands: standardize, permtest, eigenratio-test, bilinear, fdr-scan,
simulate, audit.  Exit codes: 0 success, 1 usage or parse error, 2
numerical failure.  Threading is delegated to the BLAS backend (control
it with the usual OMP_NUM_THREADS-style variables); no other
environment variables are consulted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .audit import AuditConfig, audit, emit, stage_seed
from .correlation import correlation_report
from .errors import (
    CalibrationFailure,
    InvalidInput,
    NonConvergence,
    NumericalError,
    ParseError,
)
from .fdr import scan_column_pairs
from .io import ParseOptions, ingest, write_matrix
from .matrix import demean, double_standardize, spectral
from .normal import (
    SimulationSpec,
    bilinear_test,
    eigenratio,
    eigenratio_null,
    sample_matrix_normal,
    sample_wishart,
    two_sample_w,
)
from .permutation import perm_pvalue

_USAGE_ERRORS = (InvalidInput, ParseError)
_NUMERICAL_ERRORS = (NonConvergence, NumericalError, CalibrationFailure, np.linalg.LinAlgError)


def _add_common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("input", help="CSV/TSV matrix, rows = features, columns = samples")
        p.add_argument("--delimiter", default=None, help="field delimiter (default: by extension)")
        p.add_argument("--header", choices=["auto", "yes", "no"], default="auto")
        p.add_argument("--row-ids", choices=["auto", "yes", "no"], default="auto")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("--tol", type=float, default=1e-8, help="standardization tolerance")
    p.add_argument("--max-iter", type=int, default=50, help="standardization sweep cap")


def _parse_groups(arg: str | None) -> tuple[int, ...] | None:
    if arg is None:
        return None
    try:
        sizes = tuple(int(tok) for tok in arg.split(","))
    except ValueError:
        raise InvalidInput(f"--groups expects comma-separated integers, got {arg!r}") from None
    if any(s < 1 for s in sizes):
        raise InvalidInput("group sizes must be positive")
    return sizes


def _load(args) -> tuple:
    opts = ParseOptions(
        delimiter=args.delimiter,
        header=args.header,
        row_ids=args.row_ids,
        group_sizes=_parse_groups(getattr(args, "groups", None)),
        groups_file=getattr(args, "groups_file", None),
    )
    return ingest(args.input, opts)


def _standardized(args):
    x, labels = _load(args)
    z, info = double_standardize(demean(x), max_iter=args.max_iter, tol=args.tol)
    return z, info, labels


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _emit_dict(payload: dict, args) -> None:
    if args.format == "json":
        _write_output(json.dumps(payload, sort_keys=True, indent=2), args.out)
    else:
        lines = [f"{k}: {v}" for k, v in payload.items() if not isinstance(v, (list, dict))]
        _write_output("\n".join(lines), args.out)


def _cmd_standardize(args) -> int:
    z, info, _ = _standardized(args)
    if args.matrix_out:
        write_matrix(args.matrix_out, z)
    payload = {
        "m": z.m,
        "n": z.n,
        "iterations": info.iterations,
        "max_deviation": info.max_deviation,
        "order": info.order,
        "matrix_out": args.matrix_out,
    }
    _emit_dict(payload, args)
    return 0


def _cmd_permtest(args) -> int:
    z, _, _ = _standardized(args)
    res = perm_pvalue(
        z,
        args.stat,
        L=args.L,
        seed=args.seed,
        min_len=args.min_block,
        max_len=args.max_block,
        conservative=args.conservative,
    )
    if args.null_out:
        with open(args.null_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["null_sample"])
            for v in res.null_samples:
                writer.writerow([repr(float(v))])
    _emit_dict(res.to_dict(), args)
    return 0


def _cmd_eigenratio(args) -> int:
    z, _, _ = _standardized(args)
    spectrum = spectral(z)
    s_obs = eigenratio(spectrum)
    report = correlation_report(z, seed=stage_seed(args.seed, "correlation"))
    if args.null == "wishart":
        nulls = eigenratio_null("wishart", args.reps, z.n, args.seed, df=report.m_tilde)
        extra = {"df": report.m_tilde}
    else:
        spec = SimulationSpec(
            m=min(z.m, args.sim_m), n=z.n, sigma_model="block",
            num_blocks=args.blocks, gamma=args.gamma,
        )
        nulls = eigenratio_null("correlated_rows", args.reps, z.n, args.seed, spec=spec)
        extra = {"gamma": args.gamma, "sim_m": spec.m}
    exceed = int(np.sum(nulls >= s_obs))
    payload = {
        "method": f"eigenratio_{args.null}",
        "statistic": s_obs,
        "p_value": exceed / nulls.size,
        "L": int(nulls.size),
        "exceed_count": exceed,
        "seed": args.seed,
        **extra,
    }
    if args.null_out:
        with open(args.null_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["null_sample"])
            for v in nulls:
                writer.writerow([repr(float(v))])
    _emit_dict(payload, args)
    return 0


def _cmd_bilinear(args) -> int:
    z, _, labels = _standardized(args)
    if labels is None:
        raise InvalidInput("bilinear needs group labels (--groups n1,n2 or --groups-file)")
    names = sorted(set(labels), key=labels.index)
    if len(names) != 2:
        raise InvalidInput(f"bilinear needs exactly two groups, got {len(names)}")
    n1, n2 = labels.count(names[0]), labels.count(names[1])
    report = correlation_report(z, seed=stage_seed(args.seed, "correlation"))
    res = bilinear_test(z, two_sample_w(n1, n2), report.m_tilde)
    payload = res.to_dict()
    payload["n1"], payload["n2"] = n1, n2
    _emit_dict(payload, args)
    return 0


def _cmd_fdr_scan(args) -> int:
    z, _, _ = _standardized(args)
    report = correlation_report(z, seed=stage_seed(args.seed, "correlation"))
    m_tilde = report.m_tilde if args.mtilde == "auto" else float(args.mtilde)
    if args.null == "corr":
        out = scan_column_pairs(z, m_tilde, args.q, "correlation", two_sided=args.two_sided)
    else:
        out = scan_column_pairs(
            z,
            m_tilde,
            args.q,
            "gaussian",
            gauss_mu=report.mu_hat,
            gauss_sd=float(np.sqrt(report.alpha_hat_sq)) or 1e-12,
            two_sided=args.two_sided,
        )
    if args.hist_out:
        counts, edges = np.histogram(out.r, bins=args.bins, range=(-1.0, 1.0))
        with open(args.hist_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_left", "bin_right", "count"])
            for k in range(counts.size):
                writer.writerow([repr(float(edges[k])), repr(float(edges[k + 1])), int(counts[k])])
    _emit_dict(out.to_dict(include_pairs=args.format == "json"), args)
    return 0


def _cmd_simulate(args) -> int:
    if args.out is None:
        raise InvalidInput("simulate requires --out for the draw file")
    rows = []
    if args.model == "wishart":
        if args.df is None:
            raise InvalidInput("--df is required for the wishart model")
        draws = sample_wishart(args.df, np.eye(args.n), seed=args.seed, size=args.reps)
        for k in range(args.reps):
            vals = np.clip(np.linalg.eigvalsh(draws[k]), 0.0, None)
            c2 = float(np.sum(vals**2) / args.n**2)
            rows.append([float(vals[-1] / vals.sum()), c2, float(np.trace(draws[k]))])
    else:
        if args.model == "blocks":
            spec = SimulationSpec(
                m=args.m, n=args.n, sigma_model="block",
                num_blocks=args.blocks, gamma=args.gamma,
            )
        else:
            beta = np.full(args.n, 1.0 / np.sqrt(args.n))
            spec = SimulationSpec(
                m=args.m, n=args.n, delta_model="spiked",
                spike_lambda=getattr(args, "lambda"), spike_beta=beta,
            )
        for rep in range(args.reps):
            rng = np.random.default_rng(np.random.SeedSequence((args.seed, rep)))
            x = sample_matrix_normal(spec, rng)
            z, _ = double_standardize(x, max_iter=200)
            s = spectral(z)
            e = s.eigenvalues
            c2 = float(np.sum(e * e) / (z.m * z.n) ** 2)
            rows.append([float(e[0] / e.sum()), c2, float(e.sum() / z.m)])
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eigenratio", "c2", "trace"])
        for row in rows:
            writer.writerow([repr(v) for v in row])
    sys.stdout.write(f"wrote {len(rows)} replicates to {args.out}\n")
    return 0


def _cmd_audit(args) -> int:
    x, labels = _load(args)
    cfg = AuditConfig(
        seed=args.seed,
        L=args.L,
        eigen_reps=args.reps,
        q=args.q,
        min_block=args.min_block,
        max_block=args.max_block,
        tol=args.tol,
        max_iter=args.max_iter,
        fdr_null=args.fdr_null,
        bilinear=True if args.bilinear else None,
    )
    report = audit(x, cfg, groups=labels)
    _write_output(emit(report, format=args.format), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colindep",
        description="Test whether the columns of a row-correlated matrix are independent.",
    )
    parser.add_argument("--version", action="version", version=f"colindep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("standardize", help="demean and doubly standardize a matrix")
    _add_common(p)
    p.add_argument("--matrix-out", default=None, help="write the standardized matrix here")
    p.set_defaults(func=_cmd_standardize)

    p = sub.add_parser("permtest", help="permutation test of column-wise i.i.d.")
    _add_common(p)
    p.add_argument("--stat", choices=["block", "trend", "trace"], required=True)
    p.add_argument("--L", type=int, default=5000, help="number of permutations")
    p.add_argument("--min-block", type=int, default=2)
    p.add_argument("--max-block", type=int, default=10)
    p.add_argument("--conservative", action="store_true", help="use (count+1)/(L+1)")
    p.add_argument("--null-out", default=None, help="dump null samples to this CSV")
    p.set_defaults(func=_cmd_permtest)

    p = sub.add_parser("eigenratio-test", help="eigenratio statistic against a simulated null")
    _add_common(p)
    p.add_argument("--null", choices=["wishart", "blocks"], default="wishart")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--gamma", type=float, default=0.0, help="block effect size for --null blocks")
    p.add_argument("--blocks", type=int, default=5)
    p.add_argument("--sim-m", type=int, default=2000)
    p.add_argument("--null-out", default=None)
    p.set_defaults(func=_cmd_eigenratio)

    p = sub.add_parser("bilinear", help="two-group bilinear statistic")
    _add_common(p)
    p.add_argument("--groups", default=None, help="comma-separated group sizes, e.g. 44,19")
    p.add_argument("--groups-file", default=None, help="file with one group label per column")
    p.set_defaults(func=_cmd_bilinear)

    p = sub.add_parser("fdr-scan", help="FDR scan of pairwise column correlations")
    _add_common(p)
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--null", choices=["corr", "gauss"], default="corr")
    p.add_argument("--mtilde", default="auto", help="effective sample size, or 'auto'")
    p.add_argument("--two-sided", action="store_true")
    p.add_argument("--hist-out", default=None, help="write correlation histogram bins to CSV")
    p.add_argument("--bins", type=int, default=40)
    p.set_defaults(func=_cmd_fdr_scan)

    p = sub.add_parser("simulate", help="draw replicate statistics from a null model")
    _add_common(p, needs_input=False)
    p.add_argument("--model", choices=["wishart", "blocks", "spiked"], required=True)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--n", type=int, default=44)
    p.add_argument("--df", type=float, default=None)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--lambda", type=float, default=0.0, dest="lambda")
    p.add_argument("--blocks", type=int, default=5)
    p.add_argument("--reps", type=int, default=100)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("audit", help="run the full battery and emit a report")
    _add_common(p)
    p.add_argument("--L", type=int, default=2000)
    p.add_argument("--reps", type=int, default=200, help="eigenratio null replicates")
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--min-block", type=int, default=2)
    p.add_argument("--max-block", type=int, default=10)
    p.add_argument("--fdr-null", choices=["correlation", "gaussian"], default="correlation")
    p.add_argument("--bilinear", action="store_true", help="require the two-group test")
    p.add_argument("--groups", default=None)
    p.add_argument("--groups-file", default=None)
    p.set_defaults(func=_cmd_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit status 2 for usage errors; this tool reserves
        # 2 for numerical failures, so remap
        return 1 if exc.code == 2 else int(exc.code or 0)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
