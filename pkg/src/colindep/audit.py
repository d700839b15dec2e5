"""Full battery orchestration: standardize, summarize, test, report.

``audit`` runs the whole pipeline on one matrix: demeaning and double
standardization, the correlation summary (total correlation, effective
sample size), the three order-sensitive permutation tests, the
eigenratio statistic against both simulated nulls, an optional
two-group bilinear test and the FDR outlier scan.  A single seed fans
out to per-stage substreams (the stage name is CRC-hashed into the
stream id) so each stage reproduces independently of which other stages
run.
"""

from __future__ import annotations

import json
import time
import warnings
import zlib
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .correlation import CorrelationReport, correlation_report
from .errors import ColindepError, InvalidInput
from .fdr import OutlierReport, scan_column_pairs
from .matrix import DataMatrix, StandardizeInfo, demean, double_standardize, spectral
from .normal import (
    SimulationSpec,
    bilinear_test,
    calibrate_gamma,
    eigenratio,
    eigenratio_null,
    two_sample_w,
)
from .permutation import TestResult, perm_pvalue

_PERM_STATS = ("block", "trend", "trace")


def stage_seed(seed: int, stage: str) -> int:
    """Derive the integer seed for a named stage from the master seed."""
    ss = np.random.SeedSequence((seed, zlib.crc32(stage.encode("utf-8"))))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class AuditConfig:
    """Knobs for the audit battery; defaults are desk-scale."""

    seed: int = 0
    L: int = 2000
    eigen_reps: int = 200
    q: float = 0.1
    min_block: int = 2
    max_block: int = 10
    pair_sample: int = 10_000
    tol: float = 1e-8
    max_iter: int = 50
    estimator: str = "eigen"
    fdr_null: str = "correlation"
    bilinear: bool | None = None
    sim_m: int = 2000
    sim_blocks: int = 5
    calib_reps: int = 4

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "L": self.L,
            "eigen_reps": self.eigen_reps,
            "q": self.q,
            "min_block": self.min_block,
            "max_block": self.max_block,
            "pair_sample": self.pair_sample,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "estimator": self.estimator,
            "fdr_null": self.fdr_null,
            "bilinear": self.bilinear,
            "sim_m": self.sim_m,
            "sim_blocks": self.sim_blocks,
            "calib_reps": self.calib_reps,
        }


@dataclass
class AuditReport:
    """Everything the battery produced, reproducible from (input, seed, config)."""

    m: int
    n: int
    groups: list[str] | None
    standardization: StandardizeInfo
    correlation: CorrelationReport
    tests: list[dict]
    outliers: OutlierReport | None
    config: AuditConfig
    warnings: list[str] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    def to_dict(self, exclude_timings: bool = False, include_pairs: bool = True) -> dict:
        group_summary = None
        if self.groups is not None:
            names = sorted(set(self.groups), key=self.groups.index)
            group_summary = {name: self.groups.count(name) for name in names}
        out = {
            "version": self.version,
            "input": {"m": self.m, "n": self.n, "groups": group_summary},
            "config": self.config.to_dict(),
            "standardization": {
                "iterations": self.standardization.iterations,
                "max_deviation": self.standardization.max_deviation,
                "order": self.standardization.order,
            },
            "correlation": self.correlation.to_dict(),
            "tests": self.tests,
            "outliers": self.outliers.to_dict(include_pairs) if self.outliers else None,
            "warnings": self.warnings,
            "errors": self.errors,
        }
        if not exclude_timings:
            out["timings"] = self.timings
        return out

    def to_json(self, exclude_timings: bool = False, include_pairs: bool = True) -> str:
        return json.dumps(
            self.to_dict(exclude_timings, include_pairs), sort_keys=True, indent=2
        )


def _group_sizes(groups: list[str]) -> tuple[int, int]:
    names = sorted(set(groups), key=groups.index)
    if len(names) != 2:
        raise InvalidInput(f"bilinear test needs exactly 2 groups, got {len(names)}")
    counts = [groups.count(name) for name in names]
    # the contrast assumes group one occupies the leading columns
    if groups != [names[0]] * counts[0] + [names[1]] * counts[1]:
        raise InvalidInput("group labels must be contiguous: group one first, then group two")
    return counts[0], counts[1]


def audit(x: DataMatrix, config: AuditConfig | None = None, groups: list[str] | None = None) -> AuditReport:
    """Run the full column-independence battery on one matrix.

    Recoverable stage failures (a degenerate eigengap, a failed
    calibration) are recorded in the report and the battery continues;
    errors in the standardization or correlation stages, which everything
    downstream depends on, are raised.
    """
    cfg = config or AuditConfig()
    if cfg.bilinear is True and groups is None:
        raise InvalidInput("bilinear test requested but no group labels were provided")
    report_warnings: list[str] = []
    errors: dict[str, str] = {}
    timings: dict[str, float] = {}

    @contextmanager
    def timed(stage: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            timings[stage] = time.perf_counter() - t0

    with timed("standardize"):
        z, info = double_standardize(demean(x), max_iter=cfg.max_iter, tol=cfg.tol)

    with timed("correlation"):
        spectrum = spectral(z)
        corr = correlation_report(
            z,
            pair_count=cfg.pair_sample,
            seed=stage_seed(cfg.seed, "correlation"),
            estimator=cfg.estimator,
            spectrum=spectrum,
        )
    if corr.mean_shift_flag:
        report_warnings.append(
            "sampled row correlations are far from centered; "
            "noise-corrected alpha estimates may be off"
        )

    tests: list[dict] = []
    for stat in _PERM_STATS:
        stage = f"perm_{stat}"
        with timed(stage):
            try:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    res: TestResult = perm_pvalue(
                        z,
                        stat,
                        L=cfg.L,
                        seed=stage_seed(cfg.seed, stage),
                        min_len=cfg.min_block,
                        max_len=cfg.max_block,
                    )
                for w in caught:
                    report_warnings.append(f"{stage}: {w.message}")
                tests.append(res.to_dict())
            except ColindepError as exc:
                errors[stage] = str(exc)

    s_obs = eigenratio(spectrum)
    with timed("eigenratio_wishart"):
        try:
            seed = stage_seed(cfg.seed, "eigenratio_wishart")
            nulls = eigenratio_null(
                "wishart", reps=cfg.eigen_reps, n=z.n, seed=seed, df=corr.m_tilde
            )
            exceed = int(np.sum(nulls >= s_obs))
            tests.append(
                {
                    "method": "eigenratio_wishart",
                    "statistic": s_obs,
                    "p_value": exceed / nulls.size,
                    "L": int(nulls.size),
                    "exceed_count": exceed,
                    "seed": seed,
                    "df": corr.m_tilde,
                }
            )
        except ColindepError as exc:
            errors["eigenratio_wishart"] = str(exc)

    with timed("eigenratio_blocks"):
        try:
            alpha = float(np.sqrt(corr.alpha_hat_sq))
            sim_m = min(z.m, cfg.sim_m)
            if alpha > 0.005:
                gamma = calibrate_gamma(
                    alpha,
                    m=sim_m,
                    n=z.n,
                    num_blocks=cfg.sim_blocks,
                    reps=cfg.calib_reps,
                    seed=stage_seed(cfg.seed, "calibrate"),
                )
            else:
                gamma = 0.0
            seed = stage_seed(cfg.seed, "eigenratio_blocks")
            spec = SimulationSpec(
                m=sim_m, n=z.n, sigma_model="block",
                num_blocks=cfg.sim_blocks, gamma=gamma,
            )
            nulls = eigenratio_null(
                "correlated_rows", reps=cfg.eigen_reps, n=z.n, seed=seed, spec=spec
            )
            exceed = int(np.sum(nulls >= s_obs))
            tests.append(
                {
                    "method": "eigenratio_blocks",
                    "statistic": s_obs,
                    "p_value": exceed / nulls.size,
                    "L": int(nulls.size),
                    "exceed_count": exceed,
                    "seed": seed,
                    "gamma": gamma,
                    "sim_m": sim_m,
                }
            )
        except ColindepError as exc:
            errors["eigenratio_blocks"] = str(exc)

    run_bilinear = cfg.bilinear if cfg.bilinear is not None else groups is not None
    if run_bilinear:
        with timed("bilinear"):
            try:
                n1, n2 = _group_sizes(groups)
                res = bilinear_test(z, two_sample_w(n1, n2), corr.m_tilde)
                entry = res.to_dict()
                entry["n1"], entry["n2"] = n1, n2
                tests.append(entry)
            except ColindepError as exc:
                errors["bilinear"] = str(exc)

    outliers: OutlierReport | None = None
    with timed("fdr"):
        try:
            if cfg.fdr_null == "gaussian":
                outliers = scan_column_pairs(
                    z,
                    corr.m_tilde,
                    cfg.q,
                    null_model="gaussian",
                    gauss_mu=corr.mu_hat,
                    gauss_sd=float(np.sqrt(corr.alpha_hat_sq)) or 1e-12,
                )
            else:
                outliers = scan_column_pairs(z, corr.m_tilde, cfg.q, null_model="correlation")
        except ColindepError as exc:
            errors["fdr"] = str(exc)

    return AuditReport(
        m=x.m,
        n=x.n,
        groups=groups,
        standardization=info,
        correlation=corr,
        tests=tests,
        outliers=outliers,
        config=cfg,
        warnings=report_warnings,
        errors=errors,
        timings=timings,
    )


def emit(report: AuditReport, format: str = "json", include_pairs: bool = True) -> str:
    """Render an audit report as canonical JSON or a readable text table."""
    if format == "json":
        return report.to_json(include_pairs=include_pairs)
    if format != "text":
        raise InvalidInput("format must be 'json' or 'text'")
    corr = report.correlation
    group_note = ""
    if report.groups:
        names = sorted(set(report.groups), key=report.groups.index)
        group_note = ", groups " + "+".join(str(report.groups.count(g)) for g in names)
    lines = [
        f"colindep audit v{report.version}",
        f"input: {report.m} x {report.n}" + group_note,
        f"standardization: {report.standardization.iterations} sweeps, "
        f"max deviation {report.standardization.max_deviation:.2e}",
        f"c2 = {corr.c2:.6f}  alpha_hat = {np.sqrt(corr.alpha_hat_sq):.4f}  "
        f"m_tilde = {corr.m_tilde:.2f}  (estimator: {corr.estimator})",
        "",
        f"{'test':<24}{'statistic':>14}{'p':>10}",
    ]
    for t in report.tests:
        stat = t.get("statistic", t.get("tau_hat"))
        p = t.get("p_value")
        p_str = f"{p:.4g}" if p is not None else "-"
        lines.append(f"{t['method']:<24}{stat:>14.6g}{p_str:>10}")
    if report.outliers is not None:
        o = report.outliers
        thr = "none" if o.threshold_r is None else f"{o.threshold_r:.3f}"
        lines.append("")
        lines.append(
            f"fdr scan (q={o.q}, null={o.null_model}): "
            f"{int(o.discoveries.size)} of {o.n_pairs} pairs flagged, threshold r = {thr}"
        )
    for stage, msg in report.errors.items():
        lines.append(f"error [{stage}]: {msg}")
    for msg in report.warnings:
        lines.append(f"warning: {msg}")
    return "\n".join(lines) + "\n"
