"""Seeded Monte-Carlo sweeps, aggregation, and CSV emission.

Reproducibility contract: every number a trial produces is a deterministic
function of (master seed, axis name, axis value, trial index). Trials use
a counter-based Philox stream keyed by a stable hash of that tuple, so
adding trials or axis values never perturbs existing ones, and trials can
run in any order or in parallel. Device geometry (positions, LOS
directions, per-device variances) is frozen per scenario from a separate
stream; preambles, activity, rain, fading, and noise are redrawn per trial.

Wall-clock timings are never written into trials.csv (its bytes must be
identical across reruns); they go to a sidecar timings.csv.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines, detection, vbi
from .channel import draw_channels, device_state_matrix, sample_device_geometry
from .config import ScenarioConfig, SweepSpec, apply_axis
from .signals import (assemble_preamble_matrix, gen_preambles,
                      snr_to_noise_variance, synthesize_received)
from .tensors import unfold_last

TRIALS_HEADER = ["axis", "value", "algorithm", "trial", "pe", "nmse", "nmse_active", "iters"]
SUMMARY_HEADER = ["axis", "value", "algorithm", "n",
                  "pe_mean", "pe_std", "pe_ci95",
                  "nmse_mean", "nmse_std", "nmse_ci95",
                  "nmse_active_mean", "iters_mean"]
TIMINGS_HEADER = ["axis", "value", "algorithm", "trial", "wall_ms"]
TRACE_HEADER = ["trial", "iteration", "residual", "max_col_energy"]


@dataclass(frozen=True)
class TrialRecord:
    axis: str
    value: str
    algorithm: str
    trial: int
    pe: float
    nmse: float
    nmse_active: float
    iters: int
    wall_ms: float
    failed: bool = False


def _stable_seed(*parts) -> int:
    digest = hashlib.blake2s("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def trial_rng(master_seed: int, axis: str, value: str, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(_stable_seed(master_seed, axis, value, trial)))


def geometry_rng(cfg: ScenarioConfig) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        _stable_seed(cfg.master_seed, "geometry", cfg.K, cfg.M)))


def scenario_geometry(cfg: ScenarioConfig):
    return sample_device_geometry(
        cfg.K, cfg.M, geometry_rng(cfg),
        theta_max_deg=cfg.theta_max_deg,
        rician_factor=cfg.rician_factor,
        hlos_norm_sq_range=(cfg.hlos_norm_sq_low, cfg.hlos_norm_sq_high),
        v_nlos_range=(cfg.v_nlos_low, cfg.v_nlos_high),
        xi=cfg.xi,
    )


def run_trial(cfg: ScenarioConfig, axis: str, value: str, trial: int,
              collect_traces: bool = False
              ) -> tuple[list[TrialRecord], list[tuple]]:
    """Run every requested algorithm on one synthesized scene."""
    rng = trial_rng(cfg.master_seed, axis, value, trial)
    preambles = gen_preambles(cfg.dims, cfg.K, rng)
    geom = scenario_geometry(cfg)
    lb = cfg.link_budget()
    ch = draw_channels(lb, geom, cfg.M, cfg.p_a, rng)
    X_true = device_state_matrix(ch, geom.xi)
    sigma_n2 = snr_to_noise_variance(cfg.snr_db, cfg.xi)
    Y = synthesize_received(preambles, X_true, sigma_n2, rng)
    have_active = bool(np.any(ch.alpha == 1))

    records: list[TrialRecord] = []
    trace_rows: list[tuple] = []
    for algo in cfg.algos:
        t0 = time.perf_counter()
        try:
            if algo == "vbi":
                engine_cfg = vbi.EngineConfig(
                    eps=cfg.eps, max_iters=cfg.max_iters, rel_tol=cfg.rel_tol,
                    threshold_ratio=cfg.threshold_ratio)
                result = vbi.run(preambles, Y, engine_cfg)
                x_hat = result.M_X
                det = detection.detect(x_hat, cfg.threshold_ratio, cfg.xi)
                alpha_hat = det.alpha_hat
                iters = result.n_iters
                if collect_traces:
                    trace_rows.extend((trial, it, res, mc) for it, res, mc in result.trace)
            elif algo == "somp":
                Y_mat = unfold_last(Y).T  # L x M
                A = assemble_preamble_matrix(preambles)
                somp_cfg = baselines.SompConfig(
                    max_support=baselines.default_max_support(cfg.p_a, cfg.K),
                    residual_tol=somp_residual_tol(Y_mat, sigma_n2))
                sres = baselines.somp(Y_mat, A, somp_cfg)
                x_hat = sres.X_hat
                alpha_hat = np.zeros(cfg.K, dtype=np.int8)
                alpha_hat[sres.support] = 1
                iters = len(sres.support)
            elif algo == "amp":
                Y_mat = unfold_last(Y).T
                A = assemble_preamble_matrix(preambles)
                ares = baselines.amp_mmv(Y_mat, A, sigma_n2, cfg.p_a)
                x_hat = ares.X_hat
                alpha_hat = (np.sum(np.abs(x_hat) ** 2, axis=0) > 0).astype(np.int8)
                iters = ares.n_iters
            else:
                raise ValueError(f"unknown algorithm {algo!r}")
            wall_ms = (time.perf_counter() - t0) * 1000.0
            pe = detection.error_probability(alpha_hat, ch.alpha)
            nm = detection.nmse(x_hat, X_true) if have_active else math.nan
            nma = (detection.nmse_active(x_hat, X_true, ch.alpha)
                   if have_active else math.nan)
            records.append(TrialRecord(axis, value, algo, trial, pe, nm, nma,
                                       iters, wall_ms))
        except Exception:  # noqa: BLE001 - a failed trial must not kill the sweep
            wall_ms = (time.perf_counter() - t0) * 1000.0
            records.append(TrialRecord(axis, value, algo, trial,
                                       math.nan, math.nan, math.nan, 0,
                                       wall_ms, failed=True))
    return records, trace_rows


def somp_residual_tol(Y_mat: np.ndarray, sigma_n2: float) -> float:
    """Discrepancy-principle stop: quit once the residual reaches the
    expected noise floor."""
    y_norm = float(np.linalg.norm(Y_mat))
    if y_norm == 0.0:
        return 0.0
    floor = math.sqrt(sigma_n2 * Y_mat.size)
    return floor / y_norm


def _trial_task(args):
    cfg, axis, value, trial, collect = args
    return run_trial(cfg, axis, value, trial, collect)


def run_sweep(cfg: ScenarioConfig, sweep: SweepSpec, workers: int = 1,
              collect_traces: bool = False
              ) -> tuple[list[TrialRecord], dict[str, list[tuple]]]:
    """All (axis value, trial) combinations; canonical output order."""
    tasks = []
    for value in sweep.values:
        cfg_v = apply_axis(cfg, sweep.axis, value)
        for trial in range(cfg.trials):
            tasks.append((cfg_v, sweep.axis, value, trial, collect_traces))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        outputs = [_trial_task(t) for t in tasks]
    records: list[TrialRecord] = []
    traces: dict[str, list[tuple]] = {v: [] for v in sweep.values}
    for (cfg_v, axis, value, trial, _), (recs, rows) in zip(tasks, outputs):
        records.extend(recs)
        traces[value].extend(rows)
    records.sort(key=lambda r: (r.axis, sweep.values.index(r.value), r.algorithm, r.trial))
    return records, traces


@dataclass(frozen=True)
class SummaryRow:
    axis: str
    value: str
    algorithm: str
    n: int
    pe_mean: float
    pe_std: float
    pe_ci95: float
    nmse_mean: float
    nmse_std: float
    nmse_ci95: float
    nmse_active_mean: float
    iters_mean: float


def _mean_std_ci(values: list[float]) -> tuple[float, float, float]:
    arr = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if arr.size == 0:
        return math.nan, math.nan, math.nan
    mean = float(np.mean(arr))
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    ci = 1.96 * std / math.sqrt(arr.size)
    return mean, std, ci


def aggregate(records: list[TrialRecord]) -> list[SummaryRow]:
    """Grouped mean/std/95% CI per (axis value, algorithm)."""
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple[str, str, str], list[TrialRecord]] = {}
    order: list[tuple[str, str, str]] = []
    for r in records:
        key = (r.axis, r.value, r.algorithm)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    rows = []
    for key in order:
        grp = groups[key]
        pe_m, pe_s, pe_c = _mean_std_ci([r.pe for r in grp])
        nm_m, nm_s, nm_c = _mean_std_ci([r.nmse for r in grp])
        nma_m, _, _ = _mean_std_ci([r.nmse_active for r in grp])
        it_m, _, _ = _mean_std_ci([float(r.iters) for r in grp if not r.failed])
        rows.append(SummaryRow(key[0], key[1], key[2], len(grp),
                               pe_m, pe_s, pe_c, nm_m, nm_s, nm_c, nma_m, it_m))
    return rows


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def write_trials_csv(path: Path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRIALS_HEADER)
        for r in records:
            w.writerow([r.axis, r.value, r.algorithm, r.trial,
                        _fmt(r.pe), _fmt(r.nmse), _fmt(r.nmse_active), r.iters])


def write_timings_csv(path: Path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TIMINGS_HEADER)
        for r in records:
            w.writerow([r.axis, r.value, r.algorithm, r.trial, f"{r.wall_ms:.3f}"])


def write_summary_csv(path: Path, rows: list[SummaryRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for s in rows:
            w.writerow([s.axis, s.value, s.algorithm, s.n,
                        _fmt(s.pe_mean), _fmt(s.pe_std), _fmt(s.pe_ci95),
                        _fmt(s.nmse_mean), _fmt(s.nmse_std), _fmt(s.nmse_ci95),
                        _fmt(s.nmse_active_mean), _fmt(s.iters_mean)])


def write_trace_csv(path: Path, rows: list[tuple]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for trial, it, resid, max_col in rows:
            w.writerow([trial, it, _fmt(resid), _fmt(max_col)])


def write_outputs(out_dir: str | Path, sweep: SweepSpec,
                  records: list[TrialRecord],
                  traces: dict[str, list[tuple]] | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trials_csv(out / "trials.csv", records)
    write_timings_csv(out / "timings.csv", records)
    write_summary_csv(out / "summary.csv", aggregate(records))
    if traces:
        for value, rows in traces.items():
            if rows:
                write_trace_csv(out / f"trace_{sweep.axis}_{value}.csv", rows)
