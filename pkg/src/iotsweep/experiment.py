"""Experiment runner: repeated trials, analytic overlays, CSV outputs.

Output schemas (all CSVs carry a header row):

  trials.csv   trial,n,first_seen_s,device
  summary.csv  n,mean_s,ci_lo_s,ci_hi_s,censored_count
  model.csv    n,expected_time_s
  compare.csv  n,mean_s,ci_lo_s,ci_hi_s,expected_s,in_ci
  manifest.txt scenario / config-sha256 / seed / trials / versions

Trial m always draws its randomness from streams derived from (seed, m), so
a rerun of the same scenario file reproduces every CSV byte for byte, and
two algorithms run on the same scenario see identical device traffic.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (
    OrderStatRow,
    OrderStatSummary,
    discretize,
    expected_order_statistics,
    summarize,
)
from .errors import ScenarioError
from .scanning import Scanner, plan_channel_groups
from .scenario import Algorithm, ScenarioConfig
from .simulation import Environment, build_environment


@dataclass(frozen=True)
class TrialRecord:
    """One trial's discoveries in discovery order."""

    trial: int
    first_seen: tuple[tuple[float, str], ...]  # (seconds, device), ascending


@dataclass(frozen=True)
class ExperimentResult:
    config: ScenarioConfig
    trials: tuple[TrialRecord, ...]
    summary: OrderStatSummary
    wall_clock_s: float

    def full_discovery_times(self) -> list[float]:
        """Per trial, the time the last device was found (complete trials only)."""
        n = len(self.config.devices)
        return [t.first_seen[-1][0] for t in self.trials if len(t.first_seen) == n]


@dataclass(frozen=True)
class CompareRow:
    n: int
    mean_s: float
    ci_lo_s: float
    ci_hi_s: float
    expected_s: float
    in_ci: bool


@dataclass(frozen=True)
class ComparisonReport:
    result: ExperimentResult
    model: tuple[tuple[int, float], ...]
    rows: tuple[CompareRow, ...]
    in_ci_fraction: float
    passed: bool  # expected value inside the CI for >= 75% of usable rows


def trial_environment(cfg: ScenarioConfig, trial: int, seed: int | None = None) -> Environment:
    return build_environment(
        cfg.devices,
        seed=cfg.seed if seed is None else seed,
        trial=trial,
        loss_prob=cfg.loss_prob,
        probe_response_delay_max_s=cfg.probe_response_delay_max_s,
        lora_id_index=cfg.lora_id_index,
    )


def _run_algorithm(cfg: ScenarioConfig, scanner: Scanner, targets: frozenset[str]) -> None:
    dwell, scan = cfg.dwell_time_s, cfg.scan_time_s
    if cfg.algorithm is Algorithm.PASSIVE:
        scanner.passive_scan(cfg.channels, dwell, scan, until_complete=targets)
    elif cfg.algorithm is Algorithm.ACTIVE:
        scanner.active_scan(
            cfg.channels, dwell, scan,
            probe_dwell_time_s=cfg.probe_dwell_time_s, until_complete=targets,
        )
    elif cfg.algorithm is Algorithm.MULTIPROTOCOL:
        scanner.multiprotocol_scan(cfg.channels, dwell, scan, until_complete=targets)
    elif cfg.algorithm is Algorithm.ACTIVE_MULTIPROTOCOL:
        scanner.active_multiprotocol_scan(
            cfg.channels, cfg.probe_channels, dwell, scan,
            probe_dwell_time_s=cfg.probe_dwell_time_s, until_complete=targets,
        )
    elif cfg.algorithm is Algorithm.SEQUENTIAL_PASSIVE:
        scanner.sequential_passive_scan(cfg.phases, dwell, scan, until_complete=targets)
    else:  # pragma: no cover
        raise ScenarioError(f"no runner for algorithm {cfg.algorithm}")


def run_experiment(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> ExperimentResult:
    """Run all trials of a scenario; optionally write the CSV outputs."""
    started = time.perf_counter()
    targets = frozenset(d.name for d in cfg.devices)
    records: list[TrialRecord] = []
    for trial in range(cfg.trials):
        env = trial_environment(cfg, trial)
        scanner = Scanner(env, cfg.sdr, probe_dwell_time_s=cfg.probe_dwell_time_s)
        _run_algorithm(cfg, scanner, targets)
        seen = sorted((t, name) for name, t in scanner.log.first_seen.items())
        records.append(TrialRecord(trial=trial, first_seen=tuple(seen)))
    times = [[t for t, _ in rec.first_seen] for rec in records]
    if cfg.trials == 1:
        summary = _single_trial_summary(times[0], len(cfg.devices), cfg.alpha)
    else:
        summary = summarize(times, alpha=cfg.alpha, n_devices=len(cfg.devices))
    result = ExperimentResult(
        config=cfg,
        trials=tuple(records),
        summary=summary,
        wall_clock_s=time.perf_counter() - started,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trials.csv").write_text(trials_csv(result))
        (out / "summary.csv").write_text(summary_csv(result.summary))
        (out / "manifest.txt").write_text(manifest_text(cfg))
    return result


def _single_trial_summary(times: list[float], n_devices: int, alpha: float) -> OrderStatSummary:
    """One-trial degenerate summary: the mean is the observation, no spread."""
    ordered = sorted(times)
    rows = []
    for n in range(1, n_devices + 1):
        if n <= len(ordered):
            rows.append(OrderStatRow(n, ordered[n - 1], math.nan, math.nan, 0))
        else:
            rows.append(OrderStatRow(n, math.nan, math.nan, math.nan, 1))
    return OrderStatSummary(rows=tuple(rows), trial_count=1, alpha=alpha)


# ---------------------------------------------------------------------------
# Analytic model

def steady_state_groups(cfg: ScenarioConfig) -> list[list]:
    """The channel groups the scanner rotates through in steady state.

    Defined for the scans whose rotation is fixed up front: passive visits
    one channel at a time, multiprotocol visits bandwidth groups. Active
    scans change their rotation based on probe results mid-run, and the
    sequential baseline is phase-structured, so neither maps onto a single
    per-timestep probability vector.
    """
    if cfg.algorithm is Algorithm.PASSIVE:
        return [[ch] for ch in cfg.channels]
    if cfg.algorithm is Algorithm.MULTIPROTOCOL:
        return plan_channel_groups(list(cfg.channels), cfg.sdr.instantaneous_bandwidth_hz)
    raise ScenarioError(
        f"analytic model covers passive and multiprotocol scans, not "
        f"{cfg.algorithm.value}"
    )


def device_channel_divisors(cfg: ScenarioConfig) -> list[float]:
    """Per device: how many rotation slots exist per slot that can hear it.

    A device audible in a of G groups is heard 1/(G/a) of the time. A Zigbee
    device under a 16-channel passive scan gets 16; a BLE advertiser under a
    3-advertising-channel rotation gets 1 (every slot can hear it, because
    each advertising event covers all three channels).
    """
    groups = steady_state_groups(cfg)
    total = len(groups)
    divisors = []
    for dev in cfg.devices:
        audible = sum(1 for g in groups if set(g) & set(dev.channels))
        if audible == 0:
            raise ScenarioError(f"device {dev.name} inaudible to the scan rotation")
        divisors.append(total / audible)
    return divisors


def run_model(
    cfg: ScenarioConfig, delta_t_s: float | None = None
) -> list[tuple[int, float]]:
    """Expected discovery time of the n-th device for n = 1..N.

    Discretizes each device's Poisson rate at the scenario's timestep with
    its rotation divisor, then evaluates the exact order-statistic
    expectation.
    """
    if not cfg.devices:
        return []
    dt = cfg.delta_t_s if delta_t_s is None else delta_t_s
    rates = [1.0 / d.mean_interarrival_s for d in cfg.devices]
    pv = discretize(
        rates,
        dt,
        device_channel_divisors(cfg),
        max_multi_arrival_prob=cfg.max_multi_arrival_prob,
    )
    return list(enumerate(expected_order_statistics(pv), start=1))


def compare(
    cfg: ScenarioConfig,
    delta_t_s: float | None = None,
    out_dir: str | Path | None = None,
) -> ComparisonReport:
    """Run the experiment and the model; check CI coverage row by row.

    Passes when the model expectation falls inside the measured confidence
    interval for at least 75% of the rows that have a defined CI.
    """
    result = run_experiment(cfg)
    model = run_model(cfg, delta_t_s)
    expected = dict(model)
    rows: list[CompareRow] = []
    usable = in_ci_count = 0
    for row in result.summary.rows:
        exp = expected.get(row.n)
        if exp is None or row.censored_count > 0 or not np.isfinite(row.ci_halfwidth_s):
            continue
        hit = row.ci_lo_s <= exp <= row.ci_hi_s
        usable += 1
        in_ci_count += hit
        rows.append(CompareRow(row.n, row.mean_s, row.ci_lo_s, row.ci_hi_s, exp, hit))
    fraction = in_ci_count / usable if usable else 0.0
    report = ComparisonReport(
        result=result,
        model=tuple(model),
        rows=tuple(rows),
        in_ci_fraction=fraction,
        passed=usable > 0 and fraction >= 0.75,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trials.csv").write_text(trials_csv(result))
        (out / "summary.csv").write_text(summary_csv(result.summary))
        (out / "model.csv").write_text(model_csv(model))
        (out / "compare.csv").write_text(compare_csv(report))
        (out / "manifest.txt").write_text(manifest_text(cfg))
    return report


# ---------------------------------------------------------------------------
# Serialization

def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def trials_csv(result: ExperimentResult) -> str:
    rows = [
        [rec.trial, n, f"{t:.6f}", device]
        for rec in result.trials
        for n, (t, device) in enumerate(rec.first_seen, start=1)
    ]
    return _csv_text(["trial", "n", "first_seen_s", "device"], rows)


def summary_csv(summary: OrderStatSummary) -> str:
    rows = [
        [row.n, f"{row.mean_s:.6f}", f"{row.ci_lo_s:.6f}", f"{row.ci_hi_s:.6f}", row.censored_count]
        for row in summary.rows
    ]
    return _csv_text(["n", "mean_s", "ci_lo_s", "ci_hi_s", "censored_count"], rows)


def model_csv(model: list[tuple[int, float]]) -> str:
    rows = [[n, f"{t:.6f}"] for n, t in model]
    return _csv_text(["n", "expected_time_s"], rows)


def compare_csv(report: ComparisonReport) -> str:
    rows = [
        [
            r.n,
            f"{r.mean_s:.6f}",
            f"{r.ci_lo_s:.6f}",
            f"{r.ci_hi_s:.6f}",
            f"{r.expected_s:.6f}",
            int(r.in_ci),
        ]
        for r in report.rows
    ]
    return _csv_text(["n", "mean_s", "ci_lo_s", "ci_hi_s", "expected_s", "in_ci"], rows)


def events_csv(env: Environment, horizon_s: float) -> str:
    rows = [
        [
            f"{em.time_s:.6f}",
            em.channel.label,
            em.channel.protocol.value,
            em.device,
            em.frame.hex(),
        ]
        for em in env.iter_events(horizon_s)
    ]
    return _csv_text(["time_s", "channel_label", "protocol", "device", "frame_hex"], rows)


def config_digest(cfg: ScenarioConfig) -> str:
    payload = cfg.source_text if cfg.source_text is not None else repr(cfg)
    return hashlib.sha256(payload.encode()).hexdigest()


def manifest_text(cfg: ScenarioConfig) -> str:
    lines = [
        f"scenario {cfg.name}",
        f"config-sha256 {config_digest(cfg)}",
        f"algorithm {cfg.algorithm.value}",
        f"seed {cfg.seed}",
        f"trials {cfg.trials}",
        f"iotsweep {__version__}",
        f"numpy {np.__version__}",
    ]
    return "\n".join(lines) + "\n"
