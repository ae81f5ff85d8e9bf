"""Learning and evaluation protocol for comparing REM matching metrics.

One fixed subgroup of UEs walks a motion pattern while the REM is learned,
one entry per snapshot. Evaluation then draws fresh subgroups from the same
UE population, reports their positions through each localization model,
matches a REM entry with each metric and applies the greedy action of that
entry. Every decision is scored against the all-on baseline and against an
exhaustive search over all pico configurations.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import bandit
from .actions import action_count, all_on, bitstring
from .geometry import MetricKind, PositionSet
from .localization import GPS_SIGMA, RTK_SIGMA, LocalizationModel, report_positions
from .netsim import (
    ChannelParams,
    EvalOutcome,
    NetworkLayout,
    ShadowingField,
    UeState,
    default_layout,
    evaluate_all_actions,
    evaluate_configuration,
    generate_scenario,
    oracle_action,
    positions_of,
    trajectory,
)
from .power import PowerParams
from .rem import Rem, action_space_reduction, add_entry, greedy_action, match_entry, update_entry

log = logging.getLogger(__name__)

# stream tags for SeedSequence-derived generators
_SCENARIO, _MOBILITY, _SHADOW, _LEARN, _EVAL = range(5)


class InfeasibleCoverage(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    seed: int = 1
    n_total_ues: int = 50
    n_subgroup: int = 40
    learning_runs: int = 30
    rem_entries_target: int = 15
    eval_runs: int = 45
    snapshot_interval_s: float = 1.0
    ue_speed: float = 1.5
    mean_heading_hold_s: float = 10.0
    decision_steps: int = 1
    metrics: list[MetricKind] = field(default_factory=lambda: list(MetricKind))
    localization: dict[str, LocalizationModel] = field(default_factory=lambda: {
        "rtk": LocalizationModel(RTK_SIGMA), "gps": LocalizationModel(GPS_SIGMA)})
    policy: bandit.ExplorationPolicy = field(default_factory=bandit.ExhaustiveSweep)
    layout: NetworkLayout = field(default_factory=default_layout)
    channel: ChannelParams = field(default_factory=ChannelParams)
    power: PowerParams = field(default_factory=PowerParams)

    def __post_init__(self):
        for name in ("n_total_ues", "n_subgroup", "learning_runs", "rem_entries_target",
                     "eval_runs", "decision_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_subgroup > self.n_total_ues:
            raise ValueError("n_subgroup must not exceed n_total_ues")
        if not self.snapshot_interval_s > 0:
            raise ValueError("snapshot_interval_s must be positive")
        if not self.metrics:
            raise ValueError("at least one metric is required")
        if not self.localization:
            raise ValueError("at least one localization arm is required")
        self.metrics = [MetricKind.parse(m) for m in self.metrics]


def _rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng([seed, *path])


def _key(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(2, np.uint64)[0])


@dataclass
class Environment:
    """The shared radio environment and UE population of one experiment."""

    config: ExperimentConfig
    shadowing: ShadowingField
    snapshots: list[list[UeState]]  # [snapshot][ue]

    @classmethod
    def build(cls, config: ExperimentConfig) -> "Environment":
        ues = generate_scenario(_key(config.seed, _SCENARIO), config.n_total_ues, config.layout,
                                speed=config.ue_speed)
        snaps = trajectory(ues, config.rem_entries_target, config.snapshot_interval_s,
                           config.layout.area, _rng(config.seed, _MOBILITY),
                           config.mean_heading_hold_s)
        shadow = ShadowingField.from_channel(_key(config.seed, _SHADOW), config.channel)
        return cls(config, shadow, snaps)

    def state(self, snapshot: int, subgroup: Sequence[int]) -> list[UeState]:
        snap = self.snapshots[snapshot]
        return [snap[i] for i in subgroup]

    def evaluate(self, ues: Sequence[UeState], action: int,
                 rng_path: Optional[tuple] = None) -> EvalOutcome:
        cfg = self.config
        rng = _rng(cfg.seed, *rng_path) if rng_path is not None else None
        return evaluate_configuration(ues, cfg.layout, action, cfg.channel, cfg.power, rng,
                                      shadowing=self.shadowing, steps=cfg.decision_steps,
                                      dt=cfg.snapshot_interval_s,
                                      mean_heading_hold=cfg.mean_heading_hold_s)

    def evaluate_all(self, ues: Sequence[UeState], rng_path: tuple) -> list[EvalOutcome]:
        cfg = self.config
        if cfg.decision_steps == 1:
            return evaluate_all_actions(ues, cfg.layout, cfg.channel, cfg.power, self.shadowing)
        # every action sees the same mobility draws
        return [self.evaluate(ues, a, rng_path) for a in range(action_count(cfg.layout.pbs_count))]

    def draw_subgroup(self, rng: np.random.Generator) -> list[int]:
        cfg = self.config
        return sorted(int(i) for i in rng.choice(cfg.n_total_ues, cfg.n_subgroup, replace=False))


def run_learning_phase(config: ExperimentConfig, env: Optional[Environment] = None) -> Rem:
    """Build a REM with one entry per snapshot of a fixed subgroup's motion pattern.

    Each learning run replays the same pattern; at every snapshot the
    exploration policy picks ``ceil(2**pbs / learning_runs)`` actions so
    that a sweep covers the whole action table within the run budget.
    """
    env = env or Environment.build(config)
    layout = config.layout
    n_pbs = layout.pbs_count
    full = all_on(n_pbs)
    rng = _rng(config.seed, _LEARN)
    group = env.draw_subgroup(rng)
    tag_model = LocalizationModel(RTK_SIGMA)

    rem = Rem(n_pbs)
    states = []
    served_full = []
    for k in range(config.rem_entries_target):
        state = env.state(k, group)
        add_entry(rem, report_positions(PositionSet(positions_of(state)), tag_model, rng))
        states.append(state)
        served = env.evaluate(state, full, (_LEARN, k)).served_ues
        if served == 0:
            raise InfeasibleCoverage(
                f"snapshot {k}: no UE is served even with every pico BS active; "
                "check tx powers, path-loss parameters and the RSS threshold")
        served_full.append(served)

    per_visit = math.ceil(action_count(n_pbs) / config.learning_runs)
    step = 0
    for run in range(config.learning_runs):
        for k, entry in enumerate(rem.entries):
            for _ in range(per_visit):
                step += 1
                a = bandit.select_learning_action(entry, config.policy, step, rng)
                out = env.evaluate(states[k], a, (_LEARN, k))
                r = bandit.reward(bandit.RewardObservation(out.ee, out.served_ues, served_full[k]))
                update_entry(entry, a, r, out.served_ues)

    # ASR needs the all-on coverage of every entry, whatever the policy did
    for k, entry in enumerate(rem.entries):
        if entry.n[full] == 0:
            out = env.evaluate(states[k], full, (_LEARN, k))
            update_entry(entry, full, out.ee, out.served_ues)
    log.info("learned REM: %d entries, %d steps", len(rem), step)
    return rem


@dataclass(frozen=True)
class RunResult:
    run: int
    snapshot: int
    metric: MetricKind
    localization: str
    action: int
    outcome: EvalOutcome
    matched_entry: int
    baseline: EvalOutcome
    oracle: EvalOutcome
    oracle_action: int

    @property
    def arm(self) -> str:
        return f"{self.metric.value}/{self.localization}"

    @property
    def qos_ok(self) -> bool:
        return self.outcome.served_ues == self.baseline.served_ues


def run_evaluation_phase(config: ExperimentConfig, rem: Rem,
                         env: Optional[Environment] = None) -> list[RunResult]:
    """Score every (metric, localization) arm on ``eval_runs`` fresh subgroups.

    Each run replays the motion pattern with a new subgroup and takes one
    decision per snapshot. Subgroups and reporting noise depend only on
    (seed, run, snapshot, localization arm), so all metrics see identical
    inputs.
    """
    env = env or Environment.build(config)
    n_pbs = config.layout.pbs_count
    if rem.pbs_count != n_pbs:
        raise ValueError(f"REM has {rem.pbs_count} pico BSs, layout has {n_pbs}")
    if not rem.entries:
        raise ValueError("REM is empty")
    full = all_on(n_pbs)
    results = []
    for r in range(config.eval_runs):
        group = env.draw_subgroup(_rng(config.seed, _EVAL, r))
        for k in range(len(env.snapshots)):
            truth = env.state(k, group)
            outcomes = env.evaluate_all(truth, (_EVAL, r, k))
            best = oracle_action(outcomes)
            true_set = PositionSet(positions_of(truth))
            for li, (loc_name, model) in enumerate(config.localization.items()):
                reported = report_positions(true_set, model, _rng(config.seed, _EVAL, r, k, 1000 + li))
                for metric in config.metrics:
                    l_hat = match_entry(rem, reported, metric)
                    entry = rem[l_hat]
                    a = greedy_action(entry, action_space_reduction(entry))
                    results.append(RunResult(r, k, metric, loc_name, a, outcomes[a], l_hat,
                                             outcomes[full], outcomes[best], best))
    return results


@dataclass(frozen=True)
class ArmSummary:
    arm: str
    runs: int
    mean_ee: float
    gain: float
    cdf: tuple[float, ...]
    qos_violations: int = 0


@dataclass(frozen=True)
class SummaryStats:
    arms: dict[str, ArmSummary]
    baseline: ArmSummary
    oracle: ArmSummary

    def oracle_gap_ratio(self, arm: str) -> float:
        """Fraction of the oracle's excess gain over baseline captured by ``arm``."""
        denom = self.oracle.gain - 1.0
        if denom <= 0:
            return 1.0
        return (self.arms[arm].gain - 1.0) / denom


def _arm(name: str, ees: dict[int, list[float]], baseline_mean: float,
         violations: int = 0) -> ArmSummary:
    """``ees`` maps run id to that run's per-snapshot EE values."""
    flat = [v for vs in ees.values() for v in vs]
    mean = float(np.mean(flat))
    gain = mean / baseline_mean if baseline_mean > 0 else math.nan
    per_run = sorted(float(np.mean(vs)) for vs in ees.values())
    return ArmSummary(name, len(ees), mean, gain, tuple(per_run), violations)


def summarize(results: Sequence[RunResult]) -> SummaryStats:
    """Per-arm mean EE over all decisions, gain over the all-on baseline, per-run EE CDF."""
    if not results:
        raise ValueError("no results to summarize")
    decisions = {}
    for res in results:
        decisions.setdefault((res.run, res.snapshot), res)
    base: dict[int, list[float]] = {}
    orc: dict[int, list[float]] = {}
    for (run, _), res in decisions.items():
        base.setdefault(run, []).append(res.baseline.ee)
        orc.setdefault(run, []).append(res.oracle.ee)
    base_mean = float(np.mean([v for vs in base.values() for v in vs]))
    by_arm: dict[str, dict[int, list[float]]] = {}
    violations: dict[str, int] = {}
    for res in results:
        by_arm.setdefault(res.arm, {}).setdefault(res.run, []).append(res.outcome.ee)
        violations[res.arm] = violations.get(res.arm, 0) + (not res.qos_ok)
    arms = {name: _arm(name, ees, base_mean, violations[name]) for name, ees in by_arm.items()}
    return SummaryStats(arms, _arm("baseline", base, base_mean), _arm("oracle", orc, base_mean))


# -- CSV export ------------------------------------------------------------------

RESULT_COLUMNS = ["run", "snapshot", "arm", "metric", "localization", "action", "action_bits",
                  "ee", "median_bitrate", "power", "baseline_ee", "oracle_ee", "oracle_action",
                  "served", "baseline_served", "matched_entry", "qos_ok"]
SUMMARY_COLUMNS = ["arm", "runs", "mean_ee", "gain", "oracle_gap_ratio", "qos_violations"]


def results_csv(results: Sequence[RunResult], pbs_count: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        w.writerow([r.run, r.snapshot, r.arm, r.metric.value, r.localization, r.action,
                    bitstring(r.action, pbs_count), repr(r.outcome.ee),
                    repr(r.outcome.median_bitrate), repr(r.outcome.avg_power),
                    repr(r.baseline.ee), repr(r.oracle.ee), r.oracle_action,
                    r.outcome.served_ues, r.baseline.served_ues, r.matched_entry, int(r.qos_ok)])
    return buf.getvalue()


def summary_csv(summary: SummaryStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for name, arm in summary.arms.items():
        w.writerow([name, arm.runs, repr(arm.mean_ee), repr(arm.gain),
                    repr(summary.oracle_gap_ratio(name)), arm.qos_violations])
    for arm in (summary.baseline, summary.oracle):
        ratio = 0.0 if arm is summary.baseline else 1.0
        w.writerow([arm.arm, arm.runs, repr(arm.mean_ee), repr(arm.gain), repr(ratio), 0])
    return buf.getvalue()


def cdf_csv(summary: SummaryStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arm", "rank", "ee", "cdf"])
    for arm in [*summary.arms.values(), summary.baseline, summary.oracle]:
        n = len(arm.cdf)
        for i, v in enumerate(arm.cdf):
            w.writerow([arm.arm, i, repr(v), repr((i + 1) / n)])
    return buf.getvalue()


@dataclass
class ExperimentOutput:
    rem: Rem
    results: list[RunResult]
    summary: SummaryStats


def run_experiment(config: ExperimentConfig) -> ExperimentOutput:
    env = Environment.build(config)
    rem = run_learning_phase(config, env)
    results = run_evaluation_phase(config, rem, env)
    return ExperimentOutput(rem, results, summarize(results))
