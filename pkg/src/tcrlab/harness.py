"""Seeded end-to-end runs, replicated sweeps, and oracle validation.

A run is a pure function of (params, seed). Sweep replications derive their
seeds from (base_seed, cell index, replication index) through a fixed
64-bit mixer, so results are identical no matter how many workers execute
them or in which order.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .analysis import (
    AnalysisParams,
    tokens_disengaged,
    tokens_informed_engaged,
    tokens_uninformed_engaged,
    total_tokens,
    value_per_token,
)
from .metrics import CLASS_ORDER, MetricsRow, snapshot
from .params import AnalysisSigmaStake, ConfigurationError, SimParams
from .protocol import (
    REL_TOL,
    Decision,
    Item,
    RoundRecord,
    init_registry,
    required_stake,
    run_round,
)
from .voters import RngStream, VoterClass, sample_roster

METRIC_NAMES = (
    "lurp_raw",
    "lurp_clamped",
    "t_total",
    "tokens_IE",
    "tokens_ID",
    "tokens_UE",
    "tokens_UD",
    "wealth_IE",
    "wealth_ID",
    "wealth_UE",
    "wealth_UD",
)


class BehaviorMode(enum.Enum):
    STOCHASTIC = "stochastic"
    DEGENERATE_IDEAL = "degenerate_ideal"


@dataclass(frozen=True)
class RunConfig:
    """One simulation run: parameters, seed, and behavior mode.

    DEGENERATE_IDEAL forces sure participation for engaged voters, none for
    disengaged, and sure (in)correctness for (un)informed voters; it also
    requires a roster where informed-engaged voters outnumber
    uninformed-engaged ones.
    """

    sim_params: SimParams
    base_seed: int = 0
    behavior_mode: BehaviorMode = BehaviorMode.STOCHASTIC

    def effective_params(self) -> SimParams:
        if self.behavior_mode is BehaviorMode.DEGENERATE_IDEAL:
            return replace(
                self.sim_params,
                p_vote_engaged=1.0,
                p_vote_disengaged=0.0,
                p_correct_informed=1.0,
                p_correct_uninformed=0.0,
            )
        return self.sim_params


def run_simulation(
    config: RunConfig, roster: list[tuple[bool, bool]] | None = None
) -> list[tuple[RoundRecord, MetricsRow]]:
    """Execute all rounds; returns the full (audit, metrics) trace.

    A fixed roster may be supplied (no roster draws are consumed then);
    otherwise the roster is sampled from the stream first.
    """
    params = config.effective_params()
    rng = RngStream(config.base_seed)
    if roster is None:
        roster = sample_roster(params, rng)
    state = init_registry(params, roster)
    if config.behavior_mode is BehaviorMode.DEGENERATE_IDEAL:
        n_ie = int(state.class_masks[VoterClass.INFORMED_ENGAGED].sum())
        n_ue = int(state.class_masks[VoterClass.UNINFORMED_ENGAGED].sum())
        if n_ie <= n_ue:
            raise ConfigurationError(
                "degenerate-ideal mode requires more informed-engaged than "
                f"uninformed-engaged voters, got {n_ie} vs {n_ue}"
            )

    p_vote = np.where(state.is_engaged, params.p_vote_engaged, params.p_vote_disengaged)
    trace: list[tuple[RoundRecord, MetricsRow]] = []
    for r in range(params.num_items):
        item = Item(r, bool(rng.uniform() < params.p_item_good))
        stake = required_stake(state)
        intends = rng.uniform(state.num_voters) < p_vote
        eligible_mask = intends & (state.balances >= stake * (1.0 - REL_TOL))
        eligible_ids = np.nonzero(eligible_mask)[0]
        p_correct = np.where(
            state.is_informed[eligible_ids],
            params.p_correct_informed,
            params.p_correct_uninformed,
        )
        correct = rng.uniform(len(eligible_ids)) < p_correct
        votes_add = correct == item.is_good
        votes = {
            int(j): Decision.ADD if a else Decision.REJECT
            for j, a in zip(eligible_ids, votes_add)
        }
        intents = frozenset(np.nonzero(intends)[0].tolist())
        record = run_round(state, item, intents, votes)
        trace.append((record, snapshot(state)))
    return trace


def metrics_array(trace: list[tuple[RoundRecord, MetricsRow]]) -> np.ndarray:
    """Trace metrics as a (rounds, len(METRIC_NAMES)) float array; NaN = absent."""
    out = np.empty((len(trace), len(METRIC_NAMES)))
    for i, (_, row) in enumerate(trace):
        out[i, 0] = row.lurp_raw
        out[i, 1] = row.lurp_clamped
        out[i, 2] = row.t_total
        for c, cls in enumerate(CLASS_ORDER):
            out[i, 3 + c] = row.tokens[cls]
            out[i, 7 + c] = row.wealth[cls]
    return out


_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, cell_index: int, rep_index: int) -> int:
    """Fixed 64-bit mixing of (base seed, grid cell, replication)."""
    h = base_seed & _MASK64
    h = _mix64(h ^ _mix64(cell_index & _MASK64))
    return _mix64(h ^ _mix64(rep_index & _MASK64))


def _replication_task(args: tuple[SimParams, int]) -> np.ndarray:
    params, seed = args
    trace = run_simulation(RunConfig(sim_params=params, base_seed=seed))
    return metrics_array(trace)


def replicate(
    params: SimParams,
    replications: int,
    base_seed: int,
    cell_index: int = 0,
    jobs: int = 1,
) -> np.ndarray:
    """Run independent replications; (replications, rounds, metrics) array.

    Identical output for any job count: seeds are derived per replication
    and results are placed by replication index.
    """
    if replications < 1:
        raise ConfigurationError(f"replications must be >= 1, got {replications}")
    tasks = [
        (params, derive_seed(base_seed, cell_index, rep))
        for rep in range(replications)
    ]
    if jobs <= 1:
        results = [_replication_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replication_task, tasks, chunksize=16))
    return np.stack(results)


@dataclass(frozen=True)
class SweepSpec:
    """Cross-product parameter grid with replications per cell."""

    grid: tuple[tuple[str, tuple], ...]
    replications: int
    base_seed: int = 0
    base_params: SimParams = SimParams()

    def __post_init__(self) -> None:
        if not self.grid:
            raise ConfigurationError("sweep grid must name at least one parameter")
        valid = {f.name for f in fields(SimParams)}
        for name, values in self.grid:
            if name not in valid:
                raise ConfigurationError(f"unknown sweep parameter {name!r}")
            if not values:
                raise ConfigurationError(f"no values given for sweep parameter {name!r}")
        if self.replications < 1:
            raise ConfigurationError(
                f"replications must be >= 1, got {self.replications}"
            )

    def cells(self) -> list[dict]:
        names = [name for name, _ in self.grid]
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(values for _, values in self.grid))
        ]


@dataclass(frozen=True)
class CellAggregate:
    """Cross-replication stats for one grid cell.

    `stats` maps stat name -> (rounds, metrics) array; `counts` holds the
    number of non-absent samples per (round, metric).
    """

    params: dict
    stats: dict[str, np.ndarray]
    counts: np.ndarray


@dataclass(frozen=True)
class AggregateStats:
    metric_names: tuple[str, ...]
    replications: int
    cells: tuple[CellAggregate, ...]


STAT_NAMES = ("mean", "std", "min", "max", "p5", "p95")


def aggregate_metrics(samples: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Per-(round, metric) stats over the replication axis, skipping NaNs."""
    with np.errstate(invalid="ignore"):
        counts = np.sum(~np.isnan(samples), axis=0)
        with warnings.catch_warnings():
            # all-NaN slices (an empty class in every replication) stay NaN
            warnings.simplefilter("ignore", category=RuntimeWarning)
            stats = {
                "mean": np.nanmean(samples, axis=0),
                "std": np.nanstd(samples, axis=0),
                "min": np.nanmin(samples, axis=0),
                "max": np.nanmax(samples, axis=0),
                "p5": np.nanpercentile(samples, 5, axis=0),
                "p95": np.nanpercentile(samples, 95, axis=0),
            }
    return stats, counts


def run_sweep(spec: SweepSpec, jobs: int = 1) -> AggregateStats:
    """Run every grid cell x replication and aggregate across seeds."""
    cells = []
    for cell_index, overrides in enumerate(spec.cells()):
        params = replace(spec.base_params, **overrides)
        samples = replicate(
            params, spec.replications, spec.base_seed, cell_index=cell_index, jobs=jobs
        )
        stats, counts = aggregate_metrics(samples)
        cells.append(CellAggregate(params=overrides, stats=stats, counts=counts))
    return AggregateStats(
        metric_names=METRIC_NAMES,
        replications=spec.replications,
        cells=tuple(cells),
    )


@dataclass(frozen=True)
class ValidationReport:
    """Max relative error of the simulator against each closed-form series."""

    k_max: int
    tolerance: float
    max_rel_error: dict[str, float]
    passed: bool


_ORACLE_SERIES = {
    "t_ie": tokens_informed_engaged,
    "t_ue": tokens_uninformed_engaged,
    "t_id": tokens_disengaged,
    "t_ud": tokens_disengaged,
}


def validate_against_analysis(
    a: AnalysisParams, k_max: int, tolerance: float = 1e-9
) -> ValidationReport:
    """Run the idealized simulator configuration and diff the closed forms.

    Per-class mean balances, the total, and value-per-token are compared at
    every round k = 1..k_max.
    """
    if k_max < 0:
        raise ConfigurationError(f"k_max must be >= 0, got {k_max}")
    n = a.n_ie + a.n_ue + a.n_id + a.n_ud
    params = SimParams(
        num_voters=n,
        num_items=k_max,
        initial_tokens=a.t0,
        initial_stake=min(a.sigma * a.t0, a.t0),
        inflation_rate=a.delta,
        stake_policy=AnalysisSigmaStake(a.sigma),
    )
    # (is_engaged, is_informed), grouped by class: IE, UE, ID, UD.
    roster = (
        [(True, True)] * a.n_ie
        + [(True, False)] * a.n_ue
        + [(False, True)] * a.n_id
        + [(False, False)] * a.n_ud
    )
    config = RunConfig(
        sim_params=params, base_seed=0, behavior_mode=BehaviorMode.DEGENERATE_IDEAL
    )
    trace = run_simulation(config, roster=roster)

    class_info = {
        "t_ie": (VoterClass.INFORMED_ENGAGED, a.n_ie),
        "t_ue": (VoterClass.UNINFORMED_ENGAGED, a.n_ue),
        "t_id": (VoterClass.INFORMED_DISENGAGED, a.n_id),
        "t_ud": (VoterClass.UNINFORMED_DISENGAGED, a.n_ud),
    }
    errors = {name: 0.0 for name in (*_ORACLE_SERIES, "t_total", "value_per_token")}
    for record, row in trace:
        k = record.round_index + 1
        if not record.decision_correct:
            raise ConfigurationError(
                f"idealized run produced an incorrect decision at round {k}"
            )
        for name, fn in _ORACLE_SERIES.items():
            cls, n_cls = class_info[name]
            if n_cls == 0:
                continue
            sim = row.tokens[cls] / n_cls
            errors[name] = max(errors[name], _rel_err(sim, fn(a, k)))
        errors["t_total"] = max(errors["t_total"], _rel_err(row.t_total, total_tokens(a, k)))
        errors["value_per_token"] = max(
            errors["value_per_token"],
            _rel_err(row.lurp_raw / row.t_total, value_per_token(a, k)),
        )
    return ValidationReport(
        k_max=k_max,
        tolerance=tolerance,
        max_rel_error=errors,
        passed=all(e <= tolerance for e in errors.values()),
    )


def _rel_err(actual: float, expected: float) -> float:
    return abs(actual - expected) / max(abs(expected), 1e-300)
