"""Config parsing and file output: JSON configs, CSV traces, aggregates.

All numeric CSV fields use 12 significant digits and LF newlines so reruns
diff clean byte-for-byte.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .harness import (
    AggregateStats,
    BehaviorMode,
    METRIC_NAMES,
    RunConfig,
    STAT_NAMES,
    SweepSpec,
    ValidationReport,
)
from .metrics import CLASS_ORDER, MetricsRow
from .params import AnalysisSigmaStake, ConfigurationError, ProtocolStake, SimParams
from .protocol import Decision, RoundRecord

TRACE_COLUMNS = (
    "round",
    "item_good",
    "decision",
    "decision_correct",
    "stake",
    "participants",
    "forced_abstentions",
    "add_votes",
    "reject_votes",
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


def fmt(value: float) -> str:
    """Fixed 12-significant-digit rendering; empty string for NaN."""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return format(value, ".12g")


# --- params codec -----------------------------------------------------------

def stake_policy_to_dict(policy) -> dict:
    if isinstance(policy, ProtocolStake):
        return {"kind": "protocol"}
    return {"kind": "analysis_sigma", "sigma": policy.sigma}


def stake_policy_from_dict(doc: dict):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigurationError(f"stake_policy must be an object with a 'kind': {doc!r}")
    kind = doc["kind"]
    extra = set(doc) - {"kind", "sigma"}
    if extra:
        raise ConfigurationError(f"unknown stake_policy keys: {sorted(extra)}")
    if kind == "protocol":
        return ProtocolStake()
    if kind == "analysis_sigma":
        if "sigma" not in doc:
            raise ConfigurationError("analysis_sigma stake policy requires 'sigma'")
        return AnalysisSigmaStake(sigma=doc["sigma"])
    raise ConfigurationError(f"unknown stake_policy kind {kind!r}")


def params_to_dict(params: SimParams) -> dict:
    doc = {}
    for f in fields(SimParams):
        value = getattr(params, f.name)
        doc[f.name] = stake_policy_to_dict(value) if f.name == "stake_policy" else value
    return doc


def params_from_dict(doc: dict, defaults: SimParams | None = None) -> SimParams:
    """Build SimParams from a JSON object; unknown keys rejected, missing
    keys fall back to the defaults."""
    if not isinstance(doc, dict):
        raise ConfigurationError(f"params must be a JSON object, got {type(doc).__name__}")
    valid = {f.name for f in fields(SimParams)}
    unknown = set(doc) - valid
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(doc)
    if "stake_policy" in kwargs:
        kwargs["stake_policy"] = stake_policy_from_dict(kwargs["stake_policy"])
    base = defaults if defaults is not None else SimParams()
    try:
        return replace(base, **kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def run_config_from_file(path: str | Path, seed: int) -> RunConfig:
    doc = _load_json(path)
    mode = BehaviorMode.STOCHASTIC
    if isinstance(doc, dict) and "behavior_mode" in doc:
        try:
            mode = BehaviorMode(doc.pop("behavior_mode"))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
    return RunConfig(
        sim_params=params_from_dict(doc), base_seed=seed, behavior_mode=mode
    )


def sweep_spec_from_file(path: str | Path) -> SweepSpec:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ConfigurationError("sweep spec must be a JSON object")
    unknown = set(doc) - {"grid", "replications", "base_seed", "sim_params"}
    if unknown:
        raise ConfigurationError(f"unknown sweep spec keys: {sorted(unknown)}")
    grid_doc = doc.get("grid")
    if not isinstance(grid_doc, dict) or not grid_doc:
        raise ConfigurationError("sweep spec needs a non-empty 'grid' object")
    grid = tuple(
        (name, tuple(values) if isinstance(values, list) else (values,))
        for name, values in grid_doc.items()
    )
    return SweepSpec(
        grid=grid,
        replications=doc.get("replications", 500),
        base_seed=doc.get("base_seed", 0),
        base_params=params_from_dict(doc.get("sim_params", {})),
    )


def _load_json(path: str | Path):
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON: {exc}") from exc


# --- trace output -----------------------------------------------------------

def write_trace_csv(path: Path, trace: list[tuple[RoundRecord, MetricsRow]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for record, row in trace:
            writer.writerow(trace_csv_row(record, row))


def trace_csv_row(record: RoundRecord, row: MetricsRow) -> list[str]:
    cells = [
        str(record.round_index),
        _bool(record.item.is_good),
        record.decision.value,
        _bool(record.decision_correct),
        fmt(record.stake),
        str(len(record.inflation_applied_to)),
        str(len(record.forced_abstentions)),
        str(len(record.add_voters)),
        str(len(record.reject_voters)),
        str(row.lurp_raw),
        str(row.lurp_clamped),
        fmt(row.t_total),
    ]
    cells += [fmt(row.tokens[cls]) for cls in CLASS_ORDER]
    cells += [fmt(row.wealth[cls]) for cls in CLASS_ORDER]
    return cells


def write_summary_json(
    path: Path, config: RunConfig, trace: list[tuple[RoundRecord, MetricsRow]]
) -> None:
    doc = {
        "seed": config.base_seed,
        "behavior_mode": config.behavior_mode.value,
        "params": params_to_dict(config.sim_params),
        "rounds": len(trace),
    }
    if trace:
        _, final = trace[-1]
        doc["class_counts"] = {cls.value: final.counts[cls] for cls in CLASS_ORDER}
        doc["final"] = {
            "lurp_raw": final.lurp_raw,
            "lurp_clamped": final.lurp_clamped,
            "t_total": final.t_total,
            "tokens": {cls.value: final.tokens[cls] for cls in CLASS_ORDER},
            "wealth": {cls.value: _json_num(final.wealth[cls]) for cls in CLASS_ORDER},
        }
    _dump_json(path, doc)


# --- aggregate output -------------------------------------------------------

def write_aggregate_csv(path: Path, agg: AggregateStats) -> None:
    param_names = sorted({name for cell in agg.cells for name in cell.params})
    header = [*param_names, "round", "metric", *STAT_NAMES, "count"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for cell in agg.cells:
            cell_cols = [_param_str(cell.params.get(name)) for name in param_names]
            rounds = cell.counts.shape[0]
            for r in range(rounds):
                for m, metric in enumerate(agg.metric_names):
                    writer.writerow(
                        cell_cols
                        + [str(r), metric]
                        + [fmt(float(cell.stats[s][r, m])) for s in STAT_NAMES]
                        + [str(int(cell.counts[r, m]))]
                    )


def write_aggregate_json(path: Path, agg: AggregateStats) -> None:
    cells = []
    for cell in agg.cells:
        rounds = []
        for r in range(cell.counts.shape[0]):
            per_metric = {}
            for m, metric in enumerate(agg.metric_names):
                per_metric[metric] = {
                    **{s: _json_num(float(cell.stats[s][r, m])) for s in STAT_NAMES},
                    "count": int(cell.counts[r, m]),
                }
            rounds.append(per_metric)
        cells.append({"params": _jsonable(cell.params), "rounds": rounds})
    _dump_json(
        path,
        {
            "metric_names": list(agg.metric_names),
            "replications": agg.replications,
            "cells": cells,
        },
    )


def write_validation_json(path: Path, report: ValidationReport) -> None:
    _dump_json(
        path,
        {
            "k_max": report.k_max,
            "tolerance": report.tolerance,
            "max_rel_error": report.max_rel_error,
            "passed": report.passed,
        },
    )


# --- helpers ----------------------------------------------------------------

def _bool(b: bool) -> str:
    return "true" if b else "false"


def _param_str(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return _bool(value)
    if isinstance(value, float):
        return fmt(value)
    return str(value)


def _json_num(x: float):
    return None if math.isnan(x) else x


def _jsonable(doc: dict) -> dict:
    out = {}
    for key, value in doc.items():
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        out[key] = value
    return out


def _dump_json(path: Path, doc) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
