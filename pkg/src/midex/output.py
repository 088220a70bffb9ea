"""On-disk artifact formats.

Two delimited/structured formats are emitted per run: trajectory.csv with
the regret curves sampled at the snapshot cadence, and summary.json with
the effective config, seed derivation, per-replication finals, aggregate
statistics, bound values and diagnostics.  All floats are written with 17
significant digits so every float64 round-trips exactly; nothing
time-dependent is written, which makes reruns byte-identical.
"""

import os

import numpy as np

from .config import emit_config
from .errors import MidexError

TRAJECTORY_HEADER = "t,regret_cum,shifted_regret_cum,bench_score,played_avg_score"

SEED_DERIVATION = ("PCG64(SeedSequence(master_seed, spawn_key=(replication, role))); "
                   "roles: 0=learner, 1=environment, 2=reduction")


def fmt_float(value) -> str:
    """17-significant-digit decimal form; exact float64 round-trip."""
    v = float(value)
    if not np.isfinite(v):
        raise MidexError(f"cannot serialize non-finite value {v}")
    return "%.17g" % v


def json_dumps(obj) -> str:
    """JSON text with fmt_float applied to every float; stable key order."""
    pieces = []
    _write_json(obj, pieces, 0)
    pieces.append("\n")
    return "".join(pieces)


def _write_json(obj, out, depth):
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            out.append(f'{inner}"{key}": ')
            _write_json(value, out, depth + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        scalars = all(not isinstance(v, (dict, list, tuple)) for v in seq)
        if scalars:
            out.append("[" + ", ".join(_scalar_json(v) for v in seq) + "]")
        else:
            out.append("[\n")
            for i, value in enumerate(seq):
                out.append(inner)
                _write_json(value, out, depth + 1)
                out.append(",\n" if i < len(seq) - 1 else "\n")
            out.append(pad + "]")
    else:
        out.append(_scalar_json(obj))


def _scalar_json(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise MidexError(f"cannot serialize {type(value).__name__} to JSON")


def trajectory_text(curve) -> str:
    """CSV rows for one CurveStats (across-replication means)."""
    lines = [TRAJECTORY_HEADER]
    for i, t in enumerate(curve.t_points):
        lines.append(",".join((
            str(int(t)),
            fmt_float(curve.regret_mean[i]),
            fmt_float(curve.shifted_mean[i]),
            fmt_float(curve.bench_score[i]),
            fmt_float(curve.played_mean[i]),
        )))
    return "\n".join(lines) + "\n"


def _curve_summary(curve) -> dict:
    return {
        "per_replication_final": [float(v) for v in curve.final_regrets],
        "mean_final": curve.mean_final,
        "std_final": curve.std_final,
        "per_replication_final_shifted": [float(v) for v in curve.final_shifted],
        "mean_final_shifted": float(curve.final_shifted.mean()),
        "std_final_shifted": float(curve.final_shifted.std()),
    }


def _diagnostics_summary(diag) -> dict:
    return {
        "rounds": diag.rounds,
        "g_abs_max": diag.g_abs_max,
        "scaled_estimate_min": diag.scaled_estimate_min,
        "scaled_estimate_max": diag.scaled_estimate_max,
        "weighted_sq_mean": diag.weighted_sq_sum / max(diag.rounds, 1),
        "floor_margin_min": diag.floor_margin_min,
        "potential_margin_min": diag.potential_margin_min,
    }


def build_summary(agg, command="run", verify_report=None) -> dict:
    """The summary.json payload for an aggregate result."""
    bench = agg.benchmark
    mean_final = agg.curve.mean_final
    out = {
        "format": "midex-summary-v1",
        "command": command,
        "config": emit_config(agg.config),
        "seeds": {
            "master": agg.config.seed,
            "replications": agg.config.replications,
            "derivation": SEED_DERIVATION,
        },
        "benchmark": {
            "best_arm": bench.best_arm + 1,
            "best_cumulative_score": bench.best_value,
            "ties": [a + 1 for a in bench.ties],
        },
        "params": None if agg.params is None else {
            "eta": agg.params.eta,
            "gamma": agg.params.gamma,
            "m_prime": agg.params.m_prime,
        },
        "bounds": {
            "full": agg.bound_full,
            "simplified": agg.bound_simplified,
            "mean_final_over_simplified": mean_final / agg.bound_simplified,
        },
        "regret": _curve_summary(agg.curve),
    }
    if agg.multi_curve is not None:
        out["multi_regret"] = _curve_summary(agg.multi_curve)
    if agg.diagnostics is not None:
        out["diagnostics"] = _diagnostics_summary(agg.diagnostics)
    if verify_report is not None:
        out["verification"] = verify_report.to_dict()
    return out


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_run_outputs(agg, out_dir, figures=True, command="run",
                      verify_report=None) -> dict:
    """Emit trajectory.csv, summary.json (and figures) for one aggregate.

    Returns {artifact name: path}.  Figures are rendered on a best-effort
    basis and are not covered by the byte-identity guarantee; the CSV and
    JSON artifacts are.
    """
    paths = {}
    traj = os.path.join(out_dir, "trajectory.csv")
    write_text(traj, trajectory_text(agg.curve))
    paths["trajectory"] = traj
    if agg.multi_curve is not None:
        multi = os.path.join(out_dir, "trajectory_multi.csv")
        write_text(multi, trajectory_text(agg.multi_curve))
        paths["trajectory_multi"] = multi
    summary = os.path.join(out_dir, "summary.json")
    write_text(summary, json_dumps(build_summary(agg, command=command,
                                                 verify_report=verify_report)))
    paths["summary"] = summary
    if figures:
        from . import plotting
        fig = os.path.join(out_dir, "regret.png")
        plotting.regret_figure(agg, fig)
        paths["figure"] = fig
    return paths


SWEEP_HEADER = ("K,T,algorithm,replications,mean_final_regret,std_final_regret,"
                "bound_full,bound_simplified,mean_final_over_simplified")


def sweep_summary_text(rows) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(",".join((
            str(r["K"]), str(r["T"]), r["algorithm"], str(r["replications"]),
            fmt_float(r["mean_final_regret"]), fmt_float(r["std_final_regret"]),
            fmt_float(r["bound_full"]), fmt_float(r["bound_simplified"]),
            fmt_float(r["mean_final_over_simplified"]),
        )))
    return "\n".join(lines) + "\n"


def fit_loglog_slope(ts, means):
    """Least-squares slope of ln(mean regret) against ln(T)."""
    ts = np.asarray(ts, dtype=float)
    means = np.asarray(means, dtype=float)
    if ts.size < 2 or np.any(means <= 0.0):
        return None
    return float(np.polyfit(np.log(ts), np.log(means), 1)[0])


def write_sweep_outputs(rows, out_dir, figures=True) -> dict:
    """Emit sweep_summary.csv / .json (and the scaling figure)."""
    paths = {}
    csv_path = os.path.join(out_dir, "sweep_summary.csv")
    write_text(csv_path, sweep_summary_text(rows))
    paths["sweep_csv"] = csv_path

    slopes = {}
    for k in sorted({r["K"] for r in rows}):
        cells = sorted((r for r in rows if r["K"] == k), key=lambda r: r["T"])
        slope = fit_loglog_slope([r["T"] for r in cells],
                                 [r["mean_final_regret"] for r in cells])
        if slope is not None:
            slopes[str(k)] = slope
    payload = {
        "format": "midex-sweep-v1",
        "cells": rows,
        "loglog_slope_by_K": slopes,
    }
    json_path = os.path.join(out_dir, "sweep_summary.json")
    write_text(json_path, json_dumps(payload))
    paths["sweep_json"] = json_path
    if figures:
        from . import plotting
        fig = os.path.join(out_dir, "sweep.png")
        plotting.sweep_figure(rows, fig)
        paths["figure"] = fig
    return paths
