"""Experiment configuration files.

Configs are YAML with a flat top level plus a nested adversary block; the
full grammar is documented in the README.  Unknown keys anywhere are hard
errors, and every error message carries the offending field path.  Arms
are 1-based in files (fixed_arm and all reporting); conversion to internal
0-based indices happens here.
"""

import numpy as np
import yaml

from .adversaries import (
    AbruptSwitch,
    Constant,
    CyclicNoCondorcet,
    SeededRandom,
    SinusoidalDrift,
    borda_gap_instance,
)
from .errors import ConfigParseError, ConfigValidationError, MidexError
from .harness import ALGORITHMS, RunConfig

_TOP_KEYS = {
    "K", "T", "m", "m_cycle", "m_schedule", "algorithm", "seed", "replications",
    "eta", "gamma", "snapshot_cadence", "fixed_arm", "trace", "out_dir", "adversary",
}

_ADVERSARY_KEYS = {
    "constant": {"matrix"},
    "abrupt_switch": {"matrices", "switch_times"},
    "sinusoidal_drift": {"amplitude", "period", "K", "base"},
    "seeded_random": {"K", "seed"},
    "cyclic_no_condorcet": {"K", "margin"},
    "borda_gap": {"K", "gap"},
}


def _fail(path, message):
    raise ConfigValidationError(f"{path}: {message}")


def _as_int(value, path):
    if isinstance(value, bool):
        _fail(path, f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    # YAML renders 1e5 as a float; accept it when it is integral
    if isinstance(value, float) and value == int(value):
        return int(value)
    _fail(path, f"expected an integer, got {value!r}")


def _as_float(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _as_bool(value, path):
    if not isinstance(value, bool):
        _fail(path, f"expected true/false, got {value!r}")
    return value


def parse_matrix(node, path):
    """Matrix from a whitespace text block or a nested list of rows."""
    if isinstance(node, str):
        rows = [line.split() for line in node.strip().splitlines() if line.strip()]
        try:
            return [[float(v) for v in row] for row in rows]
        except ValueError as exc:
            _fail(path, f"non-numeric matrix entry ({exc})")
    if isinstance(node, list) and node and all(isinstance(r, list) for r in node):
        return [[_as_float(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)]
                for i, row in enumerate(node)]
    _fail(path, "expected a text block or a list of rows")


def build_adversary(node, default_k, path="adversary"):
    """Construct the spec described by a config block."""
    if not isinstance(node, dict):
        _fail(path, "expected a mapping with a 'kind' field")
    kind = node.get("kind")
    if kind not in _ADVERSARY_KEYS:
        _fail(f"{path}.kind",
              f"unknown kind {kind!r}; expected one of {sorted(_ADVERSARY_KEYS)}")
    unknown = set(node) - _ADVERSARY_KEYS[kind] - {"kind"}
    if unknown:
        _fail(f"{path}.{sorted(unknown)[0]}", f"unknown key for kind {kind!r}")

    def need(key):
        if key not in node:
            _fail(f"{path}.{key}", f"required for kind {kind!r}")
        return node[key]

    def block_k():
        k = node.get("K", default_k)
        if k is None:
            _fail(f"{path}.K", "required (no top-level K to inherit)")
        return _as_int(k, f"{path}.K")

    try:
        if kind == "constant":
            return Constant(parse_matrix(need("matrix"), f"{path}.matrix"))
        if kind == "abrupt_switch":
            mats_node = need("matrices")
            if not isinstance(mats_node, list):
                _fail(f"{path}.matrices", "expected a list of matrices")
            mats = tuple(parse_matrix(m, f"{path}.matrices[{i}]")
                         for i, m in enumerate(mats_node))
            times_node = need("switch_times")
            if not isinstance(times_node, list):
                _fail(f"{path}.switch_times", "expected a list of rounds")
            times = tuple(_as_int(t, f"{path}.switch_times[{i}]")
                          for i, t in enumerate(times_node))
            return AbruptSwitch(mats, times)
        if kind == "sinusoidal_drift":
            amplitude = _as_float(need("amplitude"), f"{path}.amplitude")
            period = _as_float(need("period"), f"{path}.period")
            if "base" in node:
                return SinusoidalDrift(amplitude=amplitude, period=period,
                                       base=parse_matrix(node["base"], f"{path}.base"))
            return SinusoidalDrift(amplitude=amplitude, period=period, K=block_k())
        if kind == "seeded_random":
            return SeededRandom(K=block_k(),
                                seed=_as_int(node.get("seed", 0), f"{path}.seed"))
        if kind == "cyclic_no_condorcet":
            return CyclicNoCondorcet(K=block_k(),
                                     margin=_as_float(need("margin"), f"{path}.margin"))
        # borda_gap: constant instance where arm 1 leads by an exact score gap
        return borda_gap_instance(block_k(), _as_float(need("gap"), f"{path}.gap"))
    except ConfigValidationError:
        raise
    except MidexError as exc:
        _fail(path, str(exc))


def parse_config_dict(data) -> RunConfig:
    """Validate a config mapping and build the RunConfig."""
    if not isinstance(data, dict):
        raise ConfigValidationError(f"config root must be a mapping, got {type(data).__name__}")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        _fail(sorted(unknown)[0], "unknown key")
    for key in ("K", "T", "adversary"):
        if key not in data:
            _fail(key, "required")
    k = _as_int(data["K"], "K")
    t = _as_int(data["T"], "T")

    m_keys = [key for key in ("m", "m_cycle", "m_schedule") if key in data]
    if len(m_keys) > 1:
        _fail(m_keys[1], f"give only one of m, m_cycle, m_schedule (also got {m_keys[0]})")
    m_cycle = None
    if "m_cycle" in data:
        node = data["m_cycle"]
        if not isinstance(node, list) or not node:
            _fail("m_cycle", "expected a non-empty list of subset sizes")
        m_cycle = tuple(_as_int(v, f"m_cycle[{i}]") for i, v in enumerate(node))
        m_schedule = np.resize(np.asarray(m_cycle, dtype=np.int64), t)
    elif "m_schedule" in data:
        node = data["m_schedule"]
        if not isinstance(node, list):
            _fail("m_schedule", "expected a list of per-round subset sizes")
        m_schedule = np.asarray(
            [_as_int(v, f"m_schedule[{i}]") for i, v in enumerate(node)], dtype=np.int64)
    else:
        m_schedule = _as_int(data.get("m", 2), "m")

    algorithm = data.get("algorithm", "midex")
    if algorithm not in ALGORITHMS:
        _fail("algorithm", f"expected one of {ALGORITHMS}, got {algorithm!r}")

    fixed_arm = None
    if "fixed_arm" in data:
        one_based = _as_int(data["fixed_arm"], "fixed_arm")
        if not 1 <= one_based <= k:
            _fail("fixed_arm", f"arm {one_based} outside [1, {k}] (arms are 1-based here)")
        fixed_arm = one_based - 1

    eta = _as_float(data["eta"], "eta") if data.get("eta") is not None else None
    gamma = _as_float(data["gamma"], "gamma") if data.get("gamma") is not None else None
    out_dir = data.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        _fail("out_dir", f"expected a string, got {out_dir!r}")

    adversary = build_adversary(data["adversary"], k)
    try:
        return RunConfig(
            K=k, T=t, adversary=adversary, m_schedule=m_schedule,
            algorithm=algorithm, seed=_as_int(data.get("seed", 0), "seed"),
            replications=_as_int(data.get("replications", 1), "replications"),
            eta=eta, gamma=gamma,
            snapshot_cadence=_as_int(data.get("snapshot_cadence", 0), "snapshot_cadence"),
            fixed_arm=fixed_arm,
            trace=_as_bool(data.get("trace", False), "trace"),
            out_dir=out_dir, m_cycle=m_cycle,
        )
    except MidexError as exc:
        raise ConfigValidationError(str(exc)) from exc


def parse_config_text(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"invalid YAML: {exc}") from exc
    return parse_config_dict(data)


def parse_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


# -- emission (the effective-config echo) ------------------------------------

def _emit_matrix(matrix):
    return [[float(v) for v in row] for row in matrix.p]


def emit_adversary(spec) -> dict:
    if isinstance(spec, Constant):
        return {"kind": "constant", "matrix": _emit_matrix(spec.matrix)}
    if isinstance(spec, AbruptSwitch):
        return {"kind": "abrupt_switch",
                "matrices": [_emit_matrix(m) for m in spec.matrices],
                "switch_times": list(spec.switch_times)}
    if isinstance(spec, SinusoidalDrift):
        return {"kind": "sinusoidal_drift", "amplitude": spec.amplitude,
                "period": spec.period, "base": _emit_matrix(spec.base)}
    if isinstance(spec, SeededRandom):
        return {"kind": "seeded_random", "K": spec.K, "seed": spec.seed}
    if isinstance(spec, CyclicNoCondorcet):
        return {"kind": "cyclic_no_condorcet", "K": spec.K, "margin": spec.margin}
    raise ConfigValidationError(f"cannot emit adversary of type {type(spec).__name__}")


def emit_config(config: RunConfig) -> dict:
    """Round-trippable echo of the effective config.

    out_dir is deliberately omitted: where artifacts land is not part of
    the experiment's identity, and emitted summaries stay byte-identical
    when a run is relocated.
    """
    out = {"K": config.K, "T": config.T}
    if config.m_cycle is not None:
        out["m_cycle"] = list(config.m_cycle)
    elif isinstance(config.m_schedule, (int, np.integer)):
        out["m"] = int(config.m_schedule)
    else:
        out["m_schedule"] = [int(v) for v in config.m_schedule]
    out["algorithm"] = config.algorithm
    out["seed"] = config.seed
    out["replications"] = config.replications
    if config.eta is not None:
        out["eta"] = config.eta
    if config.gamma is not None:
        out["gamma"] = config.gamma
    out["snapshot_cadence"] = config.snapshot_cadence
    if config.fixed_arm is not None:
        out["fixed_arm"] = config.fixed_arm + 1
    if config.trace:
        out["trace"] = True
    out["adversary"] = emit_adversary(config.adversary)
    return out
