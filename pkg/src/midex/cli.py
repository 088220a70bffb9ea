"""Command-line entry points.

Subcommands: run (one experiment), sweep (grid over T and/or K), reduce
(dueling-bandit mode through the pair reduction), verify (numeric check
battery) and bound (parameter/guarantee calculator).  Flag overrides beat
config-file values and the effective config is echoed into summary.json.
Exit codes: 0 success, 1 usage or config error, 2 verification failure.
"""

from dataclasses import dataclass, replace
import os
import sys

import click

from . import __version__
from .config import parse_config
from .errors import MidexError
from .harness import run_replications
from .learner import default_params, regret_bound, simplified_regret_bound
from .output import (
    fit_loglog_slope,
    fmt_float,
    json_dumps,
    write_run_outputs,
    write_sweep_outputs,
    write_text,
)
from .verify import run_battery

OUT_DIR_ENV = "MIDEX_OUT_DIR"


@dataclass
class CliCommand:
    """One parsed invocation: subcommand, config path and flag overrides."""

    subcommand: str
    config_path: str = None
    overrides: dict = None

    def load_config(self):
        config = parse_config(self.config_path)
        effective = {k: v for k, v in (self.overrides or {}).items() if v is not None}
        if self.subcommand == "reduce":
            effective["algorithm"] = "reduced"
        if effective:
            config = replace(config, **effective)
        return config


def _resolve_out(option_value, config) -> str:
    if option_value:
        return option_value
    if config is not None and config.out_dir:
        return config.out_dir
    return os.environ.get(OUT_DIR_ENV, "midex-out")


def _fail(message, code=1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _run_options(fn):
    for deco in (
        click.option("--seed", type=int, default=None, help="Master seed override."),
        click.option("--reps", "replications", type=int, default=None,
                     help="Replication count override."),
        click.option("--eta", type=float, default=None, help="Learning-rate override."),
        click.option("--gamma", type=float, default=None,
                     help="Exploration-floor override."),
        click.option("--out", default=None, help="Output directory."),
        click.option("--workers", type=int, default=1, show_default=True,
                     help="Worker processes for replications."),
        click.option("--figures/--no-figures", default=True, show_default=True,
                     help="Render PNG figures next to the data files."),
    ):
        fn = deco(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="midex")
def main():
    """Multi-dueling bandit experiments: winner feedback, adversarial
    preference sequences, exponential-weights learning."""


def _execute(cmd: CliCommand, out, workers, figures, embed_verify=False):
    try:
        config = cmd.load_config()
        out_dir = _resolve_out(out, config)
        agg = run_replications(config, workers=workers)
        report = run_battery("exhaustive", seed=config.seed) if embed_verify else None
        paths = write_run_outputs(agg, out_dir, figures=figures,
                                  command=cmd.subcommand, verify_report=report)
    except MidexError as exc:
        _fail(exc)
    click.echo(f"algorithm {config.algorithm}  K={config.K} T={config.T} "
               f"n={config.replications} seed={config.seed}")
    click.echo(f"benchmark arm {agg.benchmark.best_arm + 1} "
               f"(cumulative score {fmt_float(agg.benchmark.best_value)})")
    click.echo(f"mean final regret {agg.curve.mean_final:.4f} "
               f"(std {agg.curve.std_final:.4f})")
    if agg.multi_curve is not None:
        click.echo(f"wrapped multiset mean final regret {agg.multi_curve.mean_final:.4f} "
                   f"(gap {agg.curve.mean_final - agg.multi_curve.mean_final:+.4f})")
    click.echo(f"guarantee {agg.bound_simplified:.1f}, "
               f"mean/guarantee {agg.curve.mean_final / agg.bound_simplified:.4f}")
    if report is not None and not report.passed:
        _fail("embedded verification failed; see summary.json", code=2)
    for name, path in paths.items():
        click.echo(f"wrote {name}: {path}")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@_run_options
@click.option("--verify", "embed_verify", is_flag=True,
              help="Attach an exhaustive check-battery report to summary.json.")
def run(config_path, seed, replications, eta, gamma, out, workers, figures,
        embed_verify):
    """Run one experiment from a config file."""
    cmd = CliCommand("run", config_path,
                     {"seed": seed, "replications": replications,
                      "eta": eta, "gamma": gamma})
    _execute(cmd, out, workers, figures, embed_verify)


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@_run_options
def reduce(config_path, seed, replications, eta, gamma, out, workers, figures):
    """Run the dueling-bandit reduction of the configured learner."""
    cmd = CliCommand("reduce", config_path,
                     {"seed": seed, "replications": replications,
                      "eta": eta, "gamma": gamma})
    _execute(cmd, out, workers, figures)


def _parse_grid(text, name):
    try:
        values = [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        _fail(f"--{name} expects comma-separated integers, got {text!r}")
    if not values:
        _fail(f"--{name} is empty")
    return values


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--T-grid", "t_grid", default=None,
              help="Comma-separated horizons, e.g. 1000,10000,100000.")
@click.option("--K-grid", "k_grid", default=None,
              help="Comma-separated arm counts (adversary must be size-free).")
@_run_options
def sweep(config_path, t_grid, k_grid, seed, replications, eta, gamma, out,
          workers, figures):
    """Grid of runs over T and/or K; one artifact directory per cell."""
    import yaml

    from .config import parse_config_dict
    from .errors import ConfigParseError

    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            base = yaml.safe_load(fh.read())
    except (OSError, yaml.YAMLError) as exc:
        _fail(ConfigParseError(f"cannot load {config_path}: {exc}"))
    if not isinstance(base, dict):
        _fail(f"config root must be a mapping in {config_path}")

    ts = _parse_grid(t_grid, "T-grid") if t_grid else [base.get("T")]
    ks = _parse_grid(k_grid, "K-grid") if k_grid else [base.get("K")]
    out_dir = out or base.get("out_dir") or os.environ.get(OUT_DIR_ENV, "midex-out")
    overrides = {"seed": seed, "replications": replications, "eta": eta,
                 "gamma": gamma}

    rows = []
    for k in ks:
        for t in ts:
            cell = dict(base)
            cell["T"] = t
            cell["K"] = k
            adv = cell.get("adversary")
            if isinstance(adv, dict) and "K" in adv:
                adv = dict(adv)
                adv["K"] = k
                cell["adversary"] = adv
            cell.pop("out_dir", None)
            try:
                config = parse_config_dict(cell)
                config = replace(config, **{key: v for key, v in overrides.items()
                                            if v is not None})
                agg = run_replications(config, workers=workers)
                cell_dir = os.path.join(out_dir, f"K{k}_T{t}")
                write_run_outputs(agg, cell_dir, figures=figures, command="sweep-cell")
            except MidexError as exc:
                _fail(f"cell K={k} T={t}: {exc}")
            rows.append({
                "K": k, "T": t, "algorithm": config.algorithm,
                "replications": config.replications,
                "mean_final_regret": agg.curve.mean_final,
                "std_final_regret": agg.curve.std_final,
                "bound_full": agg.bound_full,
                "bound_simplified": agg.bound_simplified,
                "mean_final_over_simplified":
                    agg.curve.mean_final / agg.bound_simplified,
            })
            click.echo(f"cell K={k} T={t}: mean final regret "
                       f"{agg.curve.mean_final:.4f}")
    try:
        paths = write_sweep_outputs(rows, out_dir, figures=figures)
    except MidexError as exc:
        _fail(exc)
    for k in ks:
        cells = sorted((r for r in rows if r["K"] == k), key=lambda r: r["T"])
        slope = fit_loglog_slope([r["T"] for r in cells],
                                 [r["mean_final_regret"] for r in cells])
        if slope is not None:
            click.echo(f"K={k}: log-log slope of mean regret vs T = {slope:.4f}")
    for name, path in paths.items():
        click.echo(f"wrote {name}: {path}")


@main.command()
@click.option("--level", type=click.Choice(["exhaustive", "sampled"]),
              default="exhaustive", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None,
              help="Also write verify_report.json to this directory.")
def verify(level, seed, out):
    """Run the numeric check battery; exit 2 if any check fails."""
    report = run_battery(level, seed=seed)
    width = max(len(r.check) for r in report.results)
    for r in report.results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"{r.check.ljust(width)}  {status}  "
                   f"deviation {r.deviation:.3e} (tolerance {r.tolerance:g})  {r.detail}")
    click.echo(f"battery level={report.level} seed={report.seed}: "
               + ("all checks passed" if report.passed else "FAILURES PRESENT"))
    if out:
        path = os.path.join(out, "verify_report.json")
        write_text(path, json_dumps(report.to_dict()))
        click.echo(f"wrote report: {path}")
    if not report.passed:
        sys.exit(2)


@main.command()
@click.argument("k", type=int)
@click.argument("t", type=int)
@click.argument("m", type=int)
def bound(k, t, m):
    """Print tuned parameters and regret guarantees for (K, T, m)."""
    try:
        params = default_params(k, t, m)
    except MidexError as exc:
        _fail(exc)
    full = regret_bound(k, t, params.m_prime)
    simple = simplified_regret_bound(k, t)
    rows = [
        ("K", str(k)), ("T", str(t)), ("m", str(m)),
        ("m_prime", fmt_float(params.m_prime)),
        ("eta", fmt_float(params.eta)),
        ("gamma", fmt_float(params.gamma)),
        ("bound_full", fmt_float(full)),
        ("bound_simplified", fmt_float(simple)),
    ]
    for name, value in rows:
        click.echo(f"{name:>18}  {value}")


if __name__ == "__main__":
    main()
