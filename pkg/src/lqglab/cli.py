"""Command-line interface.

Exit codes: 0 success (all checks PASS), 1 experiment FAIL, 2 usage or
configuration error. Every run echoes its effective configuration into
the output directory for exact replay.
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import click
import numpy as np

from . import lbm
from .domains import DomainSpec
from .errors import LqgError
from .gff import sample_gff
from .gridio import (
    domain_from_config,
    dump_config,
    field_csv_rows,
    measure_csv_rows,
    read_config,
    write_csv,
    write_field,
    write_measure,
)
from .harness import ExperimentConfig, config_echo, export_report, run_ensemble
from .measures import build_boundary_measure, build_liouville_measure


def _parse_eps_list(text: str) -> list:
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if "^" in tok:
            base, exp = tok.split("^")
            out.append(float(base) ** float(exp))
        else:
            out.append(float(tok))
    return out


def _merge(defaults: dict, config: str | None, flags: dict) -> dict:
    vals = dict(defaults)
    if config:
        vals.update(read_config(config))
    for key, val in flags.items():
        if val is not None:
            vals[key] = val
    return vals


def _experiment_config(vals: dict, experiment: str) -> ExperimentConfig:
    domain = None
    if vals.get("domain"):
        domain = domain_from_config(
            str(vals["domain"]), int(vals["n"]), vals.get("boundary")
        )
    options = {}
    for key in ("measure_eps", "dt", "check_eps"):
        if key in vals:
            options[key] = float(vals[key])
    for key in ("walkers", "trials", "max_radius"):
        if key in vals:
            options[key] = int(vals[key])
    if "pair_specs" in vals:
        options["pair_specs"] = vals["pair_specs"]
    return ExperimentConfig(
        experiment=experiment,
        domain=domain,
        gamma=float(vals.get("gamma", 0.0)),
        eps_list=_parse_eps_list(vals.get("eps", "0.125")),
        replicates=int(vals.get("replicates", 2)),
        seed=int(vals.get("seed", 0)),
        options=options,
    )


def _common(fn):
    for deco in reversed(
        [
            click.option("--domain", default=None, help="square | disk | upper-disk"),
            click.option("--n", default=None, type=int, help="lattice resolution"),
            click.option("--gamma", default=None, type=float),
            click.option("--eps", default=None, help="comma-separated dyadic scales"),
            click.option("--replicates", default=None, type=int),
            click.option("--seed", default=None, type=int),
            click.option("--out", default="out", help="output directory"),
            click.option("--threads", default=None, type=int, help="worker cap (informational; single-process)"),
            click.option("--config", default=None, help="key=value config file"),
        ]
    ):
        fn = deco(fn)
    return fn


def _run_experiment(experiment: str, defaults: dict, out: str, config: str | None, flags: dict) -> int:
    vals = _merge(defaults, config, flags)
    cfg = _experiment_config(vals, experiment)
    result = run_ensemble(cfg)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(config_echo(cfg))
    export_report(result, outdir)
    click.echo((outdir / "SUMMARY.txt").read_text(), nl=False)
    return 0 if result.passed else 1


@click.group()
def main():
    """Lattice Liouville measures: sampling, reconstruction, verification."""


def _flags(domain, n, gamma, eps, replicates, seed, threads):
    return {
        "domain": domain,
        "n": n,
        "gamma": gamma,
        "eps": eps,
        "replicates": replicates,
        "seed": seed,
        "threads": threads,
    }


@main.command("gff-sample")
@_common
def gff_sample(domain, n, gamma, eps, replicates, seed, out, threads, config):
    """Sample one field replicate and write it as binary + CSV."""
    vals = _merge(
        {"domain": "square", "n": 64, "seed": 0},
        config,
        _flags(domain, n, gamma, eps, replicates, seed, threads),
    )
    dom = domain_from_config(str(vals["domain"]), int(vals["n"]), vals.get("boundary"))
    field = sample_gff(dom, int(vals["seed"]))
    if vals.get("gamma") is not None:
        field.gamma_context = float(vals["gamma"])
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(dump_config(vals))
    write_field(outdir / "field.lqgf", field)
    write_csv(outdir / "field.csv", ["ix", "iy", "x", "y", "value"], field_csv_rows(field))
    click.echo(f"wrote {outdir / 'field.lqgf'}")
    sys.exit(0)


@main.command("measure-build")
@_common
def measure_build(domain, n, gamma, eps, replicates, seed, out, threads, config):
    """Sample a field and build its area (or boundary) measure."""
    vals = _merge(
        {"domain": "disk", "n": 64, "gamma": 1.0, "eps": "0.125", "seed": 0},
        config,
        _flags(domain, n, gamma, eps, replicates, seed, threads),
    )
    dom = domain_from_config(str(vals["domain"]), int(vals["n"]), vals.get("boundary"))
    field = sample_gff(dom, int(vals["seed"]))
    scale = _parse_eps_list(vals["eps"])[0]
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(dump_config(vals))
    if str(vals["domain"]) == "upper-disk":
        nu = build_boundary_measure(field, float(vals["gamma"]), scale)
        write_csv(
            outdir / "boundary_measure.csv",
            ["bin", "x", "mass"],
            ((b, x, m) for b, (x, m) in enumerate(zip(nu.bin_centers(), nu.mass))),
        )
        click.echo(f"wrote {outdir / 'boundary_measure.csv'}")
    else:
        mu = build_liouville_measure(field, float(vals["gamma"]), scale)
        write_measure(outdir / "measure.lqgm", mu)
        write_csv(outdir / "measure.csv", ["ix", "iy", "mass"], measure_csv_rows(mu))
        click.echo(f"wrote {outdir / 'measure.lqgm'}")
    sys.exit(0)


@main.command("lbm-run")
@_common
def lbm_run(domain, n, gamma, eps, replicates, seed, out, threads, config):
    """Simulate one Brownian path with its quantum clock; dump t,x,y,phi."""
    vals = _merge(
        {"domain": "disk", "n": 256, "gamma": 0.5, "eps": "0.03125", "seed": 0},
        config,
        _flags(domain, n, gamma, eps, replicates, seed, threads),
    )
    dom = domain_from_config(str(vals["domain"]), int(vals["n"]), vals.get("boundary"))
    res = dom.resolution
    dt = float(vals.get("dt", (1.0 / res) ** 2 / 4.0))
    path = lbm.sample_brownian_path(dt, int(vals["seed"]), resolution=res)
    field = sample_gff(dom, int(vals["seed"]))
    clock = lbm.quantum_clock(path, field, float(vals["gamma"]), _parse_eps_list(vals["eps"])[0])
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(dump_config(vals))
    rows = zip(path.times, path.positions[:, 0], path.positions[:, 1], clock.phi)
    write_csv(outdir / "path.csv", ["t", "x", "y", "phi"], rows)
    click.echo(f"wrote {outdir / 'path.csv'} ({len(path.times)} steps)")
    sys.exit(0)


_EPS_LADDER = "2^-3,2^-4,2^-5,2^-6"

_EXPERIMENT_DEFAULTS = {
    "verify-variance": (
        "variance",
        {"domain": "disk", "n": 512, "gamma": 0.5, "eps": _EPS_LADDER, "replicates": 400, "seed": 100},
    ),
    "verify-covariance": (
        "covariance",
        {"domain": "disk", "n": 512, "gamma": 0.5, "eps": _EPS_LADDER, "replicates": 400, "seed": 100},
    ),
    "recon-run": (
        "reconstruction",
        {"domain": "disk", "n": 512, "gamma": 0.5, "eps": _EPS_LADDER, "replicates": 200, "seed": 100},
    ),
    "boundary-recon": (
        "boundary",
        {"domain": "upper-disk", "n": 512, "gamma": 0.5, "eps": _EPS_LADDER, "replicates": 200, "seed": 100},
    ),
    "lbm-extension": (
        "lbm-extension",
        {"domain": "disk", "n": 256, "gamma": 0.5, "eps": _EPS_LADDER, "replicates": 200, "seed": 100, "walkers": 20000},
    ),
    "exponent-estimate": (
        "exponent",
        {"replicates": 2, "seed": 100, "trials": 100000, "max_radius": 256},
    ),
}


_EXPERIMENT_HELP = {
    "verify-variance": "Ensemble variance of the reconstruction residual across scales.",
    "verify-covariance": "Ensemble covariance decay of the reconstruction residual.",
    "recon-run": "Field-from-area-measure reconstruction correlation experiment.",
    "boundary-recon": "Boundary-trace-from-length-measure reconstruction experiment.",
    "lbm-extension": "Harmonic-extension-from-quantum-clock experiment off a Brownian range.",
    "exponent-estimate": "Monte Carlo non-intersection exponents of planar walk packets.",
}


def _register_experiment_command(name: str):
    experiment, defaults = _EXPERIMENT_DEFAULTS[name]

    @main.command(name, help=_EXPERIMENT_HELP[name])
    @_common
    def _cmd(domain, n, gamma, eps, replicates, seed, out, threads, config):
        code = _run_experiment(
            experiment,
            defaults,
            out,
            config,
            _flags(domain, n, gamma, eps, replicates, seed, threads),
        )
        sys.exit(code)

    _cmd.__name__ = name.replace("-", "_")
    return _cmd


for _name in _EXPERIMENT_DEFAULTS:
    _register_experiment_command(_name)


def entry():  # pragma: no cover - thin wrapper
    try:
        main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except LqgError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    entry()
