"""Monte Carlo ensemble orchestration and report export.

Experiments are registered by name in experiments.py; each produces
per-replicate rows plus an aggregation function that is a pure function
of those rows, so every report can be re-aggregated from its CSV.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .domains import DomainSpec, is_dyadic
from .errors import ConfigurationError, ExperimentError, InputError, PreconditionError
from .gridio import dump_config, write_csv
from .rngs import STREAM_EXPONENT, rng_for

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    experiment: str
    domain: DomainSpec | None
    gamma: float
    eps_list: list
    replicates: int
    seed: int
    options: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.replicates < 2:
            raise ConfigurationError("replicate count must be >= 2")
        eps = list(self.eps_list)
        if eps != sorted(eps, reverse=True) or len(set(eps)) != len(eps):
            raise ConfigurationError("eps list must be strictly decreasing")
        for e in eps:
            if not is_dyadic(e):
                raise ConfigurationError(f"eps={e} is not dyadic")


@dataclass
class Check:
    claim: str
    measured: float
    threshold: str
    passed: bool


@dataclass
class EnsembleResult:
    experiment: str
    replicate_header: list
    replicate_rows: list
    aggregate_header: list
    aggregate_rows: list
    checks: list
    metadata: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def run_ensemble(config: ExperimentConfig) -> EnsembleResult:
    """Run the named experiment; deterministic end-to-end for a fixed config.

    Replicate r uses seed config.seed + r. Per-replicate failures are
    logged with their seed; the run aborts if fewer than 80% succeed.
    """
    from . import experiments

    registry = experiments.REGISTRY
    if config.experiment not in registry:
        raise ConfigurationError(
            f"unknown experiment {config.experiment!r} (known: {sorted(registry)})"
        )
    spec = registry[config.experiment]
    t0 = time.time()
    rows, meta, failures = spec.collect(config)
    if failures and failures > config.replicates * 0.2:
        raise ExperimentError(
            f"{failures}/{config.replicates} replicates failed; aborting"
        )
    agg_header, agg_rows, checks = spec.aggregate(rows, config, meta)
    meta = dict(meta)
    meta["failed_replicates"] = failures
    # wall time is logged, not written: reports must be bit-reproducible
    log.info("%s finished in %.3fs", config.experiment, time.time() - t0)
    return EnsembleResult(
        experiment=config.experiment,
        replicate_header=spec.row_header,
        replicate_rows=rows,
        aggregate_header=agg_header,
        aggregate_rows=agg_rows,
        checks=checks,
        metadata=meta,
    )


def export_report(result: EnsembleResult, outdir) -> dict:
    """Write replicates.csv, aggregate.csv and SUMMARY.txt; returns paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "replicates": out / "replicates.csv",
        "aggregate": out / "aggregate.csv",
        "summary": out / "SUMMARY.txt",
    }
    write_csv(paths["replicates"], result.replicate_header, result.replicate_rows)
    write_csv(paths["aggregate"], result.aggregate_header, result.aggregate_rows)
    lines = [f"experiment: {result.experiment}"]
    for key, val in sorted(result.metadata.items()):
        lines.append(f"# {key} = {val}")
    for c in result.checks:
        verdict = "PASS" if c.passed else "FAIL"
        lines.append(
            f"{c.claim}: measured={c.measured!r} threshold=({c.threshold}) {verdict}"
        )
    lines.append("overall: " + ("PASS" if result.passed else "FAIL"))
    paths["summary"].write_text("\n".join(lines) + "\n")
    return paths


def config_echo(config: ExperimentConfig, extra: dict | None = None) -> str:
    vals = {
        "experiment": config.experiment,
        "gamma": config.gamma,
        "eps": ",".join(repr(e) for e in config.eps_list),
        "replicates": config.replicates,
        "seed": config.seed,
    }
    if config.domain is not None:
        vals["domain"] = config.domain.shape.value
        vals["n"] = config.domain.resolution
        vals["boundary"] = config.domain.boundary_condition.value
    vals.update(config.options)
    if extra:
        vals.update(extra)
    return dump_config(vals)


# --------------------------------------------------------------------------
# regression helpers


def fit_log_slope(points) -> tuple:
    """OLS of log(value) on log(scale); returns (slope, intercept, r_squared)."""
    pts = list(points)
    if len(pts) < 3:
        raise PreconditionError("need at least 3 points for a slope fit")
    scales = np.array([p[0] for p in pts], dtype=float)
    values = np.array([p[1] for p in pts], dtype=float)
    if np.any(scales <= 0) or np.any(values <= 0):
        raise InputError("log fit requires positive scales and values")
    x, y = np.log(scales), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), r2


def fit_linear(x, y) -> tuple:
    """Plain OLS y = a*x + b; returns (a, b)."""
    a, b = np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 1)
    return float(a), float(b)


# --------------------------------------------------------------------------
# non-intersection exponents of planar random walks


@dataclass
class ExponentEstimate:
    pair_spec: str
    zeta: float
    stderr: float
    radii: np.ndarray
    probs: np.ndarray
    prob_se: np.ndarray
    trials: int
    survival_radius: np.ndarray  # per trial, the largest ladder radius survived


_STARTS = {
    "1v1": ([(1, 0)], [(-1, 0)]),
    "2v2-proxy": ([(1, 0), (1, 0)], [(-1, 0), (-1, 0)]),
    "1v0": ([(1, 0)], []),
}


def _extend_to_radius(rng, x, y, r):
    """Run one walk until |pos| >= r; returns (site codes list, final pos)."""
    from ._kernels import srw_advance

    codes = []
    r2 = r * r
    chunk = max(256, 2 * r * r)
    while True:
        dirs = rng.integers(0, 4, size=chunk, dtype=np.uint8)
        xs, ys, exited = srw_advance(dirs, x, y, r2)
        codes.append((xs, ys))
        x, y = int(xs[-1]), int(ys[-1])
        if exited:
            return codes, x, y


def estimate_nonintersection_exponent(
    pair_spec: str,
    max_radius: int,
    trials: int,
    seed: int,
    min_trials: int = 10_000,
) -> ExponentEstimate:
    """Monte Carlo estimate of the walk-packet non-intersection exponent.

    Two packets of simple random walks start at lattice distance 2; for
    each dyadic radius r the event is "the packets' traces up to their
    r-exit times share no site". zeta is minus the log-log slope of the
    survival probability. For 2v2-proxy each packet holds two walks and
    the event is non-intersection of the packet unions (a stand-in for
    the four-walk configuration, labeled as such in reports).
    """
    if pair_spec not in _STARTS:
        raise ConfigurationError(f"unknown pair_spec {pair_spec!r}")
    if max_radius < 32 or (max_radius & (max_radius - 1)) != 0:
        raise PreconditionError("max_radius must be a power of 2, at least 32")
    if trials < min_trials:
        raise PreconditionError(f"need at least {min_trials} trials")
    starts_a, starts_b = _STARTS[pair_spec]
    ladder = [2**k for k in range(1, max_radius.bit_length())]
    offset = max_radius + 2
    stride = 2 * offset + 1

    def code_of(xs, ys):
        return ((xs + offset) * stride + (ys + offset)).tolist()

    survival = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        rng = rng_for(seed, t, STREAM_EXPONENT)
        pa = [(x, y) for x, y in starts_a]
        pb = [(x, y) for x, y in starts_b]
        seen_a = {(x + offset) * stride + (y + offset) for x, y in pa}
        seen_b = {(x + offset) * stride + (y + offset) for x, y in pb}
        alive_to = 0
        for r in ladder:
            new_a: set = set()
            for i, (x, y) in enumerate(pa):
                segs, x, y = _extend_to_radius(rng, x, y, r)
                pa[i] = (x, y)
                for xs, ys in segs:
                    new_a.update(code_of(xs, ys))
            new_b: set = set()
            for i, (x, y) in enumerate(pb):
                segs, x, y = _extend_to_radius(rng, x, y, r)
                pb[i] = (x, y)
                for xs, ys in segs:
                    new_b.update(code_of(xs, ys))
            seen_a |= new_a
            seen_b |= new_b
            if seen_b and (not new_a.isdisjoint(seen_b) or not new_b.isdisjoint(seen_a)):
                break
            alive_to = r
        survival[t] = alive_to
    radii = np.array(ladder, dtype=float)
    probs = np.array([(survival >= r).mean() for r in ladder])
    prob_se = np.sqrt(probs * (1 - probs) / trials)
    return _exponent_from_survival(pair_spec, radii, probs, prob_se, trials, survival)


def _exponent_from_survival(pair_spec, radii, probs, prob_se, trials, survival):
    keep = probs > 0
    if keep.sum() < 3 or np.all(probs[keep] == 1.0):
        zeta, stderr = 0.0, 0.0
    else:
        slope, _, _ = fit_log_slope(zip(radii[keep], probs[keep]))
        zeta = -slope
        # binomial error propagated through the OLS weights (levels treated
        # as independent, which understates correlation; reported as-is)
        x = np.log(radii[keep])
        w = (x - x.mean()) / np.sum((x - x.mean()) ** 2)
        var_log = (1 - probs[keep]) / np.maximum(probs[keep] * trials, 1)
        stderr = float(np.sqrt(np.sum(w**2 * var_log)))
    return ExponentEstimate(
        pair_spec=pair_spec,
        zeta=float(zeta),
        stderr=stderr,
        radii=radii,
        probs=probs,
        prob_se=prob_se,
        trials=trials,
        survival_radius=survival,
    )
