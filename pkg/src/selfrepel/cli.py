"""Command-line entry point: ``selfrepel <subcommand> [--config FILE] [--seed N] [--workers N] [--out DIR]``.

Configuration files are TOML (or JSON when the name ends in ``.json``).
Parameters are read from the table named after the subcommand (``[exact]``,
``[phase_diagram]``, ...), or from the top level when that table is absent.
Every output file starts with a metadata header; the timestamp sits alone on
the last header line so that reruns differ only there.

Exit status: 0 on success, 1 when a certification fails, 2 when the
configuration does not validate (nothing is written in that case).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from . import __version__, acceptance, exact, gks, mcmc, multiscale, tilt
from . import transfer_matrix as tm
from .errors import CapacityError, CertificationError, DomainError
from .model import CoefficientTable, GibbsSpec, PowerLaw, potential_from_dict
from .observables import observable_from_dict

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RESERVED = {"seed", "workers", "out", "kind"}


class ConfigError(ValueError):
    pass


def load_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def _section(cfg: Mapping, kind: str) -> dict:
    for key in (kind, kind.replace("-", "_"), kind.split("-")[0]):
        if key in cfg and isinstance(cfg[key], Mapping):
            return dict(cfg[key])
    return {k: v for k, v in cfg.items() if k not in RESERVED}


class Params:
    """Parameter block that remembers which keys were consumed."""

    def __init__(self, data: Mapping):
        self.data = dict(data)
        self.used: dict[str, Any] = {}

    def get(self, key: str, default=None, required: bool = False):
        if key in self.data:
            value = self.data[key]
        elif required:
            raise ConfigError(f"missing required parameter {key!r}")
        else:
            value = default
        self.used[key] = value
        return value

    def finish(self) -> dict:
        extra = sorted(set(self.data) - set(self.used))
        if extra:
            raise ConfigError(f"unknown parameter(s): {', '.join(extra)}")
        return self.used


def _grid(value, name: str) -> list[float]:
    """A list of numbers, or ``{start, stop, num}`` for an inclusive linear grid."""
    if isinstance(value, Mapping):
        num = int(value["num"])
        if num < 1:
            raise ConfigError(f"{name}.num must be >= 1")
        return [float(v) for v in np.linspace(float(value["start"]), float(value["stop"]), num)]
    if isinstance(value, (list, tuple)) and value:
        return [float(v) for v in value]
    raise ConfigError(f"{name} must be a non-empty list or a {{start, stop, num}} table")


def _int_list(value, name: str) -> list[int]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{name} must be a non-empty list of integers")
    out = []
    for v in value:
        if int(v) != v:
            raise ConfigError(f"{name} entries must be integers, got {v!r}")
        out.append(int(v))
    return out


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Meta:
    kind: str
    config_hash: str
    seed: int

    def lines(self) -> list[str]:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        return [
            f"selfrepel {__version__}",
            f"kind={self.kind}",
            f"config_hash={self.config_hash}",
            f"seed={self.seed}",
            f"rng={mcmc.RNG_NAME}",
            f"timestamp={stamp}",
        ]


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, meta: Meta, columns: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in meta.lines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, Mapping):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_jsonl(path: Path, meta: Meta, records) -> None:
    head = dict(line.split("=", 1) for line in meta.lines()[1:])
    stamp = head.pop("timestamp")
    head["artifact"] = meta.lines()[0]
    with open(path, "w") as fh:
        fh.write(json.dumps({"meta": head}, sort_keys=True) + "\n")
        fh.write(json.dumps({"timestamp": stamp}) + "\n")
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")


def write_json(path: Path, meta: Meta, payload: Mapping) -> None:
    write_jsonl(path, meta, [payload])


# ---------------------------------------------------------------------------
# Jobs: each preparer validates everything and returns a runner
# ---------------------------------------------------------------------------


@dataclass
class Job:
    resolved: dict
    run: Callable[[Path, Meta, int], int]


def _spec_from(p: Params, key: str = "spec") -> GibbsSpec:
    data = p.get(key, required=True)
    if not isinstance(data, Mapping):
        raise ConfigError(f"{key} must be a table")
    return GibbsSpec.from_dict(data)


def _observables_from(p: Params, spec: GibbsSpec):
    raw = p.get("observables", [{"type": "endpoint_square"}])
    obs = [observable_from_dict(o) for o in raw]
    for o in obs:
        o.validate(spec.T, spec.d)
    return obs


def _sampler_from(p: Params, seed: int) -> mcmc.SamplerConfig:
    raw = dict(p.get("sampler", {}))
    sweeps = raw.pop("sweeps", 10_000)
    cfg = mcmc.SamplerConfig(
        sweeps=sweeps,
        burnin=raw.pop("burnin", sweeps // 10 if isinstance(sweeps, int) else 0),
        thin=raw.pop("thin", 1),
        chains=raw.pop("chains", 4),
        seed=seed,
    )
    if raw:
        raise ConfigError(f"unknown sampler parameter(s): {', '.join(sorted(raw))}")
    return cfg


def prepare_exact(p: Params, seed: int) -> Job:
    spec = _spec_from(p)
    obs = _observables_from(p, spec)
    if spec.n_spins > exact.MAX_SPINS:
        raise CapacityError(f"exact enumeration needs d*T <= {exact.MAX_SPINS}, got {spec.n_spins}")

    def run(out: Path, meta: Meta, workers: int) -> int:
        results = exact.expectations(spec, obs, workers)
        rows = [(spec.spec_hash(), o.label(), r.value, r.log_partition, r.config_count) for o, r in zip(obs, results)]
        write_csv(out / "exact.csv", meta, ["spec_hash", "observable", "value", "log_partition", "config_count"], rows)
        return 0

    return Job(p.finish(), run)


def _is_nn_quadratic(pot) -> bool:
    return isinstance(pot, CoefficientTable) and pot.q == 2 and [k for k, c in pot.coeffs if c] == [(1, 2)]


def prepare_transfer(p: Params, seed: int) -> Job:
    pot = potential_from_dict(p.get("potential", {"type": "table", "q": 2, "coeffs": [[1, 2, 1.0]]}))
    if not isinstance(pot, CoefficientTable):
        raise ConfigError("transfer needs a table potential")
    if pot.range > tm.MAX_RANGE:
        raise CapacityError(f"range {pot.range} exceeds {tm.MAX_RANGE}")
    alphas = _grid(p.get("alphas", [0.25]), "alphas")
    horizons = _int_list(p.get("horizons", [4]), "horizons")
    a = float(p.get("step_amplitude", 1.0))
    for alpha in alphas:
        if not alpha >= 0:
            raise DomainError(f"alpha must be >= 0, got {alpha}")
    for T in horizons:
        if not 1 <= T <= tm.MAX_HORIZON:
            raise DomainError(f"horizon must lie in 1..{tm.MAX_HORIZON}, got {T}")
    if not a > 0:
        raise DomainError("step_amplitude must be > 0")

    def run(out: Path, meta: Meta, workers: int) -> int:
        rows = []
        for alpha in alphas:
            for T in horizons:
                msd = tm.banded_msd(pot, alpha, T, a)
                closed = math.nan
                if _is_nn_quadratic(pot):
                    params = tm.IsingParams.from_alpha(alpha, pot.coefficient(1, 2), a)
                    closed = a * a * tm.finite_chain_msd(params, T)
                rows.append((alpha, T, msd, msd / T, closed))
        write_csv(out / "transfer.csv", meta, ["alpha", "T", "msd", "msd_per_step", "closed_form"], rows)
        return 0

    return Job(p.finish(), run)


def prepare_mcmc(p: Params, seed: int) -> Job:
    spec = _spec_from(p)
    obs = _observables_from(p, spec)
    cfg = _sampler_from(p, seed)
    traces = bool(p.get("traces", False))
    mcmc.check_budget(spec, cfg)

    def run(out: Path, meta: Meta, workers: int) -> int:
        res = mcmc.run_chains(spec, obs, cfg, workers, keep_traces=traces)
        rows = [
            (o.label(), e.mean, e.std_error, e.n_samples, e.tau_int, res.acceptance_rate)
            for o, e in zip(obs, res.estimates)
        ]
        cols = ["observable", "mean", "std_error", "n_samples", "tau_int", "acceptance_rate"]
        write_csv(out / "mcmc.csv", meta, cols, rows)
        if traces:
            trace_rows = (
                (c, cfg.burnin + (s + 1) * cfg.thin, obs[o].label(), v)
                for c, chain in enumerate(res.traces)
                for o, tr in enumerate(chain)
                for s, v in enumerate(tr)
            )
            write_csv(out / "mcmc_traces.csv", meta, ["chain", "sweep", "observable", "value"], trace_rows)
        return 0

    return Job(p.finish(), run)


def prepare_recursion(p: Params, seed: int) -> Job:
    alpha = float(p.get("alpha", 2.0))
    c = float(p.get("c", 0.5))
    n_max = int(p.get("n_max", 10))
    clamp = bool(p.get("clamp", True))
    if not alpha > 0 or not c > 0:
        raise DomainError("alpha and c must be > 0")
    if not 1 <= n_max <= multiscale.MAX_LEVELS:
        raise DomainError(f"n_max must lie in 1..{multiscale.MAX_LEVELS}")

    def run(out: Path, meta: Meta, workers: int) -> int:
        states = multiscale.iterate_recursion(alpha, c, n_max, clamp=clamp)
        rows = [(s.n, s.V, s.y, s.log_V) for s in states]
        write_csv(out / "recursion.csv", meta, ["n", "V", "y", "log_V"], rows)
        return 0

    return Job(p.finish(), run)


def prepare_phase_diagram(p: Params, seed: int) -> Job:
    alphas = _grid(p.get("alphas", {"start": 0.1, "stop": 5.0, "num": 20}), "alphas")
    cs = _grid(p.get("cs", {"start": 0.05, "stop": 0.95, "num": 20}), "cs")
    n_max = int(p.get("n_max", multiscale.DIVERGENCE_HORIZON))
    cc = multiscale.c_crit()
    for c in cs:
        if not 0 < c < cc:
            raise DomainError(f"every c must lie in (0, {cc:.6f}), got {c}")
    for a in alphas:
        if not a > 0:
            raise DomainError(f"every alpha must be > 0, got {a}")
    if not 1 <= n_max < multiscale.MAX_LEVELS:
        raise DomainError("n_max out of range")

    def run(out: Path, meta: Meta, workers: int) -> int:
        points = multiscale.phase_diagram(alphas, cs, n_max)
        rows = [
            (pt.alpha, pt.c, pt.classification, pt.growth_ratio, pt.n_reached,
             "" if pt.iteration_agrees is None else pt.iteration_agrees)
            for pt in points
        ]
        cols = ["alpha", "c", "classification", "ratio", "n_reached", "iteration_agrees"]
        write_csv(out / "phase_diagram.csv", meta, cols, rows)
        return 0 if all(pt.iteration_agrees is not False for pt in points) else 1

    return Job(p.finish(), run)


DEFAULT_TILT = [
    {"type": "four_point", "V": 1.0, "beta": 1.0},
    {"type": "convexity", "V": 1.0, "beta": 1.0, "t_grid": {"start": 0.1, "stop": 4.0, "num": 40}},
    {"type": "block_covariance", "T": 8, "alpha": 1.0, "c": 0.5},
    {"type": "tanh_trials", "trials": 1000, "max_pairs": 6},
]


def _tilt_task(item: Mapping, seed: int) -> Callable[[int], dict]:
    q = Params(item)
    kind = q.get("type", required=True)
    if kind == "four_point":
        V, beta = float(q.get("V", required=True)), float(q.get("beta", required=True))
        h = q.get("h")
        if not V > 0 or not 0 < beta * V <= 2:
            raise DomainError("four_point needs V > 0 and 0 < beta V <= 2")
        inputs = q.finish()

        def task(workers):
            r = tilt.minimize_four_point(V, beta, None if h is None else float(h))
            m = r.measure
            return {"check": kind, "inputs": inputs, "slack": r.slack, "pass": r.slack >= -tilt.SLACK_TOL,
                    "value": r.value, "argmin": {"a": m.a, "b": m.b, "p": m.p}}

    elif kind == "convexity":
        V, beta = float(q.get("V", required=True)), float(q.get("beta", required=True))
        grid = _grid(q.get("t_grid", {"start": 0.1, "stop": 4.0, "num": 40}), "t_grid")
        if not beta * V < 2 or min(grid) <= 0:
            raise DomainError("convexity needs beta V < 2 and a positive grid")
        inputs = q.finish()

        def task(workers):
            r = tilt.convexity_certificate(V, beta, grid)
            return {"check": kind, "inputs": inputs, "slack": min(r.min_second_difference, r.min_k_second_derivative),
                    "pass": r.passed, "k_at_V": r.k_at_V}

    elif kind == "block_covariance":
        T, alpha, c = int(q.get("T", required=True)), float(q.get("alpha", required=True)), float(q.get("c", 0.5))
        if T % 2 or T < 2 or T > exact.MAX_SPINS:
            raise CapacityError(f"block_covariance needs even T <= {exact.MAX_SPINS}")
        if not alpha >= 0 or not c > 0:
            raise DomainError("block_covariance needs alpha >= 0 and c > 0")
        inputs = q.finish()

        def task(workers):
            r = tilt.block_covariance_check(T, alpha, c, workers=workers)
            return {"check": kind, "inputs": inputs, "slack": r.slack, "pass": r.passed,
                    "cross_moment": r.cross_moment, "bound": r.bound, "certified": r.certified}

    elif kind == "tanh_trials":
        trials, max_pairs = int(q.get("trials", 1000)), int(q.get("max_pairs", 6))
        if trials < 1 or max_pairs < 1:
            raise DomainError("tanh_trials needs trials >= 1 and max_pairs >= 1")
        inputs = q.finish()

        def task(workers):
            r = tilt.tanh_bound_trials(trials, max_pairs, np.random.default_rng(seed))
            return {"check": kind, "inputs": inputs, "slack": r.min_slack, "pass": r.passed}

    else:
        raise ConfigError(f"unknown tilt check {kind!r}")
    return task


def prepare_tilt(p: Params, seed: int) -> Job:
    items = p.get("checks", DEFAULT_TILT)
    tasks = [_tilt_task(item, seed) for item in items]

    def run(out: Path, meta: Meta, workers: int) -> int:
        records = [t(workers) for t in tasks]
        write_jsonl(out / "tilt.jsonl", meta, records)
        return 0 if all(r["pass"] for r in records) else 1

    return Job(p.finish(), run)


def prepare_gks(p: Params, seed: int) -> Job:
    n_pairs = int(p.get("pairs", 500))
    pairs_T = int(p.get("pairs_T_max", 10))
    n_omit = int(p.get("omission", 200))
    omit_T = int(p.get("omission_T_max", 8))
    Ns = _int_list(p.get("phi_N", list(range(2, 9))), "phi_N")
    gammas = _int_list(p.get("phi_gamma", [4, 6]), "phi_gamma")
    if n_pairs < 0 or n_omit < 0:
        raise DomainError("suite sizes must be >= 0")
    if not 2 <= pairs_T <= gks.MAX_GKS_SPINS or not 2 <= omit_T <= gks.MAX_GKS_SPINS:
        raise CapacityError(f"suite horizons must lie in 2..{gks.MAX_GKS_SPINS}")
    for N in Ns:
        if not 1 <= N <= gks.MAX_POLY_SPINS:
            raise CapacityError(f"phi_N entries must lie in 1..{gks.MAX_POLY_SPINS}")
    for g in gammas:
        if g < 2 or g % 2 or g > gks.MAX_POLY_DEGREE:
            raise DomainError(f"phi_gamma entries must be even and in 2..{gks.MAX_POLY_DEGREE}")

    def run(out: Path, meta: Meta, workers: int) -> int:
        try:
            reports = [
                gks.gks_pair_suite(n_pairs, pairs_T, seed=seed, workers=workers) if n_pairs else None,
                gks.omission_suite(n_omit, omit_T, seed=seed + 1, workers=workers) if n_omit else None,
                gks.phi_power_suite(Ns, gammas),
            ]
        except CertificationError as exc:
            write_json(out / "gks_replay.json", meta, {"error": str(exc), "replay": exc.replay})
            print(f"selfrepel: certification failed: {exc}", file=sys.stderr)
            return 1
        records = []
        for rep in reports:
            if rep is not None:
                records += [{"check": r.check, "spec_hash": r.spec_hash, "slack": r.slack, "pass": r.passed}
                            for r in rep.records]
        write_jsonl(out / "gks.jsonl", meta, records)
        return 0 if all(r["pass"] for r in records) else 1

    return Job(p.finish(), run)


def prepare_scaling(p: Params, seed: int) -> Job:
    pot = potential_from_dict(p.get("potential", {"type": "power", "gamma": 2, "xi": 1.5}))
    alpha = float(p.get("alpha", 0.0))
    horizons = _int_list(p.get("horizons", [16, 32, 64]), "horizons")
    d = int(p.get("d", 1))
    cfg = _sampler_from(p, seed)
    if not alpha >= 0:
        raise DomainError("alpha must be >= 0")
    for T in horizons:
        if T < 2 or T & (T - 1):
            raise DomainError(f"horizons must be powers of two, got {T}")
        mcmc.check_budget(GibbsSpec(d, T, alpha, pot), cfg)
    if len(horizons) < 2:
        raise DomainError("need at least two horizons")

    def run(out: Path, meta: Meta, workers: int) -> int:
        res = mcmc.msd_scaling_sweep(pot, alpha, horizons, cfg, workers, d=d)
        rows = [(T, e.mean, e.std_error, e.n_samples, e.tau_int) for T, e in res.points]
        write_csv(out / "scaling_sweep.csv", meta, ["T", "mean", "std_error", "n_samples", "tau_int"], rows)
        fit = {"label": res.label, "slope": res.slope, "slope_std_error": res.slope_std_error,
               "reference_exponent": multiscale.theorem2_exponent()}
        if isinstance(pot, PowerLaw):
            ce = multiscale.effective_coupling_exponent(pot.gamma, pot.xi)
            fit["coupling_exponent"] = {"s": ce.s, "xi_c": ce.xi_c, "convergent": ce.convergent, "label": ce.label}
        write_json(out / "scaling_sweep_fit.json", meta, fit)
        return 0

    return Job(p.finish(), run)


PREPARERS = {
    "exact": prepare_exact,
    "transfer": prepare_transfer,
    "mcmc": prepare_mcmc,
    "recursion": prepare_recursion,
    "tilt": prepare_tilt,
    "gks-check": prepare_gks,
    "phase-diagram": prepare_phase_diagram,
    "scaling-sweep": prepare_scaling,
}

HELP = {
    "exact": "Exact expectations by enumeration. CSV columns: spec_hash, observable, value, log_partition, config_count.",
    "transfer": "Banded transfer-matrix MSD. CSV columns: alpha, T, msd, msd_per_step, closed_form (nan unless nearest-neighbour quadratic).",
    "mcmc": "Metropolis estimates. CSV columns: observable, mean, std_error, n_samples, tau_int, acceptance_rate; with traces=true also mcmc_traces.csv (chain, sweep, observable, value).",
    "recursion": "Dyadic variance recursion. CSV columns: n, V, y, log_V.",
    "tilt": "Tilt and extremal certificates. JSON lines: check, inputs, slack, pass.",
    "gks-check": "Randomized correlation-inequality suites. JSON lines: check, spec_hash, slack, pass.",
    "phase-diagram": "Phase classification grid. CSV columns: alpha, c, classification, ratio, n_reached, iteration_agrees.",
    "scaling-sweep": "Diagnostic MSD scaling. CSV columns: T, mean, std_error, n_samples, tau_int; fit in scaling_sweep_fit.json.",
    "acceptance": "Run acceptance checks and print a pass/fail table. Selectors: "
    + ", ".join(acceptance.SELECTORS) + " or a criterion number.",
}


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON configuration file")
    common.add_argument("--seed", type=_u64, default=None, help="64-bit seed (overrides the config)")
    common.add_argument("--workers", type=_positive, default=None, help="worker threads")
    common.add_argument("--out", default=None, help="output directory (default: current directory)")
    parser = argparse.ArgumentParser(prog="selfrepel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"selfrepel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(PREPARERS) + ["acceptance"]:
        sp = sub.add_parser(name, parents=[common], help=HELP[name].split(".")[0], description=HELP[name])
        if name == "acceptance":
            sp.add_argument("selectors", nargs="*", default=["all"])
    return parser


def config_hash(kind: str, params: Mapping, seed: int) -> str:
    blob = json.dumps({"kind": kind, "params": _jsonable(params), "seed": seed}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kind = args.command
    try:
        cfg = load_config(args.config) if args.config else {}
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        workers = args.workers if args.workers is not None else int(cfg.get("workers", 1))
        out = Path(args.out if args.out is not None else cfg.get("out", "."))
        if not 0 <= seed < 2**64 or workers < 1:
            raise ConfigError("seed must be a 64-bit unsigned integer and workers >= 1")
        if kind == "acceptance":
            for s in args.selectors:
                acceptance.select(s)
        else:
            job = PREPARERS[kind](Params(_section(cfg, kind)), seed)
    except (ValueError, KeyError, TypeError) as exc:
        msg = f"missing key {exc.args[0]!r}" if isinstance(exc, KeyError) and exc.args else exc
        print(f"selfrepel {kind}: invalid configuration: {msg}", file=sys.stderr)
        return 2

    if kind == "acceptance":
        results = acceptance.run(args.selectors, workers, echo=print)
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} criteria passed")
        return 0 if n_pass == len(results) else 1

    out.mkdir(parents=True, exist_ok=True)
    meta = Meta(kind, config_hash(kind, job.resolved, seed), seed)
    return job.run(out, meta, workers)


if __name__ == "__main__":
    sys.exit(main())
