"""Command-line front end: ``msetcond {series,enumerate,asymptotic,sample,verify}``.

Every flag maps to a :class:`RunConfig` field; ``--config file.json`` overrides
flags.  The resolved configuration is written to ``run.json`` in the output
directory and embedded in every JSON output.

Exit codes: 0 success, 1 a verification verdict failed, 2 invalid input or an
uncertifiable truncation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import experiments as ex
from .classes import (BUILTIN_CLASSES, CountingSequence, builtin_class, estimate_rho,
                      load_sequence, subexp_diagnostics)
from .enumeration import RadiusSums, constant_A, exact_table, p_distribution, ratio_grid
from .exceptions import MultisetError
from .rng import RandomStream
from .sampling import MultisetObject, SizeProfile, UniformSampler, boltzmann_params, sample_lambda_G, shifted_params
from .serialization import write_csv, write_json, write_jsonl, write_table_csv, table_to_json
from .series import multiset_counts

COMMANDS = ("series", "enumerate", "asymptotic", "sample", "verify")

DEFAULT_EXPERIMENT_ARGS = {
    "condensation": {"grid": [[200, 60], [400, 120]], "M": 2000},
    "remainder": {"points": [[100, 33], [300, 100]], "M": 20000, "S": 10},
    "boltzmann_identity": {"n_box": 10, "M": 1_000_000},
    "atom_membership": {"points": [[400, 200], [500, 100]], "M": 1000},
    "p_tail": {"Ns": [50, 100, 200]},
    "big_jump": {"sums": [40, 80, 160], "M": 100_000},
    "cycle_bound": {"j_max": 20},
    "count_asymptotics": {"rays": [0.1, 0.3], "n_small": 100, "n_large": 400},
    "oracle_equivalence": {"n_max": 12},
    "dual_representation": {"n_max": 40},
}
_NEEDS_RHO = {"remainder", "boltzmann_identity", "p_tail", "big_jump", "cycle_bound",
              "count_asymptotics"}
_SEEDED = {"condensation", "remainder", "boltzmann_identity", "atom_membership", "big_jump"}
_PARALLEL = {"condensation", "remainder", "atom_membership"}


@dataclass
class RunConfig:
    command: str = "series"
    class_name: str = "free_trees"
    class_params: dict = field(default_factory=dict)
    sequence: Optional[str] = None
    domain: str = "exact-integer"
    K: int = 2000
    rho: object = "estimate"
    rho_method: str = "extrapolated"
    rho_window: int = 200
    seed: int = 0
    out: str = "."
    workers: int = 1
    format: str = "csv"
    n_max: int = 40
    N_max: Optional[int] = None
    points: list = field(default_factory=list)
    rays: list = field(default_factory=lambda: [0.1, 0.3])
    p_N_max: int = 200
    tol: float = 1e-8
    mode: str = "uniform"
    n: int = 10
    N: int = 2
    M: int = 10
    epsilon: float = 1e-12
    experiments: list = field(default_factory=list)
    experiment_args: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise MultisetError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--class", dest="class_name", choices=BUILTIN_CLASSES)
    p.add_argument("--alpha", type=float, help="synthetic class exponent")
    p.add_argument("--rho0", type=float, help="synthetic class radius")
    p.add_argument("--integer", action="store_true", help="round the synthetic class up to integers")
    p.add_argument("--sequence", help="b-file with 'k c_k' lines instead of a builtin class")
    p.add_argument("--domain", choices=["exact-integer", "real"])
    p.add_argument("--K", type=int, help="truncation order of the counting sequence")
    p.add_argument("--rho", help="radius of convergence, or 'estimate'")
    p.add_argument("--rho-method", choices=["ratio", "extrapolated"])
    p.add_argument("--rho-window", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msetcond", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("series", help="coefficients, radius estimate and diagnostics")
    _add_common(p)

    p = sub.add_parser("enumerate", help="exact g_{n,N} table and g_n")
    _add_common(p)
    p.add_argument("--n-max", type=int)
    p.add_argument("--N-max", type=int)

    p = sub.add_parser("asymptotic", help="constants A, B0 and exact/asymptotic ratios")
    _add_common(p)
    p.add_argument("--n-max", type=int)
    p.add_argument("--rays", help="comma-separated N/n ratios")
    p.add_argument("--points", help="semicolon-separated n,N pairs")
    p.add_argument("--p-N-max", type=int, help="largest N for the law of P")

    p = sub.add_parser("sample", help="JSON-lines samples")
    _add_common(p)
    p.add_argument("--mode", choices=["uniform", "boltzmann", "remainder-limit"])
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int, help="number of samples")
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("verify", help="run verification experiments")
    _add_common(p)
    p.add_argument("--experiments", help=f"comma-separated subset of {sorted(ex.EXPERIMENTS)}")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {"command": args.command}
    simple = ["class_name", "sequence", "domain", "K", "rho", "rho_method", "rho_window", "seed",
              "out", "workers", "format", "tol", "n_max", "N_max", "p_N_max", "mode", "n", "N",
              "M", "epsilon"]
    for key in simple:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    params = {k: getattr(args, k) for k in ("alpha", "rho0") if getattr(args, k, None) is not None}
    if getattr(args, "integer", False):
        params["integer"] = True
    if params:
        data["class_params"] = params
    if getattr(args, "rays", None):
        data["rays"] = [float(x) for x in args.rays.split(",")]
    if getattr(args, "points", None):
        data["points"] = [[int(v) for v in pair.split(",")] for pair in args.points.split(";") if pair]
    if getattr(args, "experiments", None):
        data["experiments"] = [x.strip() for x in args.experiments.split(",") if x.strip()]
    if args.config:
        override = json.loads(Path(args.config).read_text())
        if not isinstance(override, dict):
            raise MultisetError("config file must hold a JSON object")
        data.update(override)
        data["command"] = args.command
    cfg = RunConfig.from_dict(data)
    if cfg.rho != "estimate":
        cfg.rho = float(cfg.rho)
    return cfg


# ---------------------------------------------------------------------------
# shared helpers


def load_class(cfg: RunConfig) -> CountingSequence:
    if cfg.sequence:
        return load_sequence(cfg.sequence, cfg.domain)
    return builtin_class(cfg.class_name, cfg.K, cfg.class_params)


def resolve_rho(cfg: RunConfig, seq: CountingSequence) -> tuple[float, dict]:
    if cfg.rho == "estimate":
        window = min(cfg.rho_window, max(seq.K - seq.m - 2, 1))
        est = estimate_rho(seq, window, cfg.rho_method)
        return est.rho, {"rho": est.rho, "method": est.method, "residual": est.residual,
                         "window": window}
    rho = float(cfg.rho)
    return rho, {"rho": rho, "method": "user-supplied", "residual": 0.0}


def _out(cfg: RunConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo(cfg: RunConfig, out: Path, extra: Optional[dict] = None) -> dict:
    resolved = cfg.to_dict()
    if extra:
        resolved["resolved"] = extra
    write_json(resolved, out / "run.json")
    return resolved


# ---------------------------------------------------------------------------
# commands


def _diagnostics(seq: CountingSequence, rho: float, out: Path) -> dict:
    try:
        rep = subexp_diagnostics(seq, rho)
    except MultisetError as exc:
        return {"error": str(exc)}
    write_csv(({"n": n, "s1": a, "s2": b} for n, a, b in
               zip(rep.indices, rep.s1_trace, rep.s2_trace)),
              out / "diagnostics.csv", ["n", "s1", "s2"])
    return {"applicable": rep.applicable, "c_rho": rep.c_rho,
            "two_c_rho_target": rep.two_c_rho_target,
            "s1_last": rep.s1_trace[-1] if rep.s1_trace else None,
            "s2_last": rep.s2_trace[-1] if rep.s2_trace else None}


def cmd_series(cfg: RunConfig) -> int:
    seq = load_class(cfg)
    out = _out(cfg)
    write_csv(({"k": k, "c_k": str(c)} for k, c in enumerate(seq.coeffs, start=1)),
              out / "series.csv", ["k", "c_k"])
    result: dict = {"class": seq.name, "K": seq.K, "m": seq.m, "c_m": str(seq.c_m)}
    try:
        rho, result["rho"] = resolve_rho(cfg, seq)
    except MultisetError as exc:
        result["rho"] = {"error": str(exc)}
    else:
        result["diagnostics"] = _diagnostics(seq, rho, out)
    result["config"] = _echo(cfg, out, {"rho": result["rho"]})
    write_json(ex._plain(result), out / "series.json")
    return 0


def cmd_enumerate(cfg: RunConfig) -> int:
    seq = load_class(cfg)
    out = _out(cfg)
    table = exact_table(seq, cfg.n_max, cfg.N_max)
    gn = multiset_counts(seq, cfg.n_max)
    config = _echo(cfg, out)
    if cfg.format == "json":
        data = table_to_json(table)
        data["g_n"] = [str(v) if seq.exact else float(v) for v in gn]
        data["config"] = config
        write_json(data, out / "table.json")
    else:
        write_table_csv(table, out / "table.csv")
        write_csv(({"n": n, "g_n": str(v) if seq.exact else repr(float(v))}
                   for n, v in enumerate(gn)), out / "gn.csv", ["n", "g_n"])
    return 0


def cmd_asymptotic(cfg: RunConfig) -> int:
    seq = load_class(cfg)
    out = _out(cfg)
    rho, rho_info = resolve_rho(cfg, seq)
    radius = RadiusSums(seq, rho, cfg.tol * rho**seq.m / 2)
    model = constant_A(seq, rho, cfg.tol, radius=radius)
    pdist = p_distribution(seq, rho, cfg.p_N_max, cfg.tol, radius=radius)
    points = [tuple(p) for p in cfg.points] or sorted(
        {(n, max(1, round(r * n))) for r in cfg.rays
         for n in (cfg.n_max // 4, cfg.n_max // 2, cfg.n_max) if n > 0})
    table = exact_table(seq, max(n for n, _ in points), max(N for _, N in points))
    rows = ratio_grid(table, model, seq, points)
    Ns = sorted({N for N in (cfg.p_N_max // 4, cfg.p_N_max // 2, cfg.p_N_max) if N >= 1})
    result = {
        "class": seq.name, "rho": rho_info, "A": model.A, "j_cutoff": model.j_cutoff,
        "tail_bound": model.tail_bound, "B0": pdist.B0, "G_rho": pdist.G_rho,
        "P_ratio": {str(N): pdist.ratio(N) for N in Ns},
        "P_ratio_deviation": {str(N): pdist.ratio_deviation(N) for N in Ns},
        "conditional_P1_tv": {str(N): pdist.conditional_P1_tv(N) for N in Ns},
        "grid": rows,
    }
    result["config"] = _echo(cfg, out, {"rho": rho_info})
    write_json(ex._plain(result), out / "asymptotic.json")
    write_csv(rows, out / "ratio_grid.csv", ["n", "N", "log_exact", "log_asymptotic", "ratio",
                                             "rel_error"])
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    seq = load_class(cfg)
    out = _out(cfg)
    extra: dict = {}
    if cfg.M < 0:
        raise MultisetError("M must be >= 0")
    if cfg.mode == "uniform":
        table = exact_table(seq, cfg.n, cfg.N)
        sampler = UniformSampler(table, seq)
        objects = (sampler.sample(cfg.n, cfg.N, RandomStream(cfg.seed, i)) for i in range(cfg.M))
    elif cfg.mode in ("boltzmann", "remainder-limit"):
        rho, extra["rho"] = resolve_rho(cfg, seq)
        if cfg.mode == "boltzmann":
            target, params = seq, boltzmann_params(seq, rho, cfg.epsilon, seed=cfg.seed)
            shift = 0
        else:
            target, params = shifted_params(seq, rho, cfg.epsilon, seed=cfg.seed)
            shift = seq.m
        extra["params"] = params.to_dict()
        objects = (_shift(sample_lambda_G(target, params, RandomStream(cfg.seed, i)), shift)
                   for i in range(cfg.M))
    else:
        raise MultisetError(f"unknown sample mode {cfg.mode!r}")
    write_jsonl(objects, out / "samples.jsonl")
    _echo(cfg, out, extra)
    return 0


def _shift(obj, shift: int):
    if not shift:
        return obj
    if isinstance(obj, SizeProfile):
        return SizeProfile(tuple((k + shift, d) for k, d in obj.counts))
    return MultisetObject(tuple((k + shift, t, d) for k, t, d in obj.components))


def cmd_verify(cfg: RunConfig) -> int:
    seq = load_class(cfg)
    out = _out(cfg)
    names = cfg.experiments or sorted(ex.EXPERIMENTS)
    unknown = [n for n in names if n not in ex.EXPERIMENTS]
    if unknown:
        raise MultisetError(f"unknown experiments {unknown}")
    rho, rho_info = (None, None)
    if any(n in _NEEDS_RHO for n in names):
        rho, rho_info = resolve_rho(cfg, seq)
    reports_dir = out / "reports"
    reports_dir.mkdir(exist_ok=True)
    summary, failed = [], False
    for name in names:
        kwargs = {**DEFAULT_EXPERIMENT_ARGS[name], **cfg.experiment_args.get(name, {})}
        if name in _NEEDS_RHO:
            kwargs["rho"] = rho
        if name in _SEEDED:
            kwargs.setdefault("seed", cfg.seed)
        if name in _PARALLEL:
            kwargs.setdefault("workers", cfg.workers)
        if name not in ("cycle_bound", "oracle_equivalence", "dual_representation"):
            kwargs.setdefault("thresholds", cfg.thresholds)
        for key in ("grid", "points"):
            if key in kwargs:
                kwargs[key] = [tuple(p) for p in kwargs[key]]
        rep = ex.EXPERIMENTS[name](seq, **kwargs)
        (reports_dir / f"{name}.json").write_text(rep.to_json() + "\n")
        summary.extend(rep.summary_rows())
        failed |= not rep.passed
        for c in rep.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {name}.{c.name}: {json.dumps(c.statistic)}")
    write_csv(summary, out / "summary.csv", ["experiment", "class", "check", "passed",
                                             "statistic", "bound"])
    _echo(cfg, out, {"rho": rho_info})
    return 1 if failed else 0


HANDLERS = {"series": cmd_series, "enumerate": cmd_enumerate, "asymptotic": cmd_asymptotic,
            "sample": cmd_sample, "verify": cmd_verify}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except (ValueError, OSError, TypeError) as exc:
        print(f"msetcond {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
