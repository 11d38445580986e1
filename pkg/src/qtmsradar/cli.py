"""Command-line interface: ``qtmsradar <command> [options]``.

Exit codes: 0 success, 1 a reproduction or self-test check failed,
2 usage or configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND, kernels
from .analytic import (
    AnalyticConfig,
    AnalyticModel,
    NonconvergenceError,
    NumericFailure,
    analytic_roc,
    fit_rho,
)
from .config import ConfigError, RunConfig, load_config
from .detectors import run_experiment, write_series_csv
from .reproduce import FIGURES, reproduce
from .roc import (
    GainNonconvergence,
    RocSchemaError,
    SimulatedConfig,
    integration_gain,
    read_roc_csv,
    roc_from_series,
    summarize,
    write_hist_csv,
    write_roc_csv,
)
from .sampler import NonPsdCovarianceError, WindowSpec, off_covariance

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(out: Path, command: str, config: dict | None, artifacts: list[Path], extra=None) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "artifacts": {str(p.relative_to(out)): _sha256(p) for p in sorted(artifacts)},
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load(args) -> RunConfig:
    if not args.config:
        raise UsageError("--config is required")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _out_dir(args, cfg: RunConfig | None) -> Path:
    out = Path(args.out or (cfg.output_dir if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _experiment(cfg: RunConfig, threads: int):
    cov = cfg.covariance()
    spec = WindowSpec(cfg.window_len, cfg.num_windows, cfg.seed, cfg.drift_stddev)
    return run_experiment(
        cov,
        off_covariance(cov),
        spec,
        cfg.detector_id,
        method=cfg.method,
        threads=threads,
        align_block=cfg.align_block,
    )


def _print_summary(on, off) -> None:
    for s in (on, off):
        print(f"{s.condition:>3}: detector {s.detector_id}, {len(s)} windows of {s.window_len}, "
              f"mean {s.mean():.10g}, SE {s.standard_error():.3g}")


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    on, off = _experiment(cfg, args.threads)
    path = out / "series.csv"
    write_series_csv(path, on, off)
    _print_summary(on, off)
    _write_manifest(out, "simulate", cfg.echo(), [path])
    return EXIT_OK


def cmd_roc(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    on, off = _experiment(cfg, args.threads)
    files = [out / "series.csv", out / "roc.csv", out / "hist.csv"]
    write_series_csv(files[0], on, off)
    write_roc_csv(files[1], roc_from_series(on, off))
    write_hist_csv(files[2], summarize(on, off, cfg.bins))
    _print_summary(on, off)
    _write_manifest(out, "roc", cfg.echo(), files)
    return EXIT_OK


def _analytic_model(cfg: RunConfig) -> AnalyticModel:
    cov = cfg.covariance()
    return AnalyticModel(cfg.n_samples, cfg.rho, cov.sigma1, cov.sigma2)


def cmd_analytic(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    model = _analytic_model(cfg)
    grid = args.pfa_grid or cfg.analytic_grid
    path = out / "roc.csv"
    write_roc_csv(path, analytic_roc(model, grid))
    print(f"analytic ROC: N={model.n_samples}, rho={model.rho:.10g}, {len(grid)} points")
    _write_manifest(out, "analytic", cfg.echo(), [path])
    return EXIT_OK


def cmd_fit(args) -> int:
    curve = read_roc_csv(args.roc_file)
    try:
        fit = fit_rho(curve, args.nominal_n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"rho_hat {fit.rho:.10g}")
    print(f"residual {fit.residual:.6g}")
    if args.out:
        out = _out_dir(args, None)
        path = out / "fit.json"
        path.write_text(json.dumps(
            {"rho": fit.rho, "residual": fit.residual, "nominal_n": fit.nominal_n}, indent=2
        ) + "\n")
        _write_manifest(out, "fit", {"roc_file": str(args.roc_file), "nominal_n": args.nominal_n}, [path])
    return EXIT_OK


def _gain_config(cfg: RunConfig, mode: str, threads: int):
    if mode == "analytic":
        return AnalyticConfig(cfg.rho, cfg.n_samples)
    cov = cfg.covariance()
    method = cfg.method if cfg.detector_id == 5 else "moments"
    return SimulatedConfig(cov, off_covariance(cov), cfg.window_len, cfg.num_windows, cfg.seed, method, threads)


def cmd_gain(args) -> int:
    a = load_config(args.config_a)
    b = load_config(args.config_b)
    if args.seed is not None:
        a.seed = b.seed = args.seed
    out = _out_dir(args, a)
    grid = args.pfa_grid or a.pfa_grid
    ga = _gain_config(a, args.mode, args.threads)
    gb = _gain_config(b, args.mode, args.threads)
    res = integration_gain(ga, gb, a.detector_id, grid)
    path = out / "gain.csv"
    with open(path, "w") as fh:
        fh.write("k,objective\n")
        for k, v in res.trace:
            fh.write(f"{k:.17g},{v:.17g}\n")
    print(f"k {res.k:.10g}")
    print(f"objective {res.objective:.6g}")
    print("trace (k, objective):")
    for k, v in res.trace:
        print(f"  {k:.6f} {v:.6g}")
    _write_manifest(out, "gain", {"a": a.echo(), "b": b.echo(), "mode": args.mode, "pfa_grid": list(grid)},
                    [path], {"k": res.k})
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.figure_id not in FIGURES:
        raise UsageError(f"unknown figure {args.figure_id!r}; choose from {', '.join(FIGURES)}")
    out = _out_dir(args, None)
    kw = {"seed": args.seed or 0, "threads": args.threads}
    if args.windows:
        kw["windows"] = args.windows
    res = reproduce(args.figure_id, out, **kw)
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {res.figure_id}.{c.name}: {c.detail}")
    _write_manifest(out, f"reproduce {args.figure_id}", kw, res.files,
                    {"checks": {c.name: c.passed for c in res.checks}})
    return EXIT_OK if res.passed else EXIT_CHECK_FAILED


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    print(f"backend {BACKEND}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK_FAILED


def _grid(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p_fa grid {text!r}") from None
    if not vals or any(not 0 < v < 1 for v in vals):
        raise argparse.ArgumentTypeError("p_fa values must lie in (0, 1)")
    return vals


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (INI)")
    common.add_argument("--seed", type=_u64, help="override the config seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=_positive, default=1, help="worker threads (speed only)")

    p = argparse.ArgumentParser(prog="qtmsradar", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="write on/off detector series")
    s.set_defaults(func=cmd_simulate)
    s = sub.add_parser("roc", parents=[common], help="series plus empirical ROC and histograms")
    s.set_defaults(func=cmd_roc)
    s = sub.add_parser("analytic", parents=[common], help="analytic ROC curve")
    s.add_argument("--pfa-grid", type=_grid)
    s.set_defaults(func=cmd_analytic)
    s = sub.add_parser("fit", parents=[common], help="fit rho to a roc.csv file")
    s.add_argument("roc_file")
    s.add_argument("--nominal-n", type=_positive, required=True)
    s.set_defaults(func=cmd_fit)
    s = sub.add_parser("gain", parents=[common], help="integration gain between two configs")
    s.add_argument("config_a")
    s.add_argument("config_b")
    s.add_argument("--mode", choices=("analytic", "simulate"), default="analytic")
    s.add_argument("--pfa-grid", type=_grid)
    s.set_defaults(func=cmd_gain)
    s = sub.add_parser("reproduce", parents=[common], help="run a canned figure reproduction")
    s.add_argument("figure_id")
    s.add_argument("--windows", type=_positive, help="override the recipe's window count")
    s.set_defaults(func=cmd_reproduce)
    s = sub.add_parser("selftest", parents=[common], help="quick internal consistency checks")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, RocSchemaError, NonPsdCovarianceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # parameter validation (e.g. rho >= 1 for an analytic model)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, NonconvergenceError, GainNonconvergence,
            kernels.SeriesNonconvergence, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
