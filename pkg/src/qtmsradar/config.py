"""Run configuration files.

A config is an INI file with these sections (all optional except the model
block that ``[run] model`` names)::

    [run]
    model = tmsv            ; tmsv | tmn
    window_len = 1000
    num_windows = 1000
    detector = 1
    seed = 0
    drift_stddev = 0
    method = samples        ; samples | moments
    align_block = 100000    ; samples per phase-fit block, "off" to disable
    output_dir = out

    [tmsv]
    squeeze_r = 0.5
    phase = 0
    extra_noise1_sq = 0
    extra_noise2_sq = 0

    [tmn]
    sigma_sq = 1
    noise1_sq = 1
    noise2_sq = 1
    gain1 = 1
    gain2 = 1
    phase = 0

    [analytic]
    n_samples =             ; defaults to window_len
    rho =                   ; defaults to the model's correlation
    pfa_grid =              ; defaults to 30 log-spaced levels in [1e-4, 0.5]

    [roc]
    pfa_grid = 0.001, 0.01, 0.1
    bins = 50

    [metadata]
    center_freq1_hz = 7.5376e9
    ...

Metadata is carried through to the run manifest and otherwise ignored.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .detectors import DETECTOR_IDS
from .signal_model import (
    Covariance4,
    InvalidParamsError,
    TmnParams,
    TmsvParams,
    tmn_covariance,
    tmsv_covariance,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "DEFAULT_METADATA",
    "DEFAULT_PFA_GRID",
    "DEFAULT_ANALYTIC_GRID",
    "DEFAULT_ALIGN_BLOCK",
    "parse_config",
    "load_config",
]

DEFAULT_PFA_GRID = (1e-3, 1e-2, 1e-1)
# desk-scale phase blocks: a tenth of a second at 1 MHz
DEFAULT_ALIGN_BLOCK = 100_000
DEFAULT_ANALYTIC_GRID = tuple(float(p) for p in np.geomspace(1e-4, 0.5, 30))

DEFAULT_METADATA = {
    "center_freq1_hz": "7.5376e9",
    "center_freq2_hz": "6.1445e9",
    "bandwidth_hz": "1e6",
    "sampling_rate_hz": "1e6",
    # Volts^2 per vacuum unit has no meaningful default for this apparatus.
    "volts_sq_per_vacuum_unit": "",
}

_SECTIONS = {"run", "tmsv", "tmn", "analytic", "roc", "metadata"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str = "tmsv"
    tmsv: TmsvParams | None = None
    tmn: TmnParams | None = None
    window_len: int = 1000
    num_windows: int = 1000
    detector_id: int = 1
    seed: int = 0
    drift_stddev: float = 0.0
    method: str = "samples"
    align_block: int | None = DEFAULT_ALIGN_BLOCK
    output_dir: str = "out"
    analytic_n: int | None = None
    analytic_rho: float | None = None
    analytic_grid: tuple[float, ...] = DEFAULT_ANALYTIC_GRID
    pfa_grid: tuple[float, ...] = DEFAULT_PFA_GRID
    bins: int = 50
    metadata: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_METADATA))

    def covariance(self) -> Covariance4:
        if self.model == "tmsv":
            return tmsv_covariance(self.tmsv)
        return tmn_covariance(self.tmn)

    @property
    def rho(self) -> float:
        if self.analytic_rho is not None:
            return self.analytic_rho
        return self.covariance().rho

    @property
    def n_samples(self) -> int:
        return self.analytic_n if self.analytic_n is not None else self.window_len

    def echo(self) -> dict:
        """Plain-data view for the run manifest."""
        d = asdict(self)
        d["pfa_grid"] = list(self.pfa_grid)
        d["analytic_grid"] = list(self.analytic_grid)
        return d


def _get(sec, key, conv, default, where):
    if sec is None or key not in sec or sec[key].strip() == "":
        return default
    raw = sec[key].strip()
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {key} = {raw!r}") from None


def _int(raw: str) -> int:
    v = float(raw)
    if not v.is_integer():
        raise ValueError(raw)
    return int(v)


def _block(raw: str) -> int | None:
    if raw.lower() in ("off", "none"):
        return None
    return _int(raw)


def _finite(raw: str) -> float:
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError(raw)
    return v


def _grid(raw: str) -> tuple[float, ...]:
    vals = tuple(float(p) for p in raw.replace(",", " ").split())
    if not vals or any(not 0 < p < 1 for p in vals):
        raise ValueError(raw)
    return vals


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(cp.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")
    sec = {name: (cp[name] if cp.has_section(name) else None) for name in _SECTIONS}
    run = sec["run"]
    cfg = RunConfig()
    w = f"{source} [run]"
    cfg.model = _get(run, "model", str, "tmsv", w).lower()
    if cfg.model not in ("tmsv", "tmn"):
        raise ConfigError(f"{w}: model must be tmsv or tmn, got {cfg.model!r}")
    cfg.window_len = _get(run, "window_len", _int, cfg.window_len, w)
    cfg.num_windows = _get(run, "num_windows", _int, cfg.num_windows, w)
    cfg.detector_id = _get(run, "detector", _int, cfg.detector_id, w)
    cfg.seed = _get(run, "seed", _int, cfg.seed, w)
    cfg.drift_stddev = _get(run, "drift_stddev", _finite, cfg.drift_stddev, w)
    cfg.method = _get(run, "method", str, cfg.method, w).lower()
    cfg.align_block = _get(run, "align_block", _block, DEFAULT_ALIGN_BLOCK, w)
    cfg.output_dir = _get(run, "output_dir", str, cfg.output_dir, w)
    if cfg.window_len < 2 or cfg.num_windows < 1:
        raise ConfigError(f"{w}: need window_len >= 2 and num_windows >= 1")
    if cfg.detector_id not in DETECTOR_IDS:
        raise ConfigError(f"{w}: detector must be one of {DETECTOR_IDS}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"{w}: seed must fit in 64 unsigned bits")
    if cfg.drift_stddev < 0:
        raise ConfigError(f"{w}: drift_stddev must be non-negative")
    if cfg.method not in ("samples", "moments"):
        raise ConfigError(f"{w}: method must be samples or moments")
    if cfg.method == "moments" and cfg.detector_id == 5:
        raise ConfigError(f"{w}: detector 5 needs method = samples")
    if cfg.align_block is not None and cfg.align_block < 1:
        raise ConfigError(f"{w}: align_block must be positive")

    try:
        if cfg.model == "tmsv" or sec["tmsv"] is not None:
            s, w = sec["tmsv"], f"{source} [tmsv]"
            if cfg.model == "tmsv" and s is None:
                raise ConfigError(f"{source}: model = tmsv needs a [tmsv] section")
            cfg.tmsv = TmsvParams(
                squeeze_r=_get(s, "squeeze_r", _finite, 0.0, w),
                phase=_get(s, "phase", _finite, 0.0, w),
                extra_noise1_sq=_get(s, "extra_noise1_sq", _finite, 0.0, w),
                extra_noise2_sq=_get(s, "extra_noise2_sq", _finite, 0.0, w),
            )
        if cfg.model == "tmn" or sec["tmn"] is not None:
            s, w = sec["tmn"], f"{source} [tmn]"
            if cfg.model == "tmn" and s is None:
                raise ConfigError(f"{source}: model = tmn needs a [tmn] section")
            cfg.tmn = TmnParams(
                sigma_sq=_get(s, "sigma_sq", _finite, 1.0, w),
                noise1_sq=_get(s, "noise1_sq", _finite, 0.0, w),
                noise2_sq=_get(s, "noise2_sq", _finite, 0.0, w),
                gain1=_get(s, "gain1", _finite, 1.0, w),
                gain2=_get(s, "gain2", _finite, 1.0, w),
                phase=_get(s, "phase", _finite, 0.0, w),
            )
    except InvalidParamsError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    a, w = sec["analytic"], f"{source} [analytic]"
    cfg.analytic_n = _get(a, "n_samples", _int, None, w)
    cfg.analytic_rho = _get(a, "rho", _finite, None, w)
    cfg.analytic_grid = _get(a, "pfa_grid", _grid, DEFAULT_ANALYTIC_GRID, w)
    if cfg.analytic_n is not None and cfg.analytic_n < 1:
        raise ConfigError(f"{w}: n_samples must be positive")
    if cfg.analytic_rho is not None and not 0 <= cfg.analytic_rho < 1:
        raise ConfigError(f"{w}: rho must lie in [0, 1)")

    r, w = sec["roc"], f"{source} [roc]"
    cfg.pfa_grid = _get(r, "pfa_grid", _grid, DEFAULT_PFA_GRID, w)
    cfg.bins = _get(r, "bins", _int, cfg.bins, w)
    if cfg.bins < 1:
        raise ConfigError(f"{w}: bins must be positive")

    if sec["metadata"] is not None:
        cfg.metadata.update({k: v for k, v in sec["metadata"].items()})
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, source=str(p))
