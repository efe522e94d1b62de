"""Outage-curve sweeps, CSV curve files and dB-gain reports.

A sweep varies one scenario quantity (``inr_db``, ``snr_db`` or the relay
position ``d1`` with ``d2 = 2 - d1``) and records one Monte Carlo outage
estimate per sweep point and scheme. All points share one :class:`RngSpec`,
so neighbouring points and competing schemes are evaluated on the same
underlying fading draws.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .model import SystemParams
from .montecarlo import MIN_TRIALS, RngSpec, Scheme, outage_mc_schemes

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CurveRow",
    "CurveSet",
    "GainRow",
    "PRESETS",
    "parse_config",
    "load_config",
    "run_experiment",
    "crossing",
    "emit_report",
    "format_report",
]

SWEEP_KEYS = {"inr_sweep": "inr_db", "snr_sweep": "snr_db", "position_sweep": "d1"}
DEFAULT_SCHEMES = ("full_csi", "partial_csi", "fixed_0.3", "fixed_0.5", "fixed_0.7")
DEFAULT_FIXED = {
    "snr_db": 35.0,
    "inr_db": 30.0,
    "rate": 3.0,
    "eta": 0.4,
    "path_loss_exp": 3.0,
    "mean_h2": 1.0,
    "mean_g2": 1.0,
    "d1": 1.0,
    "d2": 1.0,
}
CSV_COLUMNS = ("sweep_value", "scheme", "p_out", "half_width_95", "trials")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid, rounded to avoid float drift in the labels."""
    if step <= 0 or stop < start:
        raise ConfigError("grid needs step > 0 and stop >= start")
    n = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


PRESETS = {
    "inr": dict(sweep="inr_sweep", sweep_points=grid(0, 50, 2.5), snr_db=35.0),
    "snr": dict(sweep="snr_sweep", sweep_points=grid(20, 55, 2.5), inr_db=40.0),
    "position": dict(sweep="position_sweep", sweep_points=grid(0.1, 1.9, 0.1), snr_db=45.0, inr_db=35.0),
}


@dataclass(frozen=True)
class ExperimentConfig:
    sweep: str
    sweep_points: tuple[float, ...]
    fixed_values: dict = field(default_factory=dict)
    schemes: tuple[str, ...] = DEFAULT_SCHEMES
    trials: int = 1_000_000
    rng: RngSpec = RngSpec()
    output_path: Path | None = None
    workers: int = 1

    def __post_init__(self):
        if self.sweep not in SWEEP_KEYS:
            raise ConfigError(f"sweep must be one of {sorted(SWEEP_KEYS)}, got {self.sweep!r}")
        if not self.sweep_points:
            raise ConfigError("sweep_points must be non-empty")
        if self.trials < MIN_TRIALS:
            raise ConfigError(f"trials must be >= {MIN_TRIALS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        unknown = set(self.fixed_values) - set(DEFAULT_FIXED)
        if unknown:
            raise ConfigError(f"unknown parameters: {', '.join(sorted(unknown))}")
        for s in self.schemes:
            try:
                Scheme.parse(s)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.sweep == "position_sweep":
            bad = [d for d in self.sweep_points if not 0 < d < 2]
            if bad:
                raise ConfigError(f"position_sweep requires d1 + d2 = 2 with 0 < d1 < 2; got d1 = {bad[0]}")
        for p in self.sweep_points:
            try:
                self.params_at(p)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    @property
    def fixed(self) -> dict:
        return {**DEFAULT_FIXED, **self.fixed_values}

    def params_at(self, value: float) -> SystemParams:
        v = self.fixed
        v[SWEEP_KEYS[self.sweep]] = value
        if self.sweep == "position_sweep":
            v["d2"] = 2.0 - value
        return SystemParams.from_db(
            v["snr_db"],
            v["inr_db"],
            d1=v["d1"],
            d2=v["d2"],
            path_loss_exp=v["path_loss_exp"],
            eh_efficiency=v["eta"],
            rate=v["rate"],
            mean_h2=v["mean_h2"],
            mean_g2=v["mean_g2"],
        )

    def metadata(self) -> dict:
        meta = {
            "package": f"artifact {_version()}",
            "sweep": self.sweep,
            "sweep_points": ",".join(f"{p:g}" for p in self.sweep_points),
            "schemes": ",".join(self.schemes),
            "trials": self.trials,
            "seed": self.rng.seed,
            "stream_id": self.rng.stream_id,
            "normalization": "source_power=1, noise_power=1/snr, mean_f2=inr*noise_power",
        }
        meta.update({k: v for k, v in sorted(self.fixed.items()) if k != SWEEP_KEYS[self.sweep]})
        return meta


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# ---------------------------------------------------------------------------
# config files


def _parse_points(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3:
            raise ConfigError("range form is start:stop:step")
        return grid(*parts)
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from ``key = value`` lines; ``#`` starts a comment.

    A ``preset`` key pulls in the sweep and fixed values of a named
    setup, which later keys and ``overrides`` may change.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        raw[k] = v
    raw.update(overrides or {})
    return _from_mapping(raw)


def _from_mapping(raw: dict[str, str]) -> ExperimentConfig:
    raw = dict(raw)
    kw: dict = {}
    fixed: dict = {}
    preset = raw.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        base = dict(PRESETS[preset])
        kw["sweep"] = base.pop("sweep")
        kw["sweep_points"] = base.pop("sweep_points")
        fixed.update(base)
    try:
        for k, v in raw.items():
            if k == "sweep":
                kw["sweep"] = v
            elif k == "sweep_points":
                kw["sweep_points"] = _parse_points(v)
            elif k == "schemes":
                kw["schemes"] = tuple(s.strip() for s in v.split(",") if s.strip())
            elif k == "trials":
                kw["trials"] = int(float(v))
            elif k == "workers":
                kw["workers"] = int(v)
            elif k in ("seed", "stream_id"):
                kw[k] = int(v)
            elif k == "output":
                kw["output_path"] = Path(v)
            else:
                fixed[k] = float(v)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {k!r}: {exc}") from None
    if "sweep" not in kw or "sweep_points" not in kw:
        raise ConfigError("config needs sweep and sweep_points (or a preset)")
    rng = RngSpec(kw.pop("seed", 0), kw.pop("stream_id", 0))
    return ExperimentConfig(fixed_values=fixed, rng=rng, **kw)


def load_config(source: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config file, or use a bare preset name (``inr``, ``snr``, ``position``)."""
    path = Path(source)
    if path.is_file():
        return parse_config(path.read_text(), overrides)
    if str(source) in PRESETS:
        return _from_mapping({"preset": str(source), **(overrides or {})})
    raise ConfigError(f"config file not found: {source}")


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveRow:
    sweep_value: float
    scheme: str
    p_out: float
    half_width_95: float
    trials: int


@dataclass
class CurveSet:
    rows: list[CurveRow]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.scheme, r.sweep_value))

    @property
    def schemes(self) -> list[str]:
        return sorted({r.scheme for r in self.rows})

    def curve(self, scheme: str) -> tuple[np.ndarray, np.ndarray]:
        rows = [r for r in self.rows if r.scheme == scheme]
        if not rows:
            raise KeyError(scheme)
        return np.array([r.sweep_value for r in rows]), np.array([r.p_out for r in rows])

    def value(self, scheme: str, x: float) -> CurveRow:
        for r in self.rows:
            if r.scheme == scheme and math.isclose(r.sweep_value, x, abs_tol=1e-9):
                return r
        raise KeyError((scheme, x))

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([f"{r.sweep_value:g}", r.scheme, f"{r.p_out:.8g}", f"{r.half_width_95:.6g}", r.trials])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "CurveSet":
        text = Path(source).read_text()
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = v.strip()
            elif line.strip():
                body.append(line)
        reader = csv.DictReader(body)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {reader.fieldnames}; expected {CSV_COLUMNS}")
        rows = [
            CurveRow(float(r["sweep_value"]), r["scheme"], float(r["p_out"]), float(r["half_width_95"]), int(r["trials"]))
            for r in reader
        ]
        return cls(rows, meta)


def run_experiment(cfg: ExperimentConfig, progress=None) -> CurveSet:
    """One outage estimate per (sweep point, scheme); writes the CSV when ``output_path`` is set."""
    rows = []
    for x in cfg.sweep_points:
        est = outage_mc_schemes(cfg.params_at(x), cfg.schemes, cfg.trials, cfg.rng, workers=cfg.workers)
        for name, e in est.items():
            if not math.isfinite(e.p_out):
                raise FloatingPointError(f"non-finite outage estimate at {cfg.sweep}={x} for {name}")
            rows.append(CurveRow(x, name, e.p_out, e.half_width_95, e.trials))
        log.info("%s=%g done", SWEEP_KEYS[cfg.sweep], x)
        if progress is not None:
            progress(x, est)
    curves = CurveSet(rows, cfg.metadata())
    if cfg.output_path is not None:
        curves.to_csv(cfg.output_path)
    return curves


# ---------------------------------------------------------------------------
# gain report


@dataclass(frozen=True)
class GainRow:
    level: float
    scheme: str
    reference: str
    gain_db: float | None
    x_scheme: float | None
    x_reference: float | None


def crossing(x, p, level: float, floor: float = 1e-12) -> float | None:
    """First abscissa where the curve crosses ``level``, interpolating ``log10 p`` linearly.

    Zero estimates are floored so a curve that drops to 0 can still be
    interpolated. Returns ``None`` when the level is never crossed.
    """
    x = np.asarray(x, dtype=float)
    lp = np.log10(np.maximum(np.asarray(p, dtype=float), floor))
    target = math.log10(level)
    for i in range(len(x) - 1):
        a, b = lp[i] - target, lp[i + 1] - target
        if a == 0:
            return float(x[i])
        if a * b < 0:
            return float(x[i] + (x[i + 1] - x[i]) * a / (a - b))
    if len(x) and lp[-1] == target:
        return float(x[-1])
    return None


def emit_report(curves: CurveSet, levels=(1e-1, 1e-2), reference: str = "full_csi") -> list[GainRow]:
    """Horizontal gain of ``reference`` over every other scheme at each outage level.

    The sign convention makes the gain positive when ``reference`` reaches the
    level under harsher conditions: larger abscissa for curves that worsen
    along the sweep (INR), smaller abscissa for curves that improve (SNR).
    """
    xr, pr = curves.curve(reference)
    trend = np.sign(np.log10(max(pr[-1], 1e-12)) - np.log10(max(pr[0], 1e-12))) or 1.0
    out = []
    for level in levels:
        x_ref = crossing(xr, pr, level)
        for s in curves.schemes:
            if s == reference:
                continue
            x_s = crossing(*curves.curve(s), level)
            gain = None if x_ref is None or x_s is None else float(trend * (x_ref - x_s))
            out.append(GainRow(level, s, reference, gain, x_s, x_ref))
    return out


def format_report(rows: list[GainRow]) -> str:
    lines = [f"{'level':>8}  {'scheme':<12} {'vs':<10} {'gain_dB':>8}"]
    for r in rows:
        g = "not-crossed" if r.gain_db is None else f"{r.gain_db:8.2f}"
        lines.append(f"{r.level:>8.0e}  {r.scheme:<12} {r.reference:<10} {g:>8}")
    return "\n".join(lines)
