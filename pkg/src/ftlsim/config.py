"""Run configuration: YAML in, validated blocks out.

Lengths, speeds and the detector constant may be given in SI units
(``units: si``); they are converted to natural units (c = 1, time in
seconds) here and nowhere else.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .channel import ProbabilityMatrix, check_probability
from .errors import ConfigurationError, ValidationError
from .geometry import ApparatusGeometry
from .optics_sim import PhysicsHypothesis
from .protocol import CycleSchedule

OUTPUT_ENV = "FTLSIM_OUT"
SPEED_OF_LIGHT_SI = 299_792_458.0

_GEOMETRY_LENGTHS = ("leg_s", "leg_i", "pump_arm_r")


@dataclass(frozen=True)
class ChannelBlock:
    channel: ProbabilityMatrix
    prior: float = 0.5
    signal_speed: float = 2.0
    epsilon: float = 1e-9
    max_steps: int = 100_000
    distance: float = 1.0

    def __post_init__(self):
        check_probability(self.prior, "prior")
        if not self.epsilon > 0:
            raise ValidationError("channel.epsilon must be positive")
        if self.max_steps < 0:
            raise ValidationError("channel.max_steps must be >= 0")


@dataclass(frozen=True)
class EstimateBlock:
    significance: float = 0.01
    n_boot: int = 1000
    rel_width: float = 0.02
    threshold: int = 1

    def __post_init__(self):
        if not 0 < self.significance < 0.5:
            raise ValidationError("estimate.significance must lie in (0, 0.5)")
        if self.n_boot < 2:
            raise ValidationError("estimate.n_boot must be >= 2")
        if not self.rel_width > 0:
            raise ValidationError("estimate.rel_width must be positive")
        if self.threshold < 1:
            raise ValidationError("estimate.threshold must be >= 1")


@dataclass(frozen=True)
class PlanBlock:
    i_fractions: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    r_factors: tuple[float, ...] = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class RunConfig:
    geometry: ApparatusGeometry | None = None
    hypothesis: PhysicsHypothesis | None = None
    schedule: CycleSchedule | None = None
    channel: ChannelBlock | None = None
    estimate: EstimateBlock = field(default_factory=EstimateBlock)
    plan: PlanBlock = field(default_factory=PlanBlock)
    master_seed: int = 0
    cycles: int = 10_000
    workers: int = 1
    output_dir: str = "ftlsim-out"

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValidationError("master_seed must be an unsigned 64-bit integer")
        if self.cycles < 0:
            raise ValidationError("cycles must be >= 0")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if self.geometry is not None and self.hypothesis is not None:
            self.hypothesis.check_against(self.geometry)
            if self.schedule is not None and self.geometry.raise_time_T > self.schedule.action_a:
                raise ConfigurationError("raise_time_T does not fit inside action_a")

    def require(self, *blocks: str) -> None:
        missing = [b for b in blocks if getattr(self, b) is None]
        if missing:
            raise ValidationError(f"config is missing block(s): {', '.join(missing)}")

    def output_path(self, override: str | None = None) -> Path:
        return Path(override or os.environ.get(OUTPUT_ENV) or self.output_dir)


def _block(cls, data, name):
    if not isinstance(data, dict):
        raise ValidationError(f"{name} must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown key(s) in {name}: {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ValidationError(f"{name}: {exc}") from None


def _to_natural(raw: dict, units: str) -> dict:
    if units == "natural":
        return raw
    if units != "si":
        raise ValidationError(f"units must be 'natural' or 'si', got {units!r}")
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    geo = raw.get("geometry")
    c = float(geo.get("light_speed_c", SPEED_OF_LIGHT_SI)) if geo else SPEED_OF_LIGHT_SI
    if geo is not None:
        for key in _GEOMETRY_LENGTHS:
            if key in geo:
                geo[key] = float(geo[key]) / c
        if "detector_k" in geo:
            geo["detector_k"] = float(geo["detector_k"]) * c * c
        geo["light_speed_c"] = 1.0
    hyp = raw.get("hypothesis")
    if hyp is not None and hyp.get("signal_speed") is not None:
        hyp["signal_speed"] = float(hyp["signal_speed"]) / c
    sch = raw.get("schedule")
    if sch is not None and "probe_speeds" in sch:
        sch["probe_speeds"] = [float(v) / c for v in sch["probe_speeds"]]
    ch = raw.get("channel")
    if ch is not None:
        if "signal_speed" in ch:
            ch["signal_speed"] = float(ch["signal_speed"]) / c
        if "distance" in ch:
            ch["distance"] = float(ch["distance"]) / c
    return raw


def _floats(d: dict, keys) -> dict:
    return {k: (float(v) if k in keys and v is not None else v) for k, v in d.items()}


def config_from_dict(data: dict[str, Any]) -> RunConfig:
    if not isinstance(data, dict):
        raise ValidationError("config root must be a mapping")
    data = dict(data)
    units = data.pop("units", "natural")
    data = _to_natural(data, units)
    kwargs: dict[str, Any] = {}
    if data.get("geometry") is not None:
        kwargs["geometry"] = _block(
            ApparatusGeometry,
            _floats(data["geometry"], {f.name for f in dataclasses.fields(ApparatusGeometry)}),
            "geometry",
        )
    if data.get("hypothesis") is not None:
        hyp = dict(data["hypothesis"])
        if "pair_rate" in hyp:
            if "bright_rate" in hyp:
                raise ValidationError("hypothesis: give bright_rate or pair_rate, not both")
            hyp["bright_rate"] = 0.5 * float(hyp.pop("pair_rate"))
        kwargs["hypothesis"] = _block(
            PhysicsHypothesis, _floats(hyp, {"dark_rate", "bright_rate", "signal_speed"}), "hypothesis"
        )
    if data.get("schedule") is not None:
        sch = dict(data["schedule"])
        sch = _floats(sch, {"action_a", "waiting", "waiting_edge"})
        for key in ("standby_schedule", "probe_speeds"):
            if key in sch:
                sch[key] = tuple(float(v) for v in sch[key])
        kwargs["schedule"] = _block(CycleSchedule, sch, "schedule")
    if data.get("channel") is not None:
        ch = dict(data["channel"])
        try:
            matrix = ProbabilityMatrix(float(ch.pop("p01")), float(ch.pop("p11")))
        except KeyError as exc:
            raise ValidationError(f"channel block needs {exc.args[0]}") from None
        ch = _floats(ch, {"prior", "signal_speed", "epsilon", "distance"})
        kwargs["channel"] = _block(ChannelBlock, {"channel": matrix, **ch}, "channel")
    if data.get("estimate") is not None:
        kwargs["estimate"] = _block(EstimateBlock, _floats(data["estimate"], {"significance", "rel_width"}), "estimate")
    if data.get("plan") is not None:
        plan = {k: tuple(float(x) for x in v) for k, v in data["plan"].items()}
        kwargs["plan"] = _block(PlanBlock, plan, "plan")
    for key in ("master_seed", "cycles", "workers"):
        if key in data:
            kwargs[key] = int(data[key])
    if "output_dir" in data:
        kwargs["output_dir"] = str(data["output_dir"])
    unknown = set(data) - {
        "geometry", "hypothesis", "schedule", "channel", "estimate", "plan",
        "master_seed", "cycles", "workers", "output_dir",
    }
    if unknown:
        raise ValidationError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    return RunConfig(**kwargs)


def config_to_dict(cfg: RunConfig, runtime: bool = True) -> dict[str, Any]:
    """Normalised (natural-unit) form; loading it again gives an equal config.

    With ``runtime=False`` settings that cannot affect results (the worker
    count) are left out, so run records do not depend on parallelism.
    """
    out: dict[str, Any] = {"units": "natural"}
    if cfg.geometry is not None:
        out["geometry"] = dataclasses.asdict(cfg.geometry)
    if cfg.hypothesis is not None:
        out["hypothesis"] = dataclasses.asdict(cfg.hypothesis)
    if cfg.schedule is not None:
        sch = dataclasses.asdict(cfg.schedule)
        sch["standby_schedule"] = list(sch["standby_schedule"])
        sch["probe_speeds"] = list(sch["probe_speeds"])
        out["schedule"] = sch
    if cfg.channel is not None:
        ch = dataclasses.asdict(cfg.channel)
        matrix = ch.pop("channel")
        out["channel"] = {"p01": matrix["p01"], "p11": matrix["p11"], **ch}
    out["estimate"] = dataclasses.asdict(cfg.estimate)
    out["plan"] = {k: list(v) for k, v in dataclasses.asdict(cfg.plan).items()}
    out["master_seed"] = cfg.master_seed
    out["cycles"] = cfg.cycles
    if runtime:
        out["workers"] = cfg.workers
    out["output_dir"] = cfg.output_dir
    return out


def loads(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"config is not valid YAML: {exc}") from None
    return config_from_dict(data or {})


def dumps(cfg: RunConfig, runtime: bool = True) -> str:
    return yaml.safe_dump(config_to_dict(cfg, runtime), sort_keys=False)


def load(path) -> RunConfig:
    return loads(Path(path).read_text())
