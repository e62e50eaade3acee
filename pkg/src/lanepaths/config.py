"""Flat key/value tool configuration (a TOML subset without tables)."""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .aggregate import DEFAULT_D_MAX, DEFAULT_P_MIN, AggregationConfig
from .curves import DEFAULT_BEZIER_DEGREE, DEFAULT_POLYLINE_POINTS
from .decompose import DEFAULT_MAX_PATHS
from .matching import MatchWeights
from .metrics import MetricConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ToolConfig:
    # alpha/beta are not reported for the original model; 1.0 is a placeholder
    alpha: float = 1.0
    beta: float = 1.0
    p_min: float = DEFAULT_P_MIN
    d_max: float = DEFAULT_D_MAX
    bezier_degree: int = DEFAULT_BEZIER_DEGREE
    polyline_points: int = DEFAULT_POLYLINE_POINTS
    max_paths: int = DEFAULT_MAX_PATHS
    interp_dist: float = 5.0
    match_dist: float = 8.0
    topo_radius: float = 50.0
    sda_thresholds: tuple[float, ...] = (20.0, 50.0)
    lane_halfwidth: float = 5.0
    raster_extent: tuple[int, int] | None = None
    rng_seed: int = 0

    def __post_init__(self):
        # constructing the owning configs runs their domain checks
        self.weights()
        self.aggregation()
        self.metrics()
        if self.bezier_degree < 1:
            raise ValueError("bezier_degree must be >= 1")
        if self.polyline_points < 2:
            raise ValueError("polyline_points must be >= 2")
        if self.max_paths < 1:
            raise ValueError("max_paths must be >= 1")

    def weights(self) -> MatchWeights:
        return MatchWeights(self.alpha, self.beta)

    def aggregation(self, n_cp_out: int | None = None) -> AggregationConfig:
        return AggregationConfig(self.p_min, self.d_max, n_cp_out)

    def metrics(self) -> MetricConfig:
        return MetricConfig(
            interp_dist=self.interp_dist,
            match_dist=self.match_dist,
            topo_radius=self.topo_radius,
            sda_thresholds=tuple(self.sda_thresholds),
            lane_halfwidth=self.lane_halfwidth,
            raster_extent=self.raster_extent,
        )

    def replace(self, **overrides) -> "ToolConfig":
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _coerce(name: str, value, default):
    if name in ("sda_thresholds", "raster_extent"):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{name}: expected a list of numbers")
        if name == "raster_extent":
            if len(value) != 2:
                raise ConfigError("raster_extent: expected [width, height]")
            return (int(value[0]), int(value[1]))
        return tuple(float(v) for v in value)
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(f"{name}: booleans are not accepted")
    if isinstance(default, int):
        if not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    return float(value)


def parse_config(text: str, base: ToolConfig = ToolConfig()) -> ToolConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    known = {f.name: getattr(base, f.name) for f in fields(ToolConfig)}
    values = {}
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"{key}: nested tables are not supported")
        if key not in known:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _coerce(key, value, known[key])
    try:
        return dataclasses.replace(base, **values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, base: ToolConfig = ToolConfig()) -> ToolConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        return parse_config(text, base)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
