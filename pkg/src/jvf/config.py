"""Experiment configuration: YAML schema, defaults, and validation.

A config is a single YAML document with nested sections.  The defaults
encode the bundled three-fold symmetric experiment; every command block
can be overridden from the command line.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import yaml

from . import fraction
from .errors import ValidationError
from .fraction import JvfParams
from .geometry import SignatureSpace


@dataclass
class GridSpec:
    x1: list = field(default_factory=lambda: [-1.2, 1.2])
    x2: list = field(default_factory=lambda: [-1.2, 1.2])
    nx1: int = 241
    nx2: int = 241


@dataclass
class EvalBlock:
    point: list = field(default_factory=lambda: [-0.26, 0.69, 0.001])
    rel_tol: float = 1e-10
    max_levels: int = 200_000


@dataclass
class DecayBlock:
    point: list = field(default_factory=lambda: [-0.26, 0.69, 0.001])
    start: int = 3
    stop: int = 1200
    step: int = 1
    ref_level: int = 2000


@dataclass
class ScanBlock:
    levels: int = 3000
    zy: float = -0.001
    grid: GridSpec = field(default_factory=GridSpec)
    contour_y0: float = 0.0864
    contour_rate: float = 0.312544
    contour_count: int = 12


@dataclass
class BoundaryBlock:
    grid: GridSpec = field(default_factory=GridSpec)


@dataclass
class FixedBlock:
    point: list = field(default_factory=lambda: [-0.26, 0.69, 0.001])
    multi_starts: int = 64
    seed: int = 0


def _default_shifts():
    return [[float(x) for x in row] for row in fraction.threefold_params().shifts]


@dataclass
class ExperimentConfig:
    signs: list = field(default_factory=lambda: [1, 1, -1])
    y_index: int = 2
    shifts: list = field(default_factory=_default_shifts)
    scales: list = field(default_factory=lambda: [0.25, 0.25, 0.25])
    period: int | None = 3
    eval: EvalBlock = field(default_factory=EvalBlock)
    decay: DecayBlock = field(default_factory=DecayBlock)
    scan: ScanBlock = field(default_factory=ScanBlock)
    boundary: BoundaryBlock = field(default_factory=BoundaryBlock)
    fixed: FixedBlock = field(default_factory=FixedBlock)

    def space(self) -> SignatureSpace:
        return SignatureSpace(tuple(self.signs), self.y_index)

    def params(self) -> JvfParams:
        return JvfParams(self.shifts, self.scales, period=self.period)


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def _from_dict(cls, data):
    if data is None:
        return cls()
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.name == "grid" and isinstance(value, dict):
            value = _from_dict(GridSpec, value)
        kwargs[f.name] = value
    return cls(**kwargs)


_BLOCKS = {
    "eval": EvalBlock,
    "decay": DecayBlock,
    "scan": ScanBlock,
    "boundary": BoundaryBlock,
    "fixed": FixedBlock,
}


def parse_config(data: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key in ("signs", "y_index", "shifts", "scales", "period"):
        if key in data:
            setattr(cfg, key, data[key])
    for key, cls in _BLOCKS.items():
        if key in data and data[key] is not None:
            block = _from_dict(cls, data[key])
            setattr(cfg, key, block)
    return cfg


def emit_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(dataclasses.asdict(cfg), sort_keys=False)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return parse_config(data or {})


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_config(cfg))


def validate_config(cfg: ExperimentConfig) -> None:
    """Structural checks beyond the fraction hypotheses."""
    space = cfg.space()
    params = cfg.params()
    fraction.validate(space, params)
    for grid in (cfg.scan.grid, cfg.boundary.grid):
        if grid.nx1 < 2 or grid.nx2 < 2:
            raise ValidationError("grid resolution must be at least 2 per axis")
        if not (grid.x1[0] < grid.x1[1] and grid.x2[0] < grid.x2[1]):
            raise ValidationError("grid extents must be increasing intervals")
    if cfg.decay.ref_level <= cfg.decay.stop:
        raise ValidationError("the decay reference level must exceed the scanned range")
    if cfg.decay.start < 1 or cfg.decay.step < 1:
        raise ValidationError("decay range must start at 1 or later with step >= 1")
    if cfg.scan.levels < 1:
        raise ValidationError("scan levels must be positive")
    if not math.isfinite(cfg.scan.zy) or cfg.scan.zy == 0.0:
        raise ValidationError("scan zy must be finite and off the boundary plane")
    if len(cfg.eval.point) != space.dim or len(cfg.decay.point) != space.dim \
            or len(cfg.fixed.point) != space.dim:
        raise ValidationError("evaluation points must match the space dimension")
