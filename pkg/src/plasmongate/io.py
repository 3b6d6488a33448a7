"""Run configuration, CSV emission and run manifests.

Every CSV starts with a ``#``-prefixed schema line followed by a header
row. Floats are written with 17 significant digits using Python's
locale-independent formatting, so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from . import __version__, units
from .conductivity import Material, Sigma3Model
from .errors import ConfigError
from .gate import GateSettings, SweepGrid

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MaterialConfig:
    fermi_energy: float = 0.1
    drude_rate: float = 0.0
    eps_eff: float = 1.0
    fermi_velocity: float = units.V_FERMI


@dataclass(frozen=True)
class GridConfig:
    n_points: int = 200


@dataclass(frozen=True)
class GeometryConfig:
    width: float = 20.0
    length: float | None = None  # None: optimise


@dataclass(frozen=True)
class ModeConfig:
    n: int = 2
    kW: float = 1.0
    n_max: int = 3


@dataclass(frozen=True)
class PulseConfig:
    delta_k: float = 0.9
    delta_l: float = 0.0


@dataclass(frozen=True)
class QualityConfig:
    Q: float = 1000.0
    Q_list: tuple = (10.0, 20.0, 50.0, 100.0, 150.0, 300.0, 1000.0, 3000.0, 10000.0, 100000.0)


@dataclass(frozen=True)
class Sigma3Config:
    model: str = "analytic"
    value: float = 0.0
    path: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    W_min: float = 10.0
    W_max: float = 40.0
    W_step: float = 1.0
    E_F_min: float = 0.05
    E_F_max: float = 0.2
    E_F_step: float = 0.005


@dataclass(frozen=True)
class DispersionConfig:
    kW_min: float = 0.05
    kW_max: float = 2.5
    n_points: int = 40


@dataclass(frozen=True)
class ScatterConfig:
    gamma2: float | None = None  # overrides the computed value
    ratio: float | None = None  # sets gamma2 so that lambda_p/lambda_a = ratio
    oracle: bool = False
    oracle_sigma: float = 8.0  # pulse width in units of lambda_p


@dataclass(frozen=True)
class OptimizeConfig:
    modes: tuple = (2, 3)
    refine_iterations: int = 40


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"


@dataclass(frozen=True)
class RunConfig:
    material: MaterialConfig = field(default_factory=MaterialConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    mode: ModeConfig = field(default_factory=ModeConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    quality: QualityConfig = field(default_factory=QualityConfig)
    sigma3: Sigma3Config = field(default_factory=Sigma3Config)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)
    scatter: ScatterConfig = field(default_factory=ScatterConfig)
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: str | None = None

    # -- derived objects ---------------------------------------------------

    def material_model(self) -> Material:
        m = self.material
        return Material(m.fermi_energy, m.drude_rate, m.fermi_velocity, m.eps_eff)

    def sigma3_model(self) -> Sigma3Model:
        s = self.sigma3
        if s.model == "constant":
            return Sigma3Model.constant(s.value)
        if s.model == "tabulated":
            return Sigma3Model.from_csv(s.path)
        return Sigma3Model.analytic()

    def gate_settings(self, n: int | None = None, Q: float | None = None) -> GateSettings:
        return GateSettings(
            n=self.mode.n if n is None else n,
            kW=self.mode.kW,
            delta_k=self.pulse.delta_k,
            Q=self.quality.Q if Q is None else Q,
            delta_l=self.pulse.delta_l,
            n_points=self.grid.n_points,
            eps_eff=self.material.eps_eff,
            fermi_velocity=self.material.fermi_velocity,
            sigma3=self.sigma3_model(),
        )

    def sweep_grid(self) -> SweepGrid:
        return SweepGrid(**asdict(self.sweep))


_SECTIONS = {f.name: f.type for f in fields(RunConfig) if f.name != "source"}
_SECTION_TYPES = {
    "material": MaterialConfig,
    "grid": GridConfig,
    "geometry": GeometryConfig,
    "mode": ModeConfig,
    "pulse": PulseConfig,
    "quality": QualityConfig,
    "sigma3": Sigma3Config,
    "sweep": SweepConfig,
    "dispersion": DispersionConfig,
    "scatter": ScatterConfig,
    "optimize": OptimizeConfig,
    "output": OutputConfig,
}

# fields that must be strictly positive when set
_POSITIVE = {
    "material.fermi_energy",
    "material.fermi_velocity",
    "grid.n_points",
    "geometry.width",
    "geometry.length",
    "mode.n",
    "mode.kW",
    "mode.n_max",
    "pulse.delta_k",
    "quality.Q",
    "sweep.W_min",
    "sweep.W_max",
    "sweep.W_step",
    "sweep.E_F_min",
    "sweep.E_F_max",
    "sweep.E_F_step",
    "dispersion.kW_min",
    "dispersion.kW_max",
    "dispersion.n_points",
    "scatter.ratio",
    "scatter.oracle_sigma",
    "optimize.refine_iterations",
}


def _line_map(text: str) -> dict:
    """Map 'section.key' to 1-based source line numbers."""
    out = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out
    if not isinstance(root, yaml.MappingNode):
        return out
    for k_node, v_node in root.value:
        out[k_node.value] = k_node.start_mark.line + 1
        if isinstance(v_node, yaml.MappingNode):
            for kk, _ in v_node.value:
                out[f"{k_node.value}.{kk.value}"] = kk.start_mark.line + 1
    return out


def _coerce(path: str, raw, default, annotation: str):
    if raw is None:
        if "None" in annotation:
            return None
        raise ConfigError(f"{path}: value required")
    if isinstance(default, bool) or annotation == "bool":
        if not isinstance(raw, bool):
            raise ConfigError(f"{path}: expected true/false, got {raw!r}")
        return raw
    if isinstance(default, tuple) or annotation == "tuple":
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError(f"{path}: expected a non-empty list")
        return tuple(_coerce(f"{path}[{i}]", v, 0.0, "float") for i, v in enumerate(raw))
    if annotation == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{path}: expected an integer, got {raw!r}")
        return raw
    if annotation.startswith("str"):
        if not isinstance(raw, str):
            raise ConfigError(f"{path}: expected a string, got {raw!r}")
        return raw
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {raw!r}")
    val = float(raw)
    if not math.isfinite(val):
        raise ConfigError(f"{path}: must be finite")
    return val


def config_from_dict(data: dict | None, lines: dict | None = None, source: str | None = None) -> RunConfig:
    """Validate a nested mapping into a ``RunConfig``.

    Unknown keys, wrong types and non-positive physical values raise
    ``ConfigError`` naming the offending field (and line when known).
    """
    data = data or {}
    lines = lines or {}

    def where(path):
        return f" (line {lines[path]})" if path in lines else ""

    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    sections = {}
    for name, value in data.items():
        if name not in _SECTION_TYPES:
            raise ConfigError(f"unknown section {name!r}{where(name)}")
        if not isinstance(value, dict):
            raise ConfigError(f"section {name!r} must be a mapping{where(name)}")
        cls = _SECTION_TYPES[name]
        defaults = cls()
        kwargs = {}
        known = {f.name: f for f in fields(cls)}
        for key, raw in value.items():
            path = f"{name}.{key}"
            if key not in known:
                raise ConfigError(f"unknown field {path!r}{where(path)}")
            try:
                val = _coerce(path, raw, getattr(defaults, key), str(known[key].type))
            except ConfigError as exc:
                raise ConfigError(f"{exc}{where(path)}") from None
            if path in _POSITIVE and val is not None:
                vals = val if isinstance(val, tuple) else (val,)
                if any(not v > 0 for v in vals):
                    raise ConfigError(f"{path}: must be > 0, got {raw!r}{where(path)}")
            kwargs[key] = val
        sections[name] = cls(**kwargs)
    cfg = RunConfig(**sections, source=source)
    _validate(cfg, where)
    return cfg


def _validate(cfg: RunConfig, where):
    if cfg.material.drude_rate < 0 or cfg.material.drude_rate >= cfg.material.fermi_energy:
        raise ConfigError(f"material.drude_rate: need 0 <= value < fermi_energy{where('material.drude_rate')}")
    if cfg.material.eps_eff < 1:
        raise ConfigError(f"material.eps_eff: must be >= 1{where('material.eps_eff')}")
    if cfg.grid.n_points < 50:
        raise ConfigError(f"grid.n_points: must be >= 50{where('grid.n_points')}")
    if not 1 <= cfg.mode.n_max <= 5:
        raise ConfigError(f"mode.n_max: must lie in 1..5{where('mode.n_max')}")
    if cfg.mode.n > 5:
        raise ConfigError(f"mode.n: must lie in 1..5{where('mode.n')}")
    if cfg.sigma3.model not in ("analytic", "constant", "tabulated"):
        raise ConfigError(f"sigma3.model: unknown model {cfg.sigma3.model!r}{where('sigma3.model')}")
    if cfg.sigma3.model == "tabulated":
        if not cfg.sigma3.path or not Path(cfg.sigma3.path).is_file():
            raise ConfigError(f"sigma3.path: file not found: {cfg.sigma3.path!r}{where('sigma3.path')}")
    if cfg.sweep.W_min > cfg.sweep.W_max or cfg.sweep.E_F_min > cfg.sweep.E_F_max:
        raise ConfigError("sweep: ranges must be non-empty")
    if cfg.dispersion.kW_min >= cfg.dispersion.kW_max:
        raise ConfigError("dispersion: kW_min must be < kW_max")
    if cfg.dispersion.n_points < 8:
        raise ConfigError("dispersion.n_points: must be >= 8")
    if any(int(n) != n or not 1 <= n <= 5 for n in cfg.optimize.modes):
        raise ConfigError("optimize.modes: mode indices must be integers in 1..5")
    if cfg.scatter.gamma2 is not None and cfg.scatter.gamma2 < 0:
        raise ConfigError("scatter.gamma2: must be >= 0")
    qs = cfg.quality.Q_list
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise ConfigError("quality.Q_list: must be strictly increasing")


def load_config(path=None, overrides=()) -> RunConfig:
    """Load YAML from ``path`` (or defaults) and apply ``section.key=value`` overrides."""
    data, lines, source = {}, {}, None
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        text = p.read_text(encoding="utf-8")
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{p}: YAML parse error: {exc}") from None
        lines = _line_map(text)
        source = str(p)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        key, raw = item.split("=", 1)
        section, name = key.split(".", 1)
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a mapping")
        data.setdefault(section, {})
        if not isinstance(data[section], dict):
            raise ConfigError(f"section {section!r} must be a mapping")
        data[section][name] = yaml.safe_load(raw)
    return config_from_dict(data, lines, source)


# -- output -----------------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def write_csv(path, schema: str, columns, rows) -> Path:
    """Write rows under a ``# schema: <name>/v<N>`` line and a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: plasmongate.{schema}/v{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path):
    """Return (schema, header, rows as lists of strings)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return first.lstrip("# ").removeprefix("schema: "), header, rows


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


@dataclass
class RunManifest:
    command: str
    config: dict
    sigma3_provenance: str
    outputs: list
    counters: dict
    input_digests: dict = field(default_factory=dict)
    conventions: dict = field(default_factory=dict)
    units: dict = field(default_factory=units.as_dict)
    version: str = __version__
    python: str = field(default_factory=platform.python_version)

    def write(self, directory) -> Path:
        path = Path(directory) / "manifest.json"
        if path.exists():
            raise FileExistsError(f"{path} already exists; one manifest per run")
        path.write_text(json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def input_digests(cfg: RunConfig) -> dict:
    out = {}
    if cfg.source:
        out[cfg.source] = file_digest(cfg.source)
    if cfg.sigma3.model == "tabulated" and cfg.sigma3.path:
        out[cfg.sigma3.path] = file_digest(cfg.sigma3.path)
    return out
