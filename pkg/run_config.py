"""
Run documents: one JSON object per run, validated before any computation.

Every section is optional; absent sections take the defaults below.
Unknown keys are rejected with the dotted path of the offending key.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import config
from constitutive import StiffnessOperator, load_material, material_from_dict
from errors import ConfigError
from forms import BodyGrid

# Configure logging
logger = logging.getLogger(__name__)

LEVELS = ("quick", "full")
FIELD_KINDS = ("displacement", "configuration", "impulse")
STRAIN_METHODS = ("connection", "moving_frames")


def _section(data: Any, allowed: Sequence[str], path: str) -> Dict[str, Any]:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown config key {path + '.' if path else ''}{unknown[0]}")
    return data


def _is_int(value: Any) -> bool:
    """JSON integers; true and false are not counts"""
    return isinstance(value, int) and not isinstance(value, bool)


def _int_list(value: Any, length: int, path: str) -> Tuple[int, ...]:
    if not isinstance(value, list) or len(value) != length or not all(_is_int(v) for v in value):
        raise ConfigError(f"{path}: expected a list of {length} integers")
    return tuple(value)


def _float_list(value: Any, length: int, path: str) -> Tuple[float, ...]:
    numbers = isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    if not numbers or len(value) != length:
        raise ConfigError(f"{path}: expected a list of {length} numbers")
    return tuple(float(v) for v in value)


def _choice(value: Any, choices: Sequence[str], path: str) -> str:
    if value not in choices:
        raise ConfigError(f"{path}: expected one of {', '.join(choices)}, got {value!r}")
    return value


@dataclass
class GridSpec:
    dims: Tuple[int, int, int] = (8, 8, 8)
    spacing: Optional[Tuple[float, float, float]] = None
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    @classmethod
    def from_dict(cls, data: Any) -> "GridSpec":
        data = _section(data, ("n", "dims", "spacing", "origin"), "grid")
        if "n" in data and "dims" in data:
            raise ConfigError("grid: give either 'n' or 'dims', not both")
        spec = cls()
        if "n" in data:
            if not _is_int(data["n"]):
                raise ConfigError("grid.n: expected an integer")
            spec.dims = (data["n"],) * 3
        if "dims" in data:
            spec.dims = _int_list(data["dims"], 3, "grid.dims")
        if "spacing" in data:
            spec.spacing = _float_list(data["spacing"], 3, "grid.spacing")
        if "origin" in data:
            spec.origin = _float_list(data["origin"], 3, "grid.origin")
        if min(spec.dims) < 2:
            raise ConfigError(f"grid: need at least 2 cells per axis, got {list(spec.dims)}")
        if spec.spacing is not None and not all(math.isfinite(h) and h > 0.0 for h in spec.spacing):
            raise ConfigError(f"grid.spacing: expected positive numbers, got {list(spec.spacing)}")
        return spec

    def build(self) -> BodyGrid:
        """Unit box by default: spacing 1 / n along each axis"""
        spacing = self.spacing or tuple(1.0 / n for n in self.dims)
        return BodyGrid(self.dims, spacing, self.origin)


@dataclass
class FieldSpec:
    """Input field: a named preset or a vertex CSV (u, phi or y, psi in columns v1..v6)"""

    kind: str = "displacement"
    preset: Optional[str] = "shear"
    csv: Optional[str] = None
    defect_at: Tuple[int, int] = (0, 0)
    burgers: Tuple[float, ...] = (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str, base_dir: str) -> "FieldSpec":
        spec = cls()
        if "kind" in data:
            spec.kind = _choice(data["kind"], FIELD_KINDS, f"{path}.kind")
        if "preset" in data and "csv" in data:
            raise ConfigError(f"{path}: give either 'preset' or 'csv', not both")
        if "preset" in data:
            if not isinstance(data["preset"], str):
                raise ConfigError(f"{path}.preset: expected a preset name")
            spec.preset = data["preset"]
        if "csv" in data:
            if not isinstance(data["csv"], str):
                raise ConfigError(f"{path}.csv: expected a file path")
            spec.csv = _resolve(data["csv"], base_dir)
            spec.preset = None
        if "defect_at" in data:
            spec.defect_at = _int_list(data["defect_at"], 2, f"{path}.defect_at")
        if "burgers_motor" in data:
            spec.burgers = _float_list(data["burgers_motor"], 6, f"{path}.burgers_motor")
        return spec


_FIELD_KEYS = ("kind", "preset", "csv", "defect_at", "burgers_motor")


@dataclass
class StrainOptions:
    input_field: FieldSpec = field(default_factory=FieldSpec)
    method: str = "connection"
    cochain: bool = False

    @classmethod
    def from_dict(cls, data: Any, base_dir: str) -> "StrainOptions":
        data = _section(data, _FIELD_KEYS + ("method", "cochain"), "strain")
        options = cls(FieldSpec.from_dict(data, "strain", base_dir))
        if options.input_field.kind == "impulse":
            raise ConfigError("strain.kind: impulse defects are only available to the compat command")
        if "method" in data:
            options.method = _choice(data["method"], STRAIN_METHODS, "strain.method")
        if "cochain" in data:
            if not isinstance(data["cochain"], bool):
                raise ConfigError("strain.cochain: expected true or false")
            options.cochain = data["cochain"]
        return options


@dataclass
class BurgersOptions:
    """Loop and cap as explicit cell lists, or a square patch around the defect line"""

    loop: Optional[List[List[Any]]] = None
    cap: Optional[List[List[Any]]] = None
    k: int = 0
    radius: int = 0

    @classmethod
    def from_dict(cls, data: Any) -> Optional["BurgersOptions"]:
        if data is None:
            return None
        data = _section(data, ("loop", "cap", "k", "radius"), "compat.burgers")
        options = cls()
        for key in ("loop", "cap"):
            if key in data:
                cells = data[key]
                if not isinstance(cells, list) or not all(isinstance(c, list) and len(c) in (4, 5) for c in cells):
                    raise ConfigError(f"compat.burgers.{key}: expected a list of [cell_type, i, j, k(, sign)]")
                setattr(options, key, cells)
        if (options.loop is None) != (options.cap is None):
            raise ConfigError("compat.burgers: 'loop' and 'cap' must be given together")
        for key in ("k", "radius"):
            if key in data:
                if not _is_int(data[key]):
                    raise ConfigError(f"compat.burgers.{key}: expected an integer")
                setattr(options, key, data[key])
        return options


@dataclass
class CompatOptions:
    input_field: FieldSpec = field(default_factory=FieldSpec)
    burgers: Optional[BurgersOptions] = None

    @classmethod
    def from_dict(cls, data: Any, base_dir: str) -> "CompatOptions":
        data = _section(data, _FIELD_KEYS + ("burgers",), "compat")
        return cls(FieldSpec.from_dict(data, "compat", base_dir), BurgersOptions.from_dict(data.get("burgers")))


@dataclass
class SolveOptions:
    """Boundary values from ``preset``; loads either zero or manufactured from the same preset"""

    preset: str = "zero"
    loads: str = "zero"
    method: str = config.DEFAULT_SOLVER_METHOD
    mms_sizes: List[int] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: Any) -> "SolveOptions":
        data = _section(data, ("preset", "loads", "method", "mms_sizes"), "solve")
        options = cls()
        if "preset" in data:
            if not isinstance(data["preset"], str):
                raise ConfigError("solve.preset: expected a preset name")
            options.preset = data["preset"]
        if "loads" in data:
            options.loads = _choice(data["loads"], ("zero", "manufactured"), "solve.loads")
        if "method" in data:
            options.method = _choice(data["method"], ("direct", "cg"), "solve.method")
        if "mms_sizes" in data:
            sizes = data["mms_sizes"]
            if not isinstance(sizes, list) or not all(_is_int(n) and n >= 2 for n in sizes):
                raise ConfigError("solve.mms_sizes: expected a list of integers >= 2")
            options.mms_sizes = sizes
        return options


@dataclass
class VerifyOptions:
    samples: Optional[int] = None
    grids: Optional[List[int]] = None

    @classmethod
    def from_dict(cls, data: Any) -> "VerifyOptions":
        data = _section(data, ("samples", "grids"), "verify")
        options = cls()
        if "samples" in data:
            if not _is_int(data["samples"]) or data["samples"] < 1:
                raise ConfigError("verify.samples: expected a positive integer")
            options.samples = data["samples"]
        if "grids" in data:
            grids = data["grids"]
            if not isinstance(grids, list) or len(grids) < 2 or not all(_is_int(n) and n >= 2 for n in grids):
                raise ConfigError("verify.grids: expected at least two integers >= 2")
            options.grids = grids
        return options


def _resolve(path: str, base_dir: str) -> str:
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


_TOP_KEYS = ("grid", "strain", "compat", "solve", "verify", "material", "output_dir", "seed", "threads", "level")


@dataclass
class RunConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    strain: StrainOptions = field(default_factory=StrainOptions)
    compat: CompatOptions = field(default_factory=CompatOptions)
    solve: SolveOptions = field(default_factory=SolveOptions)
    verify: VerifyOptions = field(default_factory=VerifyOptions)
    material: Optional[Any] = None
    output_dir: str = config.OUTPUT_DIR
    seed: int = config.SEED
    threads: int = config.THREADS
    level: str = config.LEVEL
    source: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Any, base_dir: str = ".", source: Optional[str] = None) -> "RunConfig":
        data = _section(data, _TOP_KEYS, "")
        run = cls(
            grid=GridSpec.from_dict(data.get("grid")),
            strain=StrainOptions.from_dict(data.get("strain"), base_dir),
            compat=CompatOptions.from_dict(data.get("compat"), base_dir),
            solve=SolveOptions.from_dict(data.get("solve")),
            verify=VerifyOptions.from_dict(data.get("verify")),
            source=source,
        )
        if "material" in data:
            material = data["material"]
            if isinstance(material, str):
                run.material = _resolve(material, base_dir)
            elif isinstance(material, dict):
                run.material = material
            else:
                raise ConfigError("material: expected a file path or an inline material object")
        if "output_dir" in data:
            if not isinstance(data["output_dir"], str):
                raise ConfigError("output_dir: expected a directory path")
            run.output_dir = _resolve(data["output_dir"], base_dir)
        for key in ("seed", "threads"):
            if key in data:
                if not _is_int(data[key]):
                    raise ConfigError(f"{key}: expected an integer")
                setattr(run, key, data[key])
        if "level" in data:
            run.level = _choice(data["level"], LEVELS, "level")
        if run.threads < 1:
            raise ConfigError(f"threads: expected a positive integer, got {run.threads}")
        return run

    def override(self, output_dir: Optional[str] = None, threads: Optional[int] = None,
                 level: Optional[str] = None, seed: Optional[int] = None) -> "RunConfig":
        """Apply command-line flags, which take precedence over the document"""
        if output_dir is not None:
            self.output_dir = output_dir
        if threads is not None:
            if threads < 1:
                raise ConfigError(f"--threads: expected a positive integer, got {threads}")
            self.threads = threads
        if level is not None:
            self.level = _choice(level, LEVELS, "--level")
        if seed is not None:
            self.seed = seed
        return self

    def load_stiffness(self) -> StiffnessOperator:
        """
        Material of the run

        Raises:
            ConfigError: if no material is configured or its file is missing
        """
        if self.material is None:
            raise ConfigError("No material configured (top-level 'material' key)")
        if isinstance(self.material, dict):
            return material_from_dict(self.material, "material")
        return load_material(self.material)

    def as_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document.pop("source")
        return document


def load_run_config(path: str) -> RunConfig:
    """
    Read and validate a run document

    Args:
        path: JSON file; relative paths inside it resolve against its directory

    Raises:
        ConfigError: if the file is missing, is not JSON or fails validation
    """
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")
    run = RunConfig.from_dict(data, os.path.dirname(os.path.abspath(path)), path)
    logger.info(f"Loaded run config {path}")
    return run
