"""
Run configuration: YAML files, presets and command-line overrides.

Precedence, lowest first: built-in defaults, problem preset, config file,
``--set section.key=value`` overrides, dedicated CLI flags.
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence

from .errors import InvalidConfigError
from .models import (
    BoundaryCondition,
    LossWeights,
    LrSchedule,
    NetConfig,
    ProblemMode,
    ProblemSpec,
    RunConfig,
    TrainConfig,
    harmonic_gamma,
)
from .oracle import PRESETS, problem_preset
from .utils.file_utils import parse_scalar, read_yaml_file, write_yaml_file

logger = logging.getLogger(__name__)

DEFAULT_PRESET = "dirichlet"
DEFAULT_MULTI_PAIR_OUTPUTS = 3

ALLOWED_KEYS: Dict[str, set] = {
    "problem": {"preset", "name", "a", "b", "boundary", "mode", "eigenvalue", "num_outputs"},
    "weights": {"alpha", "mu", "delta", "beta", "c", "gamma", "nu", "reg", "top_k",
                "boundary_reduction"},
    "network": {"hidden_widths", "init_std"},
    "training": {
        "epochs", "interior_batch", "boundary_batch", "batches_per_epoch", "seed",
        "snapshot_epochs", "detach_rayleigh", "grad_clip", "max_failures",
        "eval_points", "progress",
    },
    "schedule": {"lr0", "decay", "period", "lr_min"},
}
TOP_LEVEL_KEYS = set(ALLOWED_KEYS) | {"output_dir"}

# dedicated CLI flags and where they land
FLAG_FIELDS = {
    "epochs": ("training", "epochs"),
    "seed": ("training", "seed"),
    "mode": ("problem", "mode"),
    "num_outputs": ("problem", "num_outputs"),
    "preset": ("problem", "preset"),
}


def _check_keys(raw: Mapping[str, Any]) -> None:
    if not isinstance(raw, Mapping):
        raise InvalidConfigError("configuration must be a mapping of sections")
    for key, section in raw.items():
        if key not in TOP_LEVEL_KEYS:
            raise InvalidConfigError("unknown configuration key", field=str(key))
        if key == "output_dir":
            continue
        if section is None:
            continue
        if not isinstance(section, Mapping):
            raise InvalidConfigError("section must be a mapping", field=key)
        for sub in section:
            if sub not in ALLOWED_KEYS[key]:
                raise InvalidConfigError("unknown configuration key", field=f"{key}.{sub}")


def apply_override(raw: Dict[str, Any], assignment: str) -> None:
    """Apply one ``section.key=value`` assignment in place."""
    if "=" not in assignment:
        raise InvalidConfigError(f"override {assignment!r} is not of the form key=value")
    dotted, text = assignment.split("=", 1)
    parts = dotted.strip().split(".")
    value = parse_scalar(text.strip())
    if parts == ["output_dir"]:
        raw["output_dir"] = value
        return
    if len(parts) != 2 or parts[0] not in ALLOWED_KEYS or parts[1] not in ALLOWED_KEYS[parts[0]]:
        raise InvalidConfigError("unknown configuration key", field=dotted.strip())
    section = raw.get(parts[0]) or {}
    section[parts[1]] = value
    raw[parts[0]] = section


def _boundary(items: Any) -> list:
    if not isinstance(items, (list, tuple)):
        raise InvalidConfigError("expected a list of {x, value} entries", field="problem.boundary")
    result = []
    for item in items:
        if isinstance(item, Mapping):
            if set(item) != {"x", "value"}:
                raise InvalidConfigError(
                    f"boundary entries need exactly 'x' and 'value', got {sorted(item)}",
                    field="problem.boundary",
                )
            result.append(BoundaryCondition(float(item["x"]), float(item["value"])))
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            result.append(BoundaryCondition(float(item[0]), float(item[1])))
        else:
            raise InvalidConfigError(f"bad boundary entry {item!r}", field="problem.boundary")
    return result


def _build_problem(section: Dict[str, Any]) -> tuple:
    section = dict(section)
    preset = section.pop("preset", None)
    if preset is None and "a" not in section and "b" not in section:
        preset = DEFAULT_PRESET

    mode = section.get("mode")
    num_outputs = section.get("num_outputs")
    if num_outputs is None:
        num_outputs = DEFAULT_MULTI_PAIR_OUTPUTS if mode == ProblemMode.MULTI_PAIR.value else 1

    weight_defaults: Dict[str, float] = {}
    fields: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise InvalidConfigError(
                f"unknown preset {preset!r} (expected one of {', '.join(PRESETS)})",
                field="problem.preset",
            )
        mode_enum = ProblemMode(mode) if mode in {m.value for m in ProblemMode} else None
        base, weight_defaults = problem_preset(preset, int(num_outputs), mode_enum)
        fields = base.to_dict()
        fields["boundary"] = base.boundary

    fields.update(section)
    fields["num_outputs"] = num_outputs
    if "boundary" in section:
        fields["boundary"] = _boundary(section["boundary"])
    fields.setdefault("boundary", [])
    for required in ("a", "b"):
        if required not in fields:
            raise InvalidConfigError("required when no preset is given", field=f"problem.{required}")
    return ProblemSpec(**fields), weight_defaults


def _build_weights(section: Dict[str, Any], spec: ProblemSpec,
                   weight_defaults: Dict[str, float]) -> LossWeights:
    fields: Dict[str, Any] = dict(weight_defaults)
    fields.update(section)
    m = spec.num_outputs
    gamma = fields.get("gamma", "harmonic")
    if isinstance(gamma, str):
        if gamma == "harmonic":
            gamma = harmonic_gamma(m)
        elif gamma == "uniform":
            gamma = [1.0] * m
        else:
            raise InvalidConfigError(
                f"expected 'harmonic', 'uniform' or a list, got {gamma!r}", field="weights.gamma"
            )
    elif isinstance(gamma, (int, float)):
        gamma = [float(gamma)] * m
    fields["gamma"] = [float(g) for g in gamma]
    return LossWeights(**fields)


def build_config(raw: Mapping[str, Any]) -> RunConfig:
    """Turn a parsed configuration mapping into a validated RunConfig."""
    _check_keys(raw)
    try:
        spec, weight_defaults = _build_problem(raw.get("problem") or {})
        weights = _build_weights(raw.get("weights") or {}, spec, weight_defaults)
        network = NetConfig(**(raw.get("network") or {}))
        training = TrainConfig(**(raw.get("training") or {}))
        schedule = LrSchedule(**(raw.get("schedule") or {}))
        output_dir = raw.get("output_dir") or "./runs"
        return RunConfig(spec, weights, network, training, schedule, str(output_dir))
    except InvalidConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise InvalidConfigError(f"invalid value: {e}") from e


def parse_config(path: Optional[str] = None, overrides: Sequence[str] = (),
                 output_dir: Optional[str] = None, **flags: Any) -> RunConfig:
    """Load a RunConfig from an optional YAML file, overrides and CLI flags.

    Anything left unset takes the defaults of the loss weights, schedule and
    network (alpha=0.1, mu=0.1, delta=0.5, beta=1.5, c=1, reg=1e-8,
    gamma_i=1/i, nu=2, K=40, lr 4e-3 decayed by 0.7 every 100 epochs to 5e-5).
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        if not Path(path).exists():
            raise InvalidConfigError(f"config file {path} does not exist", field="config")
        raw = copy.deepcopy(read_yaml_file(str(path)))
        _check_keys(raw)
        raw = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in raw.items()}

    for assignment in overrides:
        apply_override(raw, assignment)

    for name, value in flags.items():
        if value is None:
            continue
        if name not in FLAG_FIELDS:
            raise InvalidConfigError("unknown flag", field=name)
        section, key = FLAG_FIELDS[name]
        raw.setdefault(section, {})
        if raw[section] is None:
            raw[section] = {}
        raw[section][key] = value
    if output_dir is not None:
        raw["output_dir"] = output_dir

    config = build_config(raw)
    logger.debug("Resolved configuration: %s", config.to_dict())
    return config


def save_resolved(config: RunConfig, file_path: str) -> None:
    """Write the fully explicit configuration; parse_config reads it back unchanged."""
    write_yaml_file(file_path, config.to_dict())


def write_template(file_path: str, preset: str = DEFAULT_PRESET,
                   num_outputs: Optional[int] = None) -> RunConfig:
    """Write a starter configuration for a preset with every default spelled out."""
    flags: Dict[str, Any] = {"preset": preset}
    if num_outputs is not None:
        flags["num_outputs"] = num_outputs
    config = parse_config(**flags)
    data = config.to_dict()
    data["problem"] = {
        "preset": preset,
        "mode": config.problem.mode.value,
        "num_outputs": config.problem.num_outputs,
    }
    write_yaml_file(file_path, data)
    return config
