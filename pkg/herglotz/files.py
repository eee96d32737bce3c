import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import polars as pl
import yaml

from .entities import GroupStepper, OutputFormat, Route
from .errors import ConfigError

JSON_SCHEMA = 1
FLOAT_PRECISION = 16  # digits after the point in scientific notation: 17 significant


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "affine"
    parameters: dict[str, float] = field(default_factory=dict)
    # flat FullState vector (q_base, q_fiber, v, w, s)
    initial_state: tuple[float, ...] | None = None
    t_end: float = 2.0
    dt: float = 1e-3
    route: Route = Route.full
    output_path: str | None = None
    format: OutputFormat = OutputFormat.csv
    seed: int = 42
    stepper: GroupStepper = GroupStepper.rkmk4

    def __post_init__(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be positive (got {self.t_end})")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive (got {self.dt})")

    def merged(self, **overrides) -> "RunConfig":
        """A copy with every override that is not None applied."""
        return build_config({**dataclasses.asdict(self), **{k: v for k, v in overrides.items() if v is not None}})


CONFIG_FIELDS = tuple(f.name for f in dataclasses.fields(RunConfig))


def _enum(kind, value, key: str):
    try:
        return kind(value)
    except ValueError:
        allowed = ", ".join(member.value for member in kind)
        raise ConfigError(f"invalid {key} {value!r} (allowed: {allowed})") from None


def build_config(raw: dict) -> RunConfig:
    unknown = sorted(set(raw) - set(CONFIG_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = dict(raw)
    try:
        if "parameters" in values:
            values["parameters"] = {str(k): float(v) for k, v in dict(values["parameters"] or {}).items()}
        if values.get("initial_state") is not None:
            values["initial_state"] = tuple(float(x) for x in values["initial_state"])
        for key in ("t_end", "dt"):
            if key in values:
                values[key] = float(values[key])
        if "seed" in values:
            values["seed"] = int(values["seed"])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed config value ({e})") from e
    if "route" in values:
        values["route"] = _enum(Route, values["route"], "route")
    if "format" in values:
        values["format"] = _enum(OutputFormat, values["format"], "format")
    if "stepper" in values:
        values["stepper"] = _enum(GroupStepper, values["stepper"], "stepper")
    return RunConfig(**values)


def load_config(config_path) -> RunConfig:
    """Read a YAML or JSON mapping whose keys mirror the RunConfig fields."""
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {config_path}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {config_path} is not valid YAML/JSON ({e})") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {config_path} must hold a mapping")
    return build_config(raw)


def load_csv(csv_path) -> pl.DataFrame | None:
    try:
        return pl.read_csv(csv_path)
    except FileNotFoundError:
        return None


# ----------------------------
# Output
# ----------------------------

def write_csv(df: pl.DataFrame, save_path) -> None:
    df.write_csv(save_path, float_scientific=True, float_precision=FLOAT_PRECISION)


def trajectory_document(
        df: pl.DataFrame,
        *,
        scenario: str,
        route: Route,
        parameters: dict[str, float],
        summary: dict[str, float],
) -> dict:
    return {
        "schema": JSON_SCHEMA,
        "scenario": scenario,
        "route": str(route),
        "parameters": dict(sorted(parameters.items())),
        "columns": df.columns,
        "rows": df.rows(),
        "summary": summary,
    }


def write_json(document: dict, save_path) -> None:
    Path(save_path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def write_trajectory(
        df: pl.DataFrame,
        save_path,
        *,
        fmt: OutputFormat,
        scenario: str,
        route: Route,
        parameters: dict[str, float],
        summary: dict[str, float],
) -> None:
    match fmt:
        case OutputFormat.csv:
            write_csv(df, save_path)
        case OutputFormat.json:
            write_json(
                trajectory_document(df, scenario=scenario, route=route, parameters=parameters, summary=summary),
                save_path,
            )
        case _:
            raise ConfigError(f"unknown output format {fmt!r}")
