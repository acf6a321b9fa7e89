"""
Config loading for frontlab.

Model descriptors are JSON (or the same structure in YAML). Unknown keys are
rejected at every level so that a typo in a parameter name never silently
falls back to a default.

Example model.json:
{
  "epsilon": 0.1,
  "tau": 1.0,
  "regime": {"super_slow": {"gamma": 2.0}},
  "H": {"kind": "power", "h0": 1.0, "m": 1},
  "G": {"kind": "linear"}
}

"G" may be omitted; it is then the linear slow reaction implied by the
regime. Instead of "H"/"G" a descriptor may give the full reaction as
"F": {"kind": "polynomial", "coefficients": [[...], ...]} (coefficient
c[i][j] multiplies (U^2)^i V^j), which is decomposed into H and G.

Runtime settings come from the environment (a .env file is honoured):
  FRONTLAB_WORKERS      sweep worker count
  FRONTLAB_LOG_LEVEL    log level for the CLI and the MCP server
  FRONTLAB_CONFIG_FILE  default model descriptor for the MCP tools
  FRONTLAB_OUTPUT_DIR   default CLI output directory
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from frontlab.errors import ConfigError
from frontlab.model import (
    CubicG,
    DecomposedReaction,
    GTerm,
    HTerm,
    LinearG,
    ModelParams,
    PolynomialH,
    PolynomialSurface,
    PowerH,
    ReactionSpec,
    Regular,
    SuperSlow,
    require_consistent,
)

logger = logging.getLogger("frontlab.config")

_TOP_KEYS = {"epsilon", "tau", "regime", "H", "G", "F"}
_H_KEYS = {"power": {"kind", "h0", "m"}, "table": {"kind", "coefficients"}}
_G_KEYS = {"linear": {"kind", "g1"}, "cubic": {"kind", "g1", "g3"}}
_F_KEYS = {"polynomial": {"kind", "coefficients"}}


@dataclass(frozen=True)
class ModelConfig:
    params: ModelParams
    spec: ReactionSpec
    source: dict[str, Any]
    digest: str                         # sha256 of the canonical descriptor


@dataclass
class Settings:
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    log_level: str = "INFO"
    config_file: str | None = None
    output_dir: str = "frontlab-out"


def reject_unknown_keys(raw: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def _number(raw: dict, key: str, where: str, default: float | None = None) -> float:
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in {where}")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{where}.{key}' must be a number, got {value!r}")
    return float(value)


def _mapping(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"'{where}' must be an object")
    return value


def _parse_regime(raw: Any) -> SuperSlow | Regular:
    raw = _mapping(raw, "regime")
    if len(raw) != 1:
        raise ConfigError("'regime' must have exactly one of 'super_slow' or 'regular'")
    (name, body), = raw.items()
    body = _mapping(body, f"regime.{name}")
    if name == "super_slow":
        reject_unknown_keys(body, {"gamma"}, "regime.super_slow")
        return SuperSlow(gamma=_number(body, "gamma", "regime.super_slow"))
    if name == "regular":
        reject_unknown_keys(body, {"g1"}, "regime.regular")
        return Regular(g1=_number(body, "g1", "regime.regular"))
    raise ConfigError(f"unknown regime '{name}'")


def _kind(raw: dict, table: dict[str, set[str]], where: str) -> str:
    kind = raw.get("kind")
    if kind not in table:
        raise ConfigError(f"'{where}.kind' must be one of {sorted(table)}, got {kind!r}")
    reject_unknown_keys(raw, table[kind], where)
    return kind


def _coefficients(raw: dict, where: str) -> tuple[tuple[float, ...], ...]:
    rows = raw.get("coefficients")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
        raise ConfigError(f"'{where}.coefficients' must be a non-empty list of non-empty lists")
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"'{where}.coefficients' rows must have equal length")
    try:
        return tuple(tuple(float(x) for x in r) for r in rows)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{where}.coefficients' must be numeric: {e}") from e


def _parse_h(raw: Any) -> HTerm:
    raw = _mapping(raw, "H")
    if _kind(raw, _H_KEYS, "H") == "power":
        m = raw.get("m", 1)
        if not isinstance(m, int) or isinstance(m, bool):
            raise ConfigError(f"'H.m' must be an integer, got {m!r}")
        return PowerH(h0=_number(raw, "h0", "H"), m=m)
    return PolynomialH(PolynomialSurface(_coefficients(raw, "H")))


def _parse_g(raw: Any, params: ModelParams) -> GTerm:
    raw = _mapping(raw, "G")
    kind = _kind(raw, _G_KEYS, "G")
    g1 = _number(raw, "g1", "G", default=params.g1)
    if kind == "linear":
        return LinearG(g1)
    if params.is_super_slow:
        raise ConfigError("the super-slow regime supports only a linear G")
    return CubicG(g1, _number(raw, "g3", "G"))


def parse_model_descriptor(raw: Any) -> ModelConfig:
    """Build (params, spec) from a descriptor dict. Raises ConfigError."""
    raw = _mapping(raw, "descriptor")
    reject_unknown_keys(raw, _TOP_KEYS, "descriptor")
    params = ModelParams(
        epsilon=_number(raw, "epsilon", "descriptor"),
        tau=_number(raw, "tau", "descriptor"),
        regime=_parse_regime(raw.get("regime")),
    )

    if "F" in raw:
        if "H" in raw or "G" in raw:
            raise ConfigError("'F' is mutually exclusive with 'H' and 'G'")
        f_raw = _mapping(raw["F"], "F")
        _kind(f_raw, _F_KEYS, "F")
        surface = PolynomialSurface(_coefficients(f_raw, "F"))
        spec = DecomposedReaction(surface.value).to_spec()
    else:
        if "H" not in raw:
            raise ConfigError("descriptor needs either 'H' (optionally with 'G') or 'F'")
        h = _parse_h(raw["H"])
        g = _parse_g(raw["G"], params) if "G" in raw else LinearG(params.g1)
        spec = ReactionSpec(h=h, g=g)

    # G'(0) of a decomposed F is a finite difference
    require_consistent(params, spec, rtol=1e-6 if "F" in raw else 1e-12)

    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    return ModelConfig(params=params, spec=spec, source=raw, digest=digest)


def read_structured_file(path: str | Path) -> Any:
    """Read a JSON or YAML document (by extension)."""
    path = Path(os.path.expanduser(str(path)))
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        text = path.read_text()
        if path.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"failed to parse {path}: {e}") from e


def load_model_config(path: str | Path) -> ModelConfig:
    config = parse_model_descriptor(read_structured_file(path))
    logger.info(f"Loaded model from {path} (digest {config.digest[:12]})")
    return config


def load_settings() -> Settings:
    """
    Read runtime settings from the environment.
    Never raises: malformed values are logged and replaced by defaults.
    """
    settings = Settings()

    workers = os.getenv("FRONTLAB_WORKERS", "").strip()
    if workers:
        try:
            settings.workers = max(1, int(workers))
        except ValueError:
            logger.warning(f"Ignoring non-integer FRONTLAB_WORKERS={workers!r}")

    level = os.getenv("FRONTLAB_LOG_LEVEL", "").strip().upper()
    if level:
        if level in logging.getLevelNamesMapping():
            settings.log_level = level
        else:
            logger.warning(f"Ignoring unknown FRONTLAB_LOG_LEVEL={level!r}")

    config_file = os.getenv("FRONTLAB_CONFIG_FILE", "").strip()
    if config_file:
        settings.config_file = os.path.expanduser(config_file)

    output_dir = os.getenv("FRONTLAB_OUTPUT_DIR", "").strip()
    if output_dir:
        settings.output_dir = os.path.expanduser(output_dir)

    return settings
