import hashlib
import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Optional

import yaml

# local imports
from ..dataclass import SweepConfig
from ..errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "HARDYCONE_THREADS"


def load_yaml(path: str) -> dict:
    """
    helper function to load a sweep configuration from YAML
    """
    with open(path, "rb") as infile:
        return yaml.safe_load(infile) or {}


def load_toml(path: str) -> dict:
    with open(path, "rb") as infile:
        return tomllib.load(infile)


def load_config(path: str) -> dict:
    """
    Read a TOML or YAML sweep configuration; a [sweep] table is unwrapped if present
    """
    suffix = os.path.splitext(path)[1].lower()
    try:
        if suffix == ".toml":
            values = load_toml(path)
        elif suffix in (".yaml", ".yml"):
            values = load_yaml(path)
        else:
            raise ConfigError(f"config {path} must end in .toml, .yaml or .yml")
    except (tomllib.TOMLDecodeError, yaml.YAMLError) as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    if not isinstance(values, dict):
        raise ConfigError(f"config {path} must hold a table of sweep settings")
    return values.get("sweep", values)


def resolve_sweep_config(file_values: Optional[dict], overrides: dict) -> SweepConfig:
    """
    Merge file values with command-line overrides (flags win; None means unset)
    """
    values = dict(file_values or {})
    values.update({key: value for key, value in overrides.items() if value is not None})
    unknown = set(values) - set(SweepConfig._fields)
    if unknown:
        raise ConfigError(f"unknown sweep settings: {', '.join(sorted(unknown))}")
    try:
        return SweepConfig(**values)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid sweep settings: {err}") from err


def config_hash(config: SweepConfig) -> str:
    # SHA-256 of the canonical JSON of the resolved configuration
    canonical = json.dumps(config._asdict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def max_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return os.cpu_count() or 1
    try:
        workers = int(value)
    except ValueError as err:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}") from err
    return max(1, workers)
