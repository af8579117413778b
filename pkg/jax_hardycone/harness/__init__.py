from . import cli, config, output, sweep
from .cli import main
from .config import config_hash, load_config, resolve_sweep_config
from .sweep import dichotomy_boundary, run_sweep
