import os
import logging
from typing import Dict, Mapping, Optional

from dotenv import load_dotenv

from .errors import InvalidInput

logger = logging.getLogger(__name__)

DEFAULTS = {
    'TRICHAIN_LOG': 'INFO',
    'TRICHAIN_TV_THRESHOLD': '0.05',
    'TRICHAIN_STATIONARY_TOL': '1e-10',
    'TRICHAIN_BALANCE_TOL': '1e-12',
    'TRICHAIN_ENUM_LIMIT': '2000000',
    'TRICHAIN_JOBS': '1',
    'TRICHAIN_VERIFY_PATHS': 'false',
    'TRICHAIN_CACHE_DB': '',
}


def load_config(env_file: Optional[str] = None) -> Dict[str, str]:
    """Load settings from the environment (and .env if present)"""
    if env_file:
        load_dotenv(env_file, override=True)
    else:
        load_dotenv()
    return {key: os.getenv(key, default) for key, default in DEFAULTS.items()}


def config_float(config: Dict[str, str], key: str) -> float:
    try:
        return float(config.get(key, DEFAULTS[key]))
    except (TypeError, ValueError):
        raise InvalidInput(f"{key} must be a number, got {config.get(key)!r}")


def config_int(config: Dict[str, str], key: str) -> int:
    raw = config.get(key, DEFAULTS[key])
    try:
        # accept "2e6" style values
        value = float(raw)
    except (TypeError, ValueError):
        raise InvalidInput(f"{key} must be an integer, got {raw!r}")
    if value != int(value):
        raise InvalidInput(f"{key} must be an integer, got {raw!r}")
    return int(value)


def config_bool(config: Mapping[str, str], key: str) -> bool:
    return str(config.get(key, DEFAULTS[key])).lower() in ('true', '1', 'yes')


def verify_paths_enabled() -> bool:
    """Whether every emitted simulation path is replay-verified"""
    return config_bool(os.environ, 'TRICHAIN_VERIFY_PATHS')
