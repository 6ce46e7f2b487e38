import os
from dotenv import dotenv_values, load_dotenv

from src.errors import ConfigError

load_dotenv()


class Config:
    # Output locations
    OUTPUT_DIR = os.getenv('YIELDCURVE_OUTPUT_DIR', 'output')
    LOG_DIR = os.getenv('YIELDCURVE_LOG_DIR', 'logs')
    LOG_LEVEL = os.getenv('YIELDCURVE_LOG_LEVEL', 'INFO')

    # Model defaults
    FLAT_BAND = float(os.getenv('YIELDCURVE_FLAT_BAND', '0.25'))
    THRESHOLD = float(os.getenv('YIELDCURVE_THRESHOLD', '0.5'))
    MIN_TRAIN = int(os.getenv('YIELDCURVE_MIN_TRAIN', '40'))
    WORKERS = int(os.getenv('YIELDCURVE_WORKERS', '1'))

    @classmethod
    def validate(cls):
        """Validate configuration."""
        if cls.FLAT_BAND < 0:
            raise ConfigError(f"YIELDCURVE_FLAT_BAND must be >= 0, got {cls.FLAT_BAND}")

        if not 0.0 < cls.THRESHOLD < 1.0:
            raise ConfigError(f"YIELDCURVE_THRESHOLD must lie in (0, 1), got {cls.THRESHOLD}")

        if cls.MIN_TRAIN < 8:
            raise ConfigError(f"YIELDCURVE_MIN_TRAIN must be >= 8, got {cls.MIN_TRAIN}")

        if cls.WORKERS < 1:
            raise ConfigError(f"YIELDCURVE_WORKERS must be >= 1, got {cls.WORKERS}")

        os.makedirs(cls.OUTPUT_DIR, exist_ok=True)
        os.makedirs(cls.LOG_DIR, exist_ok=True)
        return True


def normalize_key(key: str) -> str:
    """Config-file keys and CLI flags share one spelling: lower case, dashes."""
    return key.strip().lower().replace('_', '-').lstrip('-')


def load_config_file(path: str, allowed: set[str]) -> dict[str, str]:
    """Read a flat ``key = value`` run config (``#`` comments allowed).

    Keys are returned in flag spelling so they can be merged under the
    command line flags.
    """
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")

    values = dotenv_values(path)
    settings = {}
    for key, value in values.items():
        name = normalize_key(key)
        if name not in allowed:
            raise ConfigError(f"{path}: unknown config key '{key}'")
        if value is None:
            raise ConfigError(f"{path}: config key '{key}' has no value")
        settings[name] = value.strip()
    return settings
