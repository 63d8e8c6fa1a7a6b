"""
Configuration management for GlueNet.

Tool-wide defaults live in DEFAULT_CONFIG. An explicit YAML settings file can
be merged on top with load_settings(); nothing is read from the environment,
so a run is fully described by its command line and the files it names.
"""
from __future__ import annotations

import copy
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from gluenet.common.errors import ConfigurationError

log = logging.getLogger(__name__)

# Default configuration
DEFAULT_CONFIG = {
    'tensor': {
        'dtype': 'float32',
        'debug_checks': False,
    },
    'model': {
        'token_hidden_ratio': 2.0,
        'dim_hidden_ratio': 1.75,
        'tail_layer_norm': False,
        'head_residual': False,
    },
    'train': {
        'lr': 1e-4,
        'lr_disc': 1e-4,
        'betas': [0.9, 0.999],
        'eps': 1e-8,
        'weight_decay': 0.01,
        'batch_size': 32,
        'steps': 1000,
        'seed': 0,
        'checkpoint_every': 0,
        'log_every': 100,
    },
    'loss': {
        'lambda_mse': 1.0,
        'lambda_adv': 0.0,
        'lambda_rec': 1.0,
        'lambda_adv_enabled': 0.05,
    },
    'fusion': {
        'k': 6,
    },
    'guidance': {
        's': 7.5,
    },
    'diagnostics': {
        'power_tol': 1e-7,
        'power_max_iter': 1000,
        'csv_significant_digits': 9,
    },
}


class Config:
    """
    Configuration singleton for the toolkit.

    Loads configuration from:
    1. Defaults
    2. An explicit settings YAML (load_settings), merged recursively
    """

    _instance: Optional['Config'] = None
    _config: Dict[str, Any] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance.reset()
        return cls._instance

    def reset(self) -> None:
        """Drop any merged settings and return to the defaults."""
        self._config = copy.deepcopy(DEFAULT_CONFIG)
        self.source: Optional[Path] = None

    def load(self, path: Path) -> None:
        """Merge a YAML settings file into the current configuration."""
        path = Path(path)
        try:
            with open(path, 'r') as f:
                yaml_config = yaml.safe_load(f)
        except OSError:
            raise
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Failed to parse settings {path}: {e}") from e
        if yaml_config:
            if not isinstance(yaml_config, dict):
                raise ConfigurationError(f"Settings {path} must be a mapping")
            self._merge_config(yaml_config)
        self.source = path
        log.info(f"Loaded settings from {path}")

        errors = self.validate()
        if errors:
            raise ConfigurationError("; ".join(errors))

    def _merge_config(self, new_config: Dict[str, Any]) -> None:
        """Recursively merge new config into existing config."""
        def merge(base: Dict, update: Dict) -> Dict:
            for key, value in update.items():
                if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                    merge(base[key], value)
                else:
                    base[key] = value
            return base

        merge(self._config, new_config)

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value by dot-notation path.
        """
        keys = key_path.split('.')
        value = self._config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def section(self, name: str) -> Dict[str, Any]:
        """Copy of one top-level section."""
        return copy.deepcopy(self._config.get(name, {}))

    def get_dtype(self) -> str:
        return self.get('tensor.dtype', 'float32')

    def get_debug_checks(self) -> bool:
        return bool(self.get('tensor.debug_checks', False))

    def get_fusion_k(self) -> int:
        return int(self.get('fusion.k', 6))

    def get_guidance_weight(self) -> float:
        return float(self.get('guidance.s', 7.5))

    def get_csv_digits(self) -> int:
        return int(self.get('diagnostics.csv_significant_digits', 9))

    def validate(self) -> list[str]:
        """
        Validate configuration.
        """
        errors = []

        if self.get_dtype() not in ('float32', 'float64'):
            errors.append(f"tensor.dtype must be float32 or float64, got {self.get_dtype()}")

        for key in ('lr', 'lr_disc', 'eps'):
            value = self.get(f'train.{key}')
            if not isinstance(value, (int, float)) or not value > 0:
                errors.append(f"train.{key} must be positive, got {value}")

        betas = self.get('train.betas')
        if not (isinstance(betas, (list, tuple)) and len(betas) == 2
                and all(0 <= b < 1 for b in betas)):
            errors.append(f"train.betas must be two values in [0, 1), got {betas}")

        lambdas = [self.get(f'loss.lambda_{n}') for n in ('mse', 'adv', 'rec')]
        if any(not isinstance(v, (int, float)) or v < 0 for v in lambdas):
            errors.append(f"loss weights must be nonnegative, got {lambdas}")
        elif not any(lambdas):
            errors.append("loss weights must not all be zero")

        s = self.get('guidance.s')
        if not isinstance(s, (int, float)) or not math.isfinite(s) or s < 0:
            errors.append(f"guidance.s must be finite and nonnegative, got {s}")

        if int(self.get('fusion.k', 0)) < 1:
            errors.append("fusion.k must be at least 1")

        return errors

    def __repr__(self) -> str:
        return f"Config({self._config})"


# Convenience functions for common operations
def get_config() -> Config:
    """Get the configuration singleton."""
    return Config()


def load_settings(path: Path) -> Config:
    """Merge a settings YAML into the singleton and return it."""
    config = get_config()
    config.load(path)
    return config
