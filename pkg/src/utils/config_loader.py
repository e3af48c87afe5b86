"""
Configuration Loader for the Quantum Groupoid Verifier
Loads truncation orders, probe bounds and conventions from the root JSON file
"""

import json
import os
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass


MAX_WORKERS_ENV = "QGROUPOID_MAX_WORKERS"


@dataclass
class VerifierConfig:
    """Sectioned configuration, one dictionary per JSON section."""
    algebra: Dict[str, Any]
    probes: Dict[str, Any]
    deformed: Dict[str, Any]
    classical_limit: Dict[str, Any]
    dynamical: Dict[str, Any]
    system: Dict[str, Any]


SECTIONS = ('algebra', 'probes', 'deformed', 'classical_limit', 'dynamical', 'system')


class ConfigLoader:
    """Loads and manages configuration from JSON files."""

    def __init__(self, config_path: Optional[str] = None):
        default_root = Path(__file__).parent.parent.parent / "qgroupoid_config.json"
        self.config_path = Path(config_path) if config_path is not None else default_root

        self.config: Optional[VerifierConfig] = None
        self._load_config()

    def _load_config(self):
        try:
            with open(self.config_path, 'r') as f:
                config_data = json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in configuration file: {e}")

        self.config = VerifierConfig(**{name: config_data.get(name, {}) for name in SECTIONS})

    def get_probe_parameters(self) -> Dict[str, Any]:
        return self.config.probes if self.config else {}

    def get_dynamical_parameters(self) -> Dict[str, Any]:
        return self.config.dynamical if self.config else {}

    def get_value(self, section: str, key: str, default: Any = None) -> Any:
        """Get a specific configuration value with fallback."""
        if not self.config:
            return default
        section_data = getattr(self.config, section, {})
        return section_data.get(key, default)

    def max_workers(self) -> int:
        """Worker cap for the scenario runner; the environment wins over the file."""
        override = os.environ.get(MAX_WORKERS_ENV)
        if override:
            try:
                return max(1, int(override))
            except ValueError:
                raise ValueError(f"{MAX_WORKERS_ENV} must be an integer, got {override!r}")
        return max(1, int(self.get_value('system', 'MAX_WORKERS', 1)))

    def validate_config(self) -> Dict[str, list]:
        """Validate configuration and return any issues."""
        issues: Dict[str, list] = {}

        if not self.config:
            issues['general'] = ['No configuration loaded']
            return issues

        for section, key in (('algebra', 'DEFAULT_TRUNCATION_ORDER'), ('deformed', 'DEFAULT_ORDER')):
            value = getattr(self.config, section).get(key)
            if not isinstance(value, int) or value < 0:
                issues.setdefault(section, []).append(f'{key} must be a non-negative integer')

        for key in ('MAX_COEFFICIENT_DEGREE', 'MAX_OPERATOR_ORDER', 'PBW_DEGREE'):
            value = self.config.probes.get(key)
            if not isinstance(value, int) or value < 0:
                issues.setdefault('probes', []).append(f'{key} must be a non-negative integer')

        if self.config.dynamical.get('ALT_SIGN') not in (1, -1):
            issues.setdefault('dynamical', []).append('ALT_SIGN must be 1 or -1')
        if self.config.dynamical.get('ALT_PLACEMENT') not in ('cyclic', 'leading', 'trailing'):
            issues.setdefault('dynamical', []).append('ALT_PLACEMENT must be cyclic, leading or trailing')

        if self.config.classical_limit.get('TENSOR_CONVENTION') not in ('stored', 'plain-sum'):
            issues.setdefault('classical_limit', []).append('TENSOR_CONVENTION must be stored or plain-sum')

        empty_sections = [name for name in SECTIONS if not getattr(self.config, name)]
        if empty_sections:
            issues.setdefault('warnings', []).append(f'Empty sections: {empty_sections}')

        return issues


# Global config loader instance
_config_loader: Optional[ConfigLoader] = None


def get_config_loader(config_path: Optional[str] = None) -> ConfigLoader:
    """Get the global configuration loader instance."""
    global _config_loader
    if _config_loader is None or config_path is not None:
        _config_loader = ConfigLoader(config_path)
    return _config_loader

