"""
Configuration Manager.

Persists user defaults for the simulation harness (filter, primary level,
replications, estimators), runtime settings and paths.
"""

import copy
import json
import os
import shutil
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from src.config.constants import (
    DB_PATH_ENV_VAR,
    DEFAULT_ESTIMATORS,
    DEFAULT_FILTER,
    DEFAULT_J0,
    DEFAULT_REPLICATIONS,
    DEFAULT_RSNR_LEVELS,
    DEFAULT_SEED,
)
from src.utils.logger import log, testimation_home


def _fill_missing(target: Dict[str, Any], defaults: Dict[str, Any]) -> None:
    for key, default in defaults.items():
        if key not in target or (isinstance(default, dict) and not isinstance(target[key], dict)):
            target[key] = copy.deepcopy(default)
        elif isinstance(default, dict):
            _fill_missing(target[key], default)


class ConfigManager:
    """
    JSON-backed settings under $TESTIMATION_HOME/config.json.

    Missing sections are filled from DEFAULT_CONFIG on load; every save
    keeps the previous file as config.json.bak.
    """

    CURRENT_SCHEMA_VERSION = 1

    DEFAULT_CONFIG = {
        "schema_version": CURRENT_SCHEMA_VERSION,
        "created_at": None,
        "updated_at": None,

        "defaults": {
            "filter": DEFAULT_FILTER,
            "j0": DEFAULT_J0,
            "replications": DEFAULT_REPLICATIONS,
            "rsnr_levels": list(DEFAULT_RSNR_LEVELS),
            "estimators": list(DEFAULT_ESTIMATORS),
            "seed": DEFAULT_SEED,
        },

        "runtime": {
            "workers": None,  # None = TESTIMATION_THREADS or physical cores
        },

        "paths": {
            "history_db": None,  # None = TESTIMATION_DB_PATH or <home>/runs.db
        },
    }

    def __init__(self, config_dir: Optional[str] = None):
        self.config_dir = config_dir or testimation_home()
        self.config_path = Path(self.config_dir) / "config.json"
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            log.warning(f"Cannot create config directory {self.config_dir}: {e}")

        self.config = self._read()
        _fill_missing(self.config, self.DEFAULT_CONFIG)
        if self.config["created_at"] is None:
            self.config["created_at"] = datetime.utcnow().isoformat()
        self._save_config()

    def _read(self) -> Dict[str, Any]:
        if not self.config_path.exists():
            return copy.deepcopy(self.DEFAULT_CONFIG)
        try:
            loaded = json.loads(self.config_path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as e:
            log.error(f"Failed to load config: {e}. Starting from defaults.")
            return copy.deepcopy(self.DEFAULT_CONFIG)
        if not isinstance(loaded, dict):
            log.error(f"Config file {self.config_path} does not hold a JSON object. Starting from defaults.")
            return copy.deepcopy(self.DEFAULT_CONFIG)
        return loaded

    def _save_config(self) -> None:
        self.config["updated_at"] = datetime.utcnow().isoformat()
        try:
            if self.config_path.exists():
                shutil.copy2(self.config_path, self.config_path.with_name("config.json.bak"))
            self.config_path.write_text(json.dumps(self.config, indent=2), encoding="utf-8")
        except OSError as e:
            log.error(f"Failed to save config: {e}")

    # =========================================================================
    # Public API - Get/Set
    # =========================================================================

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a config value by key.

        Supports dot notation for nested keys:
            manager.get("defaults.filter")

        Args:
            key: The config key (supports dot notation)
            default: Default value if key not found
        """
        value = self.config
        for part in key.split("."):
            if isinstance(value, dict) and part in value:
                value = value[part]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set a config value by key and persist.

            manager.set("defaults.replications", 50)
        """
        parts = key.split(".")
        parent = self.config
        for part in parts[:-1]:
            if part not in parent:
                parent[part] = {}
            parent = parent[part]
        parent[parts[-1]] = value
        self._save_config()

    def experiment_defaults(self) -> Dict[str, Any]:
        """Defaults applied to experiment configs for keys they omit."""
        return copy.deepcopy(self.get("defaults", {}))

    def get_history_db_path(self) -> str:
        return (
            self.get("paths.history_db")
            or os.getenv(DB_PATH_ENV_VAR)
            or str(Path(self.config_dir) / "runs.db")
        )

    def get_workers(self) -> Optional[int]:
        return self.get("runtime.workers")


# Module-level singleton
config_manager = ConfigManager()
