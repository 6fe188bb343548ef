# ---------------------------------------------
# CONFIGURATION MANAGER
# ---------------------------------------------
import copy
import json
import logging
import os
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

OUTPUT_ENV = "ISING_LAB_OUTPUT"

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "sampler": {"metropolis_per_wolff": 1, "thermalize_factor": 10, "decorrelation_steps": 5},
    "sle": {
        "dt": 1e-3,
        "startup_gap_factor": 1.0,
        "substep_fraction": 0.1,
        "dt_floor_ratio": 1000,
        "swallow_factor": 10,
        "t_max_factor": 50,
        "coincidence_steps": 100,
        "undecided_warning": 0.01,
    },
    "conformal": {"cg_rtol": 1e-10, "cg_maxiter_factor": 10},
    "harness": {
        "output_dir": "runs",
        "csv_name": "results.csv",
        "workers": 1,
        "confidence_z": 1.96,
        "closure_tolerance": 0.03,
        "closure_shift_tolerance": 0.01,
        "hair_quantiles": [0.5, 0.9],
    },
    "logging": {"level": "INFO", "format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
}


class ConfigManager:
    """Manages the lab's configuration settings."""

    def __init__(self, config_path: str = "config.json") -> None:
        """
        Initialize the configuration manager.

        Args:
            config_path (str): File name next to this module, or an absolute path.
        """
        data_path = os.path.dirname(os.path.abspath(__file__))
        self.config_path = os.path.join(data_path, config_path)
        self.config = self._load_config()

    def _load_config(self) -> dict:
        """
        Load the configuration, filling missing keys from the defaults.

        Returns:
            dict: The configuration dictionary.
        """
        config = copy.deepcopy(DEFAULTS)
        try:
            if os.path.exists(self.config_path):
                with open(self.config_path, 'r') as f:
                    loaded = json.load(f)
                for section, values in loaded.items():
                    config.setdefault(section, {}).update(values)
        except Exception as e:
            logger.warning("Error loading config %s, using defaults: %s", self.config_path, e)
            config = copy.deepcopy(DEFAULTS)
        return config

    def get_section(self, section: str) -> Dict[str, Any]:
        return dict(self.config.get(section, {}))

    def get(self, section: str, key: str, default: Optional[Any] = None) -> Any:
        return self.config.get(section, {}).get(key, default)

    def get_output_dir(self) -> str:
        """
        Get the output directory; the ISING_LAB_OUTPUT variable wins over the file.

        Returns:
            str: The output directory.
        """
        return os.environ.get(OUTPUT_ENV) or self.get("harness", "output_dir", "runs")

    def set(self, section: str, key: str, value: Any) -> None:
        self.config.setdefault(section, {})[key] = value

    def save_config(self) -> None:
        """Save the configuration to the JSON file."""
        try:
            with open(self.config_path, 'w') as f:
                json.dump(self.config, f, indent=4)
        except Exception as e:
            logger.error("Error saving config %s: %s", self.config_path, e)
