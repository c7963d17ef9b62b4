"""
Configuration loader for C3L clustering runs.
"""

import yaml
from pathlib import Path
from typing import Dict, Any, List, Optional


DEFAULT_ALPHAS = [0.01, 0.05, 0.15, 0.25, 0.35, 0.5]


class Config:
    """Configuration manager for C3L clustering runs."""

    def __init__(self, config_path: str = "config/config.yaml"):
        """
        Load configuration from YAML file.

        Args:
            config_path: Path to configuration file
        """
        self.config_path = Path(config_path)
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load and parse the YAML configuration file."""
        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        with open(self.config_path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get a configuration value using dot notation.

        Args:
            key_path: Path to config value (e.g., 'clustering.k_init')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key_path.split('.')
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    @property
    def alphas(self) -> List[float]:
        """Get the leakage levels swept by default."""
        return [float(a) for a in self.get('clustering.alphas', DEFAULT_ALPHAS)]

    @property
    def k_init(self) -> int:
        """Get the initial number of clusters."""
        return int(self.get('clustering.k_init', 2))

    @property
    def restarts(self):
        """Get the number of random restarts per run."""
        return int(self.get('clustering.restarts', 10))

    @property
    def seed(self):
        """Get the master random seed."""
        return int(self.get('clustering.seed', 0))

    @property
    def max_sweeps(self):
        """Get the cap on Hartigan sweeps per restart."""
        return int(self.get('clustering.max_sweeps', 200))

    @property
    def min_cluster_size(self) -> Optional[int]:
        """Get the minimum cluster size (None means dimension + 2)."""
        value = self.get('clustering.min_cluster_size', None)
        return None if value is None else int(value)

    @property
    def workers(self):
        """Get the number of restart threads."""
        return int(self.get('clustering.workers', 1))

    @property
    def min_cluster_fraction(self):
        """Get the removal threshold as a fraction of all rows."""
        return float(self.get('clustering.removal.min_cluster_fraction', 0.0))

    @property
    def baselines(self) -> List[str]:
        """Get baseline methods run next to C3L (cec, cec_h)."""
        return list(self.get('clustering.baselines', []) or [])

    @property
    def ridge_scale(self):
        """Get the relative ridge added to tangent-space covariances."""
        return float(self.get('model.ridge_scale', 1e-9))

    @property
    def recompute_every(self):
        """Get how many passes of moves happen between full statistic rebuilds."""
        return int(self.get('model.recompute_every', 10))

    @property
    def output_dir(self):
        """Get output directory as absolute path."""
        output_dir = self.get('output.dir', 'output')
        # Relative paths are taken from the project root
        path = Path(output_dir)
        if not path.is_absolute():
            # Assuming config file is in config/ subdirectory
            project_root = self.config_path.parent.parent
            path = project_root / output_dir
        return str(path.resolve())

    @property
    def verbose(self):
        """Get verbose logging setting."""
        return bool(self.get('advanced.verbose', True))

    def __repr__(self):
        return f"Config(config_path='{self.config_path}')"
