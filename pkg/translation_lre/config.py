# translation_lre/config.py

import copy
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .combinatorics import DepthModel
from .errors import DomainError, UsageError

logger = logging.getLogger(__name__)

COMMANDS = (
    "bounds", "necklace", "sectors", "rank-mps", "rank-circuit", "cut-verify",
    "correlations", "tails", "min-depth", "min-time",
)
OUTPUT_FORMATS = ("csv", "json", "both")

DEFAULT_GRIDS: Dict[str, Dict[str, Any]] = {
    "necklace": {"n": list(range(1, 13)), "q": [2, 3]},
    "sectors": {"n_by_q": {2: list(range(1, 11)), 3: list(range(1, 7))}},
    "bounds": {"n": list(range(8, 61)), "d": [1, 2, 3], "q": [2]},
    "rank_mps": {"n": list(range(3, 9)), "q": [2], "d_bond": [1, 2, 3]},
    "rank_circuit": {"n": [6, 8, 10, 12], "q": [2], "depth": [0, 1, 2]},
    "cut_verify": {"n": [6, 8, 10, 12], "q": 2, "depth": [1, 2], "circuits": 7},
    "correlations": {"n": list(range(4, 11)), "q": 2, "operators": 500, "locality": 3},
    "tails": {"instances": 200, "max_dim": 64},
    "min_depth": {"log2_n": list(range(8, 17)), "q": 2},
}


class SweepConfig:
    """
    Configuration for the sweep driver.
    Layers built-in defaults, a YAML file, environment variables and command-line overrides.
    """
    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration.

        Args:
            config_path (Optional[str]): Path to the YAML configuration file.
                                         If None, loads defaults and environment variables only.
        """
        self.grids: Dict[str, Dict[str, Any]] = copy.deepcopy(DEFAULT_GRIDS)
        self.eta: float = 0.5
        self.samples: Optional[int] = None
        self.seed: int = 0
        self.tolerances: Dict[str, float] = {"rank": 1e-8, "purity": 1e-9, "overlap": 1e-8}
        self.depth_model: Dict[str, Any] = {"c": 1.0, "p": 2.0, "r": 2, "epsilon": None}
        self.output_dir: str = "reports"
        self.output_format: str = "both"
        self.workers: int = 1
        self.cap_qn_exponent: int = 20

        # 1. YAML file
        if config_path:
            if not os.path.exists(config_path):
                raise UsageError("config", f"config file not found at {config_path}")
            self._load_from_yaml(config_path)

        # 2. Environment
        self._load_from_env()

    def _load_from_yaml(self, config_path: str):
        with open(config_path, 'r', encoding='utf-8') as f:
            try:
                config_data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise UsageError("config", f"failed to parse YAML file {config_path}: {e}") from e

        if not config_data:
            return
        if not isinstance(config_data, dict):
            raise UsageError("config", "top level of the config file must be a mapping")

        for command, grid in (config_data.get('grids') or {}).items():
            if command not in self.grids:
                raise UsageError(f"grids.{command}", "unknown grid")
            if not isinstance(grid, dict):
                raise UsageError(f"grids.{command}", "grid must be a mapping")
            self.grids[command].update(grid)

        self.eta = config_data.get('eta', self.eta)
        self.samples = config_data.get('samples', self.samples)
        self.seed = config_data.get('seed', self.seed)
        self.tolerances.update(config_data.get('tolerances') or {})
        self.depth_model.update(config_data.get('depth_model') or {})

        output = config_data.get('output') or {}
        self.output_dir = output.get('dir', self.output_dir)
        self.output_format = output.get('format', self.output_format)

        self.workers = config_data.get('workers', self.workers)
        self.cap_qn_exponent = config_data.get('cap_qn_exponent', self.cap_qn_exponent)

        logger.info(f"Configuration loaded from {config_path}")

    def _load_from_env(self):
        for variable, attribute in (("TILRE_SEED", "seed"), ("TILRE_WORKERS", "workers"),
                                    ("TILRE_CAP_QN", "cap_qn_exponent")):
            value = os.environ.get(variable)
            if value:
                try:
                    setattr(self, attribute, int(value))
                except ValueError:
                    logger.warning(f"Invalid value for {variable}: {value}. Keeping {getattr(self, attribute)}.")

        out_dir = os.environ.get('TILRE_OUT_DIR')
        if out_dir:
            self.output_dir = out_dir

    def apply_overrides(self, **overrides):
        """Command-line flags win over file and environment values; None means not given."""
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "output_format":
                self.output_format = value
            elif key == "output_dir":
                self.output_dir = value
            elif hasattr(self, key):
                setattr(self, key, value)
            else:
                raise UsageError(key, "unknown override")

    def build_depth_model(self) -> DepthModel:
        return DepthModel(**self.depth_model)

    def grid(self, command: str) -> Dict[str, Any]:
        return self.grids[command.replace("-", "_")]

    def validate_config(self):
        """Collects every invalid field and raises one UsageError naming the first."""
        errors: List[Tuple[str, str]] = []

        def check(condition: bool, field: str, message: str):
            if not condition:
                errors.append((field, message))

        def int_list(field: str, values, minimum: int):
            ok = isinstance(values, list) and values and all(isinstance(v, int) and v >= minimum for v in values)
            check(bool(ok), field, f"must be a non-empty list of integers >= {minimum}")
            return values if ok else []

        check(isinstance(self.eta, (int, float)) and 0 < self.eta <= 1, "eta", "must lie in (0, 1]")
        check(self.samples is None or (isinstance(self.samples, int) and self.samples > 0),
              "samples", "must be a positive integer or null")
        check(isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64, "seed", "must be an unsigned 64-bit integer")
        check(isinstance(self.workers, int) and self.workers >= 1, "workers", "must be >= 1")
        check(isinstance(self.cap_qn_exponent, int) and 1 <= self.cap_qn_exponent <= 30,
              "cap_qn_exponent", "must lie in [1, 30]")
        check(self.output_format in OUTPUT_FORMATS, "output.format", f"must be one of {OUTPUT_FORMATS}")
        check(isinstance(self.output_dir, str) and bool(self.output_dir), "output.dir", "must be a path")
        for name in ("rank", "purity", "overlap"):
            value = self.tolerances.get(name)
            check(isinstance(value, (int, float)) and 0 < value < 1, f"tolerances.{name}", "must lie in (0, 1)")
        try:
            self.build_depth_model()
        except (DomainError, TypeError) as e:
            errors.append(("depth_model", str(e)))

        int_list("grids.necklace.n", self.grids["necklace"].get("n"), 1)
        int_list("grids.necklace.q", self.grids["necklace"].get("q"), 2)

        n_by_q = self.grids["sectors"].get("n_by_q")
        if isinstance(n_by_q, dict) and n_by_q:
            for q, ns in n_by_q.items():
                check(isinstance(q, int) and q >= 2, "grids.sectors.n_by_q", f"local dimension {q} must be >= 2")
                int_list(f"grids.sectors.n_by_q.{q}", ns, 1)
        else:
            errors.append(("grids.sectors.n_by_q", "must be a non-empty mapping q -> list of n"))

        bounds = self.grids["bounds"]
        ns = int_list("grids.bounds.n", bounds.get("n"), 1)
        ds = int_list("grids.bounds.d", bounds.get("d"), 1)
        int_list("grids.bounds.q", bounds.get("q"), 2)
        if ns and ds:
            check(min(ns) >= 2 * max(ds) + 2, "grids.bounds.n", f"every n must be >= 2d+2 = {2 * max(ds) + 2}")

        int_list("grids.rank_mps.n", self.grids["rank_mps"].get("n"), 1)
        int_list("grids.rank_mps.q", self.grids["rank_mps"].get("q"), 2)
        int_list("grids.rank_mps.d_bond", self.grids["rank_mps"].get("d_bond"), 1)

        circuit = self.grids["rank_circuit"]
        ns = int_list("grids.rank_circuit.n", circuit.get("n"), 2)
        int_list("grids.rank_circuit.q", circuit.get("q"), 2)
        int_list("grids.rank_circuit.depth", circuit.get("depth"), 0)
        check(all(n % 2 == 0 for n in ns), "grids.rank_circuit.n", "brickwork sampling needs even n")

        cut = self.grids["cut_verify"]
        ns = int_list("grids.cut_verify.n", cut.get("n"), 2)
        ds = int_list("grids.cut_verify.depth", cut.get("depth"), 0)
        check(isinstance(cut.get("circuits"), int) and cut.get("circuits") >= 1,
              "grids.cut_verify.circuits", "must be a positive integer")
        check(isinstance(cut.get("q"), int) and cut.get("q") >= 2, "grids.cut_verify.q", "must be >= 2")
        check(all(n % 2 == 0 for n in ns), "grids.cut_verify.n", "brickwork sampling needs even n")
        if ns and ds:
            check(min(ns) >= 2 * max(ds) + 2, "grids.cut_verify.n",
                  f"every n must be >= 2 depth + 2 = {2 * max(ds) + 2}")

        corr = self.grids["correlations"]
        ns = int_list("grids.correlations.n", corr.get("n"), 2)
        check(isinstance(corr.get("q"), int) and corr.get("q") >= 2, "grids.correlations.q", "must be >= 2")
        check(isinstance(corr.get("operators"), int) and corr.get("operators") >= 1,
              "grids.correlations.operators", "must be a positive integer")
        locality = corr.get("locality")
        check(isinstance(locality, int) and locality >= 1, "grids.correlations.locality", "must be >= 1")
        if ns and isinstance(locality, int):
            check(min(ns) >= locality + 1, "grids.correlations.n", "every n must exceed the locality")

        tails = self.grids["tails"]
        check(isinstance(tails.get("instances"), int) and tails.get("instances") >= 1,
              "grids.tails.instances", "must be a positive integer")
        check(isinstance(tails.get("max_dim"), int) and tails.get("max_dim") >= 2,
              "grids.tails.max_dim", "must be >= 2")

        int_list("grids.min_depth.log2_n", self.grids["min_depth"].get("log2_n"), 2)
        check(isinstance(self.grids["min_depth"].get("q"), int) and self.grids["min_depth"].get("q") >= 2,
              "grids.min_depth.q", "must be >= 2")

        if errors:
            logger.error("Configuration validation failed:")
            for field, message in errors:
                logger.error(f"  - {field}: {message}")
            field, message = errors[0]
            raise UsageError(field, message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grids": copy.deepcopy(self.grids),
            "eta": self.eta,
            "samples": self.samples,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "depth_model": dict(self.depth_model),
            "output": {"dir": self.output_dir, "format": self.output_format},
            "workers": self.workers,
            "cap_qn_exponent": self.cap_qn_exponent,
        }

    def __repr__(self):
        return f"SweepConfig(seed={self.seed}, eta={self.eta}, workers={self.workers}, out='{self.output_dir}')"
