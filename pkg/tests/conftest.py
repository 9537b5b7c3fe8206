# tests/conftest.py

import os

import numpy as np
import pytest
import yaml

from translation_lre.config import SweepConfig

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SMALL_GRIDS = {
    "necklace": {"n": [1, 2, 3, 4, 5], "q": [2, 3]},
    "sectors": {"n_by_q": {2: [1, 2, 3, 4], 3: [1, 2, 3]}},
    "bounds": {"n": [8, 9, 10, 16], "d": [1, 2, 3], "q": [2]},
    "rank_mps": {"n": [3, 4], "q": [2], "d_bond": [1, 2]},
    "rank_circuit": {"n": [6], "q": [2], "depth": [0, 1]},
    "cut_verify": {"n": [6, 8], "q": 2, "depth": [1], "circuits": 2},
    "correlations": {"n": [4, 5], "q": 2, "operators": 6, "locality": 2},
    "tails": {"instances": 6, "max_dim": 8},
    "min_depth": {"log2_n": [8, 10, 12, 14, 16], "q": 2},
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_config(tmp_path):
    """Writes a YAML config under tmp_path and returns its path."""
    def _write(data, name="sweep.yaml"):
        path = tmp_path / name
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(data, f)
        return str(path)
    return _write


@pytest.fixture
def small_config(tmp_path, write_config, monkeypatch):
    for variable in ("TILRE_SEED", "TILRE_WORKERS", "TILRE_OUT_DIR", "TILRE_CAP_QN"):
        monkeypatch.delenv(variable, raising=False)
    path = write_config({
        "grids": SMALL_GRIDS,
        "seed": 7,
        "output": {"dir": str(tmp_path / "reports"), "format": "both"},
        "cap_qn_exponent": 16,
    })
    return SweepConfig(path)
