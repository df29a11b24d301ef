import sys
from pathlib import Path

# Add project root to path so the flat modules import
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
import pytest

from config import Config

ENV_KEYS = (
    "MKREIN_QUAD_TOL", "MKREIN_MAX_EVALS", "MKREIN_TAIL_LENGTH", "MKREIN_LINE_DELTA",
    "MKREIN_SEED", "MKREIN_THREADS", "MKREIN_MC_SAMPLES", "MKREIN_REFERENCE_ATOMS",
    "OUTPUT_DIR", "LOG_LEVEL", "LOG_FILE",
)

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running convergence experiments")

@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)

@pytest.fixture
def rng():
    return np.random.default_rng(12345)

@pytest.fixture
def config(tmp_path):
    return Config(threads=2, mc_samples=20000, output_dir=str(tmp_path / "output"))

def assert_complex_close(actual: complex, expected: complex, atol: float):
    gap = abs(complex(actual) - complex(expected))
    if gap > atol:
        raise AssertionError(f"|{actual} - {expected}| = {gap:.3e} exceeds {atol:.1e}")
