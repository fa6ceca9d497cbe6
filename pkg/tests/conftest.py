# tests/conftest.py
import math
import os

import numpy as np
import pytest

from csaforge.config import get_settings
from csaforge.formulas import clear_formula_cache


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Run every test on default settings and empty caches."""
    for key in list(os.environ):
        if key.startswith("CSA_FORGE_"):
            monkeypatch.delenv(key)
    get_settings.cache_clear()
    clear_formula_cache()
    yield
    get_settings.cache_clear()
    clear_formula_cache()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def random_qubit(rng: np.random.Generator) -> tuple[complex, complex]:
    """A normalized random single-qubit state ``(alpha, beta)``."""
    alpha = complex(rng.normal(), rng.normal())
    beta = complex(rng.normal(), rng.normal())
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return alpha / norm, beta / norm


def cat(alpha: complex, beta: complex, k: int) -> list[complex]:
    """``alpha |0..0> + beta |1..1>`` over ``k`` qubits."""
    amps = [0j] * (1 << k)
    amps[0] = alpha
    amps[-1] = beta
    return amps
