import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xDECADE)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-abs difference after removing one global phase."""
    inner = np.trace(b.conj().T @ a)
    if abs(inner) < 1e-12:
        return float(np.max(np.abs(a - b)))
    return float(np.max(np.abs(a * (abs(inner) / inner) - b)))
