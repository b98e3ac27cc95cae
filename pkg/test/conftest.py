from dataclasses import dataclass

import numpy as np
import pytest

from data import SceneConfig, generate_scene
from geometry import normalize, normalize_fundamental


@dataclass
class SolverInstance:
    """An exact (F, tau) instance in normalized coordinates with its true (a, b, p)."""

    F: np.ndarray
    tau: float
    a: float
    b: float
    p: float
    S: np.ndarray


def make_instance(seed: int, n_points: int = 20) -> SolverInstance:
    scene = generate_scene(SceneConfig(n_points=n_points), np.random.default_rng(seed))
    S, _ = normalize(scene.corrs)
    S_inv = np.linalg.inv(S)
    F = normalize_fundamental(S_inv.T @ scene.F @ S_inv)
    K = S @ scene.K
    return SolverInstance(F=F, tau=scene.tau, a=K[0, 2], b=K[1, 2], p=K[0, 0] ** 2, S=S)


@pytest.fixture
def scene():
    return generate_scene(SceneConfig(), np.random.default_rng(7))


@pytest.fixture
def instance():
    return make_instance(11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
