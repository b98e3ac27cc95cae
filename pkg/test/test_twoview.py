import numpy as np
import pytest

from geometry import (
    Correspondences,
    DegenerateConfigurationError,
    denormalize_calibration,
    denormalize_fundamental,
    epipolar_residual,
    epipolar_residuals,
    estimate_fundamental,
    normalize,
    normalize_fundamental,
    solve_fundamental_7pt,
    solve_fundamental_npt,
)
from geometry.twoview import _real_cubic_roots


def sign_free_distance(F, G):
    return min(np.linalg.norm(F - G), np.linalg.norm(F + G))


def normalized_ground_truth(scene):
    S, corrs_n = normalize(scene.corrs)
    S_inv = np.linalg.inv(S)
    return S, corrs_n, normalize_fundamental(S_inv.T @ scene.F @ S_inv)


def test_normalize_example():
    x1 = np.array([[0, 0], [2, 0], [0, 2], [2, 2], [1, 1], [1, 1], [1, 1]], dtype=float)
    x2 = np.array([[0, 0], [2, 0], [0, 2], [2, 2], [1, 1], [1, 1], [1, 1]], dtype=float)
    S, corrs_n = normalize(Correspondences(x1, x2))
    # centroid (1, 1); mean distance 4 sqrt(2) / 7
    gamma = np.sqrt(2.0) / (4.0 * np.sqrt(2.0) / 7.0)
    expected = np.array([[gamma, 0, -gamma], [0, gamma, -gamma], [0, 0, 1]])
    assert np.allclose(S, expected), f"Unexpected normalization {S}"
    pooled = np.vstack([corrs_n.x1, corrs_n.x2])
    assert np.allclose(pooled.mean(axis=0), 0.0, atol=1e-12)


def test_normalized_points_statistics(scene):
    _, corrs_n = normalize(scene.corrs)
    pooled = np.vstack([corrs_n.x1, corrs_n.x2])
    assert np.allclose(pooled.mean(axis=0), 0.0, atol=1e-12)
    assert np.isclose(np.mean(np.linalg.norm(pooled, axis=1)), np.sqrt(2.0), atol=1e-12)


def test_normalize_is_idempotent(scene):
    _, corrs_n = normalize(scene.corrs)
    S2, _ = normalize(corrs_n)
    assert np.allclose(S2, np.eye(3), atol=1e-12), f"Second normalization is not the identity: {S2}"


def test_normalize_coincident_points():
    x = np.ones((8, 2))
    with pytest.raises(DegenerateConfigurationError):
        normalize(Correspondences(x, x))


def test_normalize_too_few_points(scene):
    with pytest.raises(ValueError):
        normalize(scene.corrs.subset(slice(0, 6)))


def test_correspondences_shape_check():
    with pytest.raises(ValueError):
        Correspondences(np.zeros((5, 2)), np.zeros((4, 2)))


def test_seven_point_contains_ground_truth(scene):
    S, corrs_n, F_true = normalized_ground_truth(scene)
    seven = corrs_n.subset(slice(0, 7))
    solutions = solve_fundamental_7pt(seven)
    assert 1 <= len(solutions) <= 3
    for F in solutions:
        assert np.all(epipolar_residuals(F, seven) <= 1e-9), "Root does not fit the 7 points"
        assert abs(np.linalg.det(F)) <= 1e-9, "Root is not rank 2"
    distance = min(sign_free_distance(F, F_true) for F in solutions)
    assert distance <= 1e-8, f"No 7-point root within {distance:.2e} of the true F"


def test_linear_estimate_matches_ground_truth(scene):
    _, corrs_n, F_true = normalized_ground_truth(scene)
    F = solve_fundamental_npt(corrs_n)
    assert sign_free_distance(F, F_true) <= 1e-8
    assert np.linalg.matrix_rank(F, tol=1e-10) == 2


def test_estimate_fundamental_dispatch(scene):
    _, corrs_n, _ = normalized_ground_truth(scene)
    assert len(estimate_fundamental(corrs_n)) == 1
    assert 1 <= len(estimate_fundamental(corrs_n.subset(slice(0, 7)))) <= 3


def test_duplicated_point_gives_same_estimate(scene):
    _, corrs_n, _ = normalized_ground_truth(scene)
    F = solve_fundamental_npt(corrs_n)
    duplicated = Correspondences(
        np.vstack([corrs_n.x1, corrs_n.x1[:1]]), np.vstack([corrs_n.x2, corrs_n.x2[:1]])
    )
    assert np.allclose(solve_fundamental_npt(duplicated), F, atol=1e-8)


def test_repeated_correspondence_is_degenerate():
    x1 = np.tile([[0.3, -0.2]], (9, 1))
    x2 = np.tile([[0.1, 0.4]], (9, 1))
    with pytest.raises(DegenerateConfigurationError):
        solve_fundamental_npt(Correspondences(x1, x2))


def test_epipolar_residual_direct():
    F = np.arange(9, dtype=float).reshape(3, 3)
    q = np.array([1.0, 2.0, 1.0])
    q_prime = np.array([-1.0, 0.5, 1.0])
    assert np.isclose(epipolar_residual(F, q, q_prime), abs(q_prime @ F @ q))
    corrs = Correspondences(q[None, :2], q_prime[None, :2])
    assert np.allclose(epipolar_residuals(F, corrs), [abs(q_prime @ F @ q)])


def test_noise_free_residuals_are_small(scene):
    F = normalize_fundamental(scene.F)
    scale = np.linalg.norm(scene.corrs.q, axis=1) * np.linalg.norm(scene.corrs.q_prime, axis=1)
    assert np.all(epipolar_residuals(F, scene.corrs) <= 1e-12 * scale)


def test_denormalization_consistency(scene):
    S, corrs_n = normalize(scene.corrs)
    F = denormalize_fundamental(solve_fundamental_npt(corrs_n), S)
    assert sign_free_distance(F, normalize_fundamental(scene.F)) <= 1e-6

    K_n = S @ scene.K
    assert np.allclose(denormalize_calibration(K_n, S), scene.K, rtol=1e-12, atol=1e-9)


@pytest.mark.parametrize(
    "roots", [(1.0, 2.0, -3.0), (0.5, 0.5001, 4.0), (-2.0, 7.0, 0.25)]
)
def test_cubic_three_real_roots(roots):
    coeffs = np.poly(roots)
    assert np.allclose(_real_cubic_roots(coeffs), sorted(roots), atol=1e-9)


def test_cubic_one_real_root():
    coeffs = np.polymul([1.0, -2.0], [1.0, 0.0, 1.0])  # (x - 2)(x^2 + 1)
    assert np.allclose(_real_cubic_roots(2.5 * coeffs), [2.0], atol=1e-12)
