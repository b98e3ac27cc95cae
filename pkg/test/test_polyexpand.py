import numpy as np
import pytest

from solver import (
    Y0_BASIS,
    DegenerateInstanceError,
    Poly3,
    constraint_polynomials,
    evaluate_constraints,
    expand_constraints,
    monomial_vector,
    omega_star,
    omega_star_symbolic,
)


def random_fundamental(rng) -> np.ndarray:
    U, _, Vt = np.linalg.svd(rng.standard_normal((3, 3)))
    return U @ np.diag([1.0, rng.uniform(0.2, 1.0), 0.0]) @ Vt


def test_poly3_arithmetic():
    a = Poly3.variable("a")
    p = Poly3.variable("p")
    product = (a + 1.0) * (a - 1.0)
    assert product.terms == {(2, 0, 0): 1.0, (0, 0, 0): -1.0}, f"Unexpected terms {product.terms}"
    assert (a * p).degree == 2
    assert (2.0 * p - p - p).terms == {}, "Exact cancellation must leave no terms"
    assert np.isclose((a * a * p + 3.0).evaluate(2.0, 5.0, 0.5), 5.0)


def test_omega_star_symbolic_matches_k_kt():
    f, a, b = 800.0, 310.0, -45.0
    K = np.array([[f, 0.0, a], [0.0, f, b], [0.0, 0.0, 1.0]])
    symbolic = omega_star_symbolic()
    values = np.array([[entry.evaluate(a, b, f * f) for entry in row] for row in symbolic])
    assert np.allclose(values, K @ K.T, rtol=1e-12), f"Symbolic w* differs from K K^T:\n{values}"
    assert np.allclose(omega_star(a, b, f * f), K @ K.T, rtol=1e-12)
    assert max(entry.degree for row in symbolic for entry in row) == 2


def test_basis_is_unique():
    assert len(Y0_BASIS) == 22
    assert len(set(Y0_BASIS)) == 22, "Duplicate monomials in the constraint basis"


@pytest.mark.parametrize("seed", range(5))
def test_expansion_matches_direct_evaluation(seed):
    rng = np.random.default_rng(seed)
    F = random_fundamental(rng)
    tau = rng.uniform(-1.0, 3.0)
    system = expand_constraints(F, tau)
    assert system.B0.shape == (4, 22), f"B0 has shape {system.B0.shape}"

    for _ in range(3):
        a, b = rng.uniform(-1.0, 1.0, 2)
        p = rng.uniform(0.1, 2.0)
        G, f4 = evaluate_constraints(F, tau, a, b, p)
        expected = np.array([G[0, 0], G[1, 1], G[2, 2], f4])
        residuals = system.residuals(a, b, p)
        scale = max(np.max(np.abs(expected)), 1.0)
        assert np.allclose(residuals, expected, atol=1e-10 * scale), (
            f"Expanded polynomials {residuals} differ from direct evaluation {expected}"
        )
        for i in range(3):
            for j in range(3):
                assert abs(system.G[i][j].evaluate(a, b, p) - G[i, j]) <= 1e-10 * scale


def test_constraints_vanish_at_ground_truth(instance):
    system = expand_constraints(instance.F, instance.tau)
    y = monomial_vector(Y0_BASIS, instance.a, instance.b, instance.p)
    residuals = system.residuals(instance.a, instance.b, instance.p)
    scale = np.abs(system.B0) @ np.abs(y)
    assert np.all(np.abs(residuals) <= 1e-9 * scale), (
        f"Constraints do not vanish at the true calibration: {residuals / scale}"
    )


def test_cubic_constraint_annihilates_epipoles(rng):
    F = random_fundamental(rng)
    e = np.linalg.svd(F)[2][-1]
    e_prime = np.linalg.svd(F.T)[2][-1]
    G, _ = evaluate_constraints(F, 1.5, 0.3, -0.2, 0.8)
    assert np.linalg.norm(G @ e) <= 1e-9 * np.linalg.norm(G)
    assert np.linalg.norm(e_prime @ G) <= 1e-9 * np.linalg.norm(G)


def test_scale_covariance(rng):
    F = random_fundamental(rng)
    sigma = 3.7
    B = expand_constraints(F, 2.0).B0
    B_scaled = expand_constraints(sigma * F, 2.0).B0
    assert np.allclose(B_scaled[:3], sigma**3 * B[:3], rtol=1e-10, atol=1e-12)
    assert np.allclose(B_scaled[3], sigma**2 * B[3], rtol=1e-10, atol=1e-12)


def test_trace_constraint_coefficients_have_expected_degree(rng):
    _, f4 = constraint_polynomials(random_fundamental(rng), 1.0)
    assert f4.degree <= 4
    assert all(i + j + 2 * k <= 4 for i, j, k in f4.terms), "f4 has terms above weight 4"


def test_zero_fundamental_matrix_is_degenerate():
    with pytest.raises(DegenerateInstanceError):
        expand_constraints(np.zeros((3, 3)), 2.0)


@pytest.mark.parametrize("tau", [-1.5, 3.5])
def test_trace_outside_range(tau, rng):
    with pytest.raises(ValueError):
        expand_constraints(random_fundamental(rng), tau)


def test_wrong_shape(rng):
    with pytest.raises(ValueError):
        expand_constraints(rng.standard_normal((3, 4)), 2.0)
