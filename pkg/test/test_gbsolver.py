import numpy as np
import pytest
from conftest import make_instance

from solver import (
    QUOTIENT_BASIS,
    Y4_BASIS,
    DegenerateInstanceError,
    SolverConfig,
    action_matrix,
    eliminate,
    evaluate_basis,
    evaluate_constraints,
    expand_constraints,
    extract_solutions,
    monomial_vector,
    omega_star,
    reduced_row_echelon,
    self_calibrate,
    solve_calibration,
)
from solver.gbsolver import EXPECTED_SHAPES


@pytest.fixture
def trace(instance):
    return eliminate(expand_constraints(instance.F, instance.tau))


def closest_solution(solutions, instance):
    errors = [
        np.linalg.norm([s.a - instance.a, s.b - instance.b, np.sqrt(s.p) - np.sqrt(instance.p)])
        for s in solutions
    ]
    return solutions[int(np.argmin(errors))], min(errors)


def test_template_shapes(trace):
    assert tuple(trace.shapes) == EXPECTED_SHAPES, f"Template shapes {trace.shapes}"


def test_reduced_matrices_have_identity_blocks(trace):
    for stage in trace.stages:
        m = stage.reduced.shape[0]
        assert np.array_equal(stage.reduced[:, :m], np.eye(m)), f"Stage {stage.index} is not reduced"


def test_reduced_rows_vanish_at_ground_truth(trace, instance):
    for stage in trace.stages:
        y = monomial_vector(stage.basis, instance.a, instance.b, instance.p)
        values = stage.reduced @ y
        scale = np.abs(stage.reduced) @ np.abs(y)
        assert np.all(np.abs(values) <= 1e-7 * scale), (
            f"Stage {stage.index} rows do not vanish at the true calibration: {values / scale}"
        )


def test_division_by_p_is_exact(trace):
    assert trace.divisibility_residual <= 1e-9, (
        f"Rows divided by p had a remainder of {trace.divisibility_residual:.2e}"
    )


def test_groebner_basis_vanishes_at_ground_truth(trace, instance):
    basis = trace.groebner_basis
    assert basis.shape == (6, 20)
    for row in basis:
        value = evaluate_basis(row, Y4_BASIS, instance.a, instance.b, instance.p)
        scale = np.abs(row) @ np.abs(monomial_vector(Y4_BASIS, instance.a, instance.b, instance.p))
        assert abs(value) <= 1e-7 * scale, f"Groebner basis row residual {abs(value) / scale:.2e}"


def test_action_matrix_structure(trace, instance):
    Mp = action_matrix(trace)
    assert Mp.shape == (6, 6)
    assert np.array_equal(Mp[3], [1, 0, 0, 0, 0, 0])
    assert np.array_equal(Mp[4], [0, 1, 0, 0, 0, 0])
    assert np.array_equal(Mp[5], [0, 0, 0, 0, 1, 0])

    m = monomial_vector(QUOTIENT_BASIS, instance.a, instance.b, instance.p)
    assert np.allclose(Mp @ m, instance.p * m, rtol=1e-6, atol=1e-8 * np.linalg.norm(m)), (
        "The true calibration is not an eigenvector of the action matrix"
    )


def test_six_eigenvalues_including_true_p(instance):
    output = solve_calibration(instance.F, instance.tau)
    assert len(output.eigenvalues) == 6
    distance = np.min(np.abs(output.eigenvalues - instance.p)) / instance.p
    assert distance <= 1e-6, f"True p is {distance:.2e} away from every eigenvalue"


def test_recovers_ground_truth(instance):
    solutions = self_calibrate(instance.F, instance.tau)
    assert 1 <= len(solutions) <= 6
    best, error = closest_solution(solutions, instance)
    assert error <= 1e-6 * np.sqrt(instance.p), f"Closest solution off by {error:.2e}"
    assert np.isclose(best.f**2, best.p)
    assert np.allclose(best.K, [[best.f, 0, best.a], [0, best.f, best.b], [0, 0, 1]])


def test_solutions_satisfy_every_constraint(instance):
    for solution in self_calibrate(instance.F, instance.tau):
        G, f4 = evaluate_constraints(instance.F, instance.tau, solution.a, solution.b, solution.p)
        scale = np.linalg.norm(instance.F) ** 3 * np.linalg.norm(omega_star(solution.a, solution.b, solution.p)) ** 2
        assert np.all(np.abs(G) <= 1e-6 * scale), f"Cubic constraint residual {np.max(np.abs(G)):.2e}"
        assert abs(f4) <= 1e-6 * scale, f"Trace constraint residual {abs(f4):.2e}"


def test_solutions_are_feasible_and_sorted(instance):
    solutions = self_calibrate(instance.F, instance.tau)
    ps = [s.p for s in solutions]
    assert all(p > SolverConfig().min_p for p in ps)
    assert ps == sorted(ps, reverse=True)


def test_scale_and_sign_of_f_do_not_matter(instance):
    reference, _ = closest_solution(self_calibrate(instance.F, instance.tau), instance)
    for sigma in (7.5, -0.2):
        scaled, _ = closest_solution(self_calibrate(sigma * instance.F, instance.tau), instance)
        assert np.allclose(
            [scaled.a, scaled.b, scaled.p], [reference.a, reference.b, reference.p], rtol=1e-7
        ), f"Scaling F by {sigma} changed the solution"


def test_extract_solutions_from_known_roots(rng):
    roots = [(0.1, -0.3, 1.2), (0.5, 0.2, 0.7), (-0.4, 0.6, 2.5), (0.3, 0.3, -0.8), (-0.2, -0.5, -1.6), (0.8, -0.1, 0.1)]
    V = np.column_stack([monomial_vector(QUOTIENT_BASIS, *root) for root in roots])
    Mp = V @ np.diag([root[2] for root in roots]) @ np.linalg.inv(V)

    solutions = extract_solutions(Mp)
    expected = sorted((r for r in roots if r[2] > 0), key=lambda r: r[2], reverse=True)
    assert len(solutions) == len(expected)
    for solution, root in zip(solutions, expected):
        assert np.allclose([solution.a, solution.b, solution.p], root, atol=1e-9), (
            f"Recovered {solution} instead of {root}"
        )


def test_reduced_row_echelon_identity_left(rng):
    B = rng.standard_normal((4, 9))
    reduced = reduced_row_echelon(B)
    assert np.array_equal(reduced[:, :4], np.eye(4))
    # same row space
    assert np.allclose(np.linalg.lstsq(reduced.T, B.T, rcond=None)[0].T @ reduced, B)


@pytest.mark.parametrize(
    "B", [np.array([[0.0, 1.0, 2.0], [0.0, 3.0, 4.0]]), np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])]
)
def test_reduced_row_echelon_singular(B):
    with pytest.raises(DegenerateInstanceError):
        reduced_row_echelon(B)


@pytest.mark.slow
def test_random_instances():
    errors = []
    for seed in range(100):
        instance = make_instance(1000 + seed)
        try:
            output = solve_calibration(instance.F, instance.tau)
        except DegenerateInstanceError:
            continue
        if output.solutions:
            errors.append(closest_solution(output.solutions, instance)[1] / np.sqrt(instance.p))
        assert output.trace.divisibility_residual <= 1e-9
    assert len(errors) >= 95, f"Only {len(errors)} of 100 instances were solved"
    assert np.median(errors) <= 1e-9, f"Median error {np.median(errors):.2e}"
