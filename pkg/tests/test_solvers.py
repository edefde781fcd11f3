import numpy as np
import pytest

from framerecon.frames import INTEGER, JITTERED, CrossGram, FrameFamily, IndexSet, _readonly, gram, make_frame
from framerecon.operators import LinearMap, assemble_W, moment_rhs
from framerecon.sampling import coef_vector, frame_coefficients, test_function as sample_function
from framerecon.solvers import (
    FrameBounds,
    SingularSystemError,
    cg_solve,
    condition_number,
    direct_ls,
    estimate_frame_bounds,
    richardson_solve,
)


def matrix_map(matrix):
    matrix = np.asarray(matrix, dtype=np.complex128)
    half_width = (matrix.shape[0] - 1) // 2
    return LinearMap("W", IndexSet(half_width), "integer-fourier", _readonly(matrix))


def rhs_vector(values):
    values = np.asarray(values, dtype=np.complex128)
    return coef_vector(IndexSet((values.size - 1) // 2), values, "integer-fourier")


def spd_map(size=31, low=1.0, high=4.0, seed=0):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    matrix = q @ np.diag(np.linspace(low, high, size)) @ q.conj().T
    return matrix_map(0.5 * (matrix + matrix.conj().T))


def gaussian_system(seed=7, n=16, m=22):
    frame = make_frame(JITTERED, m, seed=seed)
    basis = make_frame(INTEGER, n)
    omega = gram(frame, basis, IndexSet(m), IndexSet(n))
    f_hat = frame_coefficients(sample_function("gaussian"), frame, IndexSet(m))
    w_map = assemble_W(omega, gram(basis, basis))
    return frame, omega, f_hat, w_map, moment_rhs(omega, f_hat)


def test_cg_identity_converges_in_one_step():
    rhs = rhs_vector([1.0, -2.0, 0.5])
    report = cg_solve(matrix_map(np.eye(3)), rhs)
    assert report.converged
    assert report.status == "converged"
    assert report.iterations == 1
    assert np.allclose(report.solution.values, rhs.values)


def test_cg_two_distinct_eigenvalues_terminate_in_two_steps():
    report = cg_solve(matrix_map(np.diag([1.0, 4.0, 1.0])), rhs_vector([1.0, 1.0, 1.0]), tol=1e-12)
    assert report.converged
    assert report.iterations <= 2
    assert np.allclose(report.solution.values, [1.0, 0.25, 1.0], atol=1e-12)


def test_cg_terminates_within_dimension_and_energy_error_decreases():
    linear_map = spd_map()
    rhs = rhs_vector(np.random.default_rng(5).normal(size=31))
    exact = np.linalg.solve(linear_map.matrix, rhs.values)
    energies = []

    def record(x):
        error = x - exact
        energies.append(np.vdot(error, linear_map.matrix @ error).real)

    report = cg_solve(linear_map, rhs, tol=1e-10, max_iter=31, callback=record)
    assert report.converged
    assert report.final_relative_residual <= 1e-10
    assert len(energies) == report.iterations == len(report.residual_history)
    assert all(later <= earlier * (1 + 1e-9) + 1e-20 for earlier, later in zip(energies, energies[1:]))
    assert np.allclose(report.solution.values, exact, atol=1e-8)


def test_cg_reports_max_iter_with_best_iterate():
    linear_map = spd_map()
    rhs = rhs_vector(np.ones(31))
    report = cg_solve(linear_map, rhs, tol=1e-14, max_iter=2)
    assert not report.converged
    assert report.status == "max_iter"
    assert report.iterations == 2
    assert report.final_relative_residual == min(report.residual_history)


def test_cg_breakdown_is_stagnation():
    report = cg_solve(matrix_map(np.zeros((3, 3))), rhs_vector([1.0, 0.0, 0.0]))
    assert report.status == "stagnation"
    assert not report.converged
    assert report.iterations == 0


def test_cg_zero_rhs_and_bad_controls():
    report = cg_solve(matrix_map(np.eye(3)), rhs_vector(np.zeros(3)))
    assert report.converged and report.iterations == 0
    with pytest.raises(ValueError, match="Tolerance"):
        cg_solve(matrix_map(np.eye(3)), rhs_vector(np.ones(3)), tol=0.0)
    with pytest.raises(ValueError, match="does not match"):
        cg_solve(matrix_map(np.eye(5)), rhs_vector(np.ones(3)))


def test_richardson_identity_is_exact_in_one_step():
    rhs = rhs_vector([2.0, 1.0, -1.0])
    report = richardson_solve(matrix_map(np.eye(3)), rhs, FrameBounds(1.0, 1.0), halve_lower=False)
    assert report.converged
    assert report.iterations == 1
    assert np.allclose(report.solution.values, rhs.values)


def test_richardson_contraction_matches_frame_bound_rate():
    matrix = np.diag([1.0, 3.0, 1.0])
    rhs = rhs_vector([1.0, 1.0, 2.0])
    exact = np.array([1.0, 1.0 / 3.0, 2.0])
    errors = [np.linalg.norm(exact)]
    bounds = FrameBounds(2.0, 3.0)
    rate = (bounds.B - bounds.A / 2) / (bounds.A / 2 + bounds.B)
    assert rate == pytest.approx(0.5)

    richardson_solve(
        matrix_map(matrix), rhs, bounds, tol=1e-300, max_iter=20,
        callback=lambda x: errors.append(np.linalg.norm(x - exact)),
    )
    assert len(errors) == 21
    for earlier, later in zip(errors, errors[1:]):
        assert later <= (rate + 1e-6) * earlier


def test_richardson_detects_divergence():
    report = richardson_solve(matrix_map(np.diag([1.0, 3.0, 1.0])), rhs_vector(np.ones(3)), FrameBounds(0.1, 0.2))
    assert report.status == "diverged"
    assert not report.converged
    assert report.iterations == 10


def test_frame_bounds_validation():
    with pytest.raises(ValueError):
        FrameBounds(2.0, 1.0)
    with pytest.raises(ValueError):
        FrameBounds(0.0, 1.0)
    with pytest.raises(ValueError, match="bound method"):
        FrameBounds(1.0, 2.0, method="guess")


def test_direct_ls_zero_jitter_returns_data():
    frame = make_frame(JITTERED, 8, delta=0.0, seed=1)
    basis = make_frame(INTEGER, 8)
    f_hat = frame_coefficients(sample_function("cospoly"), frame)
    coefficients = direct_ls(gram(frame, basis), f_hat)
    assert coefficients.frame_id == "integer-fourier"
    assert np.allclose(coefficients.values, f_hat.values, atol=1e-12)


def test_direct_ls_matches_cg():
    _, omega, f_hat, w_map, rhs = gaussian_system()
    reference = direct_ls(omega, f_hat).values
    report = cg_solve(w_map, rhs, tol=1e-12)
    assert report.converged
    assert np.linalg.norm(report.solution.values - reference) <= 1e-8 * np.linalg.norm(reference)


def test_common_rescaling_leaves_solutions_unchanged():
    _, omega, f_hat, w_map, rhs = gaussian_system()
    scaled_omega = CrossGram(
        omega.rows, omega.cols, _readonly(4.0 * omega.entries), omega.row_frame_id, omega.col_frame_id
    )
    scaled_f_hat = coef_vector(f_hat.index_set, 4.0 * f_hat.values, f_hat.frame_id)
    basis = make_frame(INTEGER, 16)
    scaled_map = assemble_W(scaled_omega, gram(basis, basis))
    scaled_rhs = moment_rhs(scaled_omega, scaled_f_hat)

    plain = cg_solve(w_map, rhs, tol=1e-12).solution.values
    scaled = cg_solve(scaled_map, scaled_rhs, tol=1e-12).solution.values
    assert np.allclose(scaled, plain, atol=1e-12)
    assert np.allclose(direct_ls(scaled_omega, scaled_f_hat).values, direct_ls(omega, f_hat).values, atol=1e-12)


def test_restriction_identity_on_w_system():
    _, omega, _, w_map, _ = gaussian_system()
    a = np.random.default_rng(6).normal(size=33) + 0j
    report = cg_solve(w_map, rhs_vector(w_map.matrix @ a), tol=1e-12)
    assert np.allclose(report.solution.values, a, atol=1e-9)


def test_direct_ls_unchanged_by_duplicated_consistent_rows():
    frame = make_frame(JITTERED, 10, seed=3)
    basis = make_frame(INTEGER, 4)
    a = np.random.default_rng(7).normal(size=9) + 1j * np.random.default_rng(8).normal(size=9)

    duplicated = np.concatenate([frame.frequencies, frame.frequencies, frame.frequencies[:1]])
    wide = FrameFamily(JITTERED, IndexSet(21), _readonly(duplicated), 0.25, 3)
    for sampling in (frame, wide):
        omega = gram(sampling, basis, cols=IndexSet(4))
        data = coef_vector(sampling.index_set, omega.analysis_matrix() @ a, sampling.frame_id)
        assert np.allclose(direct_ls(omega, data).values, a, atol=1e-10)


def test_direct_ls_reports_rank():
    frame = make_frame(JITTERED, 2, seed=1)
    basis = make_frame(INTEGER, 8)
    f_hat = frame_coefficients(sample_function("gaussian"), frame)
    with pytest.raises(SingularSystemError, match="numerical rank 5 of 17"):
        direct_ls(gram(frame, basis), f_hat)


def test_integer_frame_bounds_are_one():
    bounds = estimate_frame_bounds(make_frame(INTEGER, 8), 8)
    assert bounds.A == pytest.approx(1.0, abs=1e-10)
    assert bounds.B == pytest.approx(1.0, abs=1e-10)
    assert bounds.method == "eigen-numeric"


def test_jittered_frame_bounds_envelope():
    bounds = estimate_frame_bounds(make_frame(JITTERED, 512, seed=7), 512)
    assert 0.0 < bounds.A <= 1.0 <= bounds.B <= 4.0


def test_frame_bounds_shrink_with_wider_probe():
    frame = make_frame(JITTERED, 256, seed=7)
    narrow = estimate_frame_bounds(frame, 64)
    wide = estimate_frame_bounds(frame, 128)
    assert wide.A <= narrow.A + 1e-8
    assert wide.B >= narrow.B - 1e-8


def test_frame_bounds_probe_checks():
    frame = make_frame(JITTERED, 16, seed=1)
    with pytest.raises(ValueError, match=">= 8"):
        estimate_frame_bounds(frame, 4)
    with pytest.raises(ValueError, match="max n"):
        estimate_frame_bounds(frame, 32, max_n=16)


def test_condition_number():
    assert condition_number(matrix_map(np.eye(3))) == pytest.approx(1.0)
    assert condition_number(matrix_map(np.diag([1.0, 4.0, 1.0]))) == pytest.approx(4.0)
    assert condition_number(matrix_map(np.diag([1.0, 0.0, 1.0]))) > 1e15
