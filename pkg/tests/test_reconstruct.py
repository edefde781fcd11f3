import math
import statistics

import numpy as np
import pytest

from framerecon.frames import INTEGER, JITTERED, IndexSet, make_frame
from framerecon.reconstruct import (
    SolverOptions,
    error_metrics,
    evaluate_expansion,
    reconstruct,
    uniform_grid,
)
from framerecon.sampling import coef_vector, expansion_target, frame_coefficients, test_function as sample_function

SEEDS = (1, 2, 3, 4, 5)


def run(method, name="gaussian", n=16, m=22, seed=1, delta=0.25, **options):
    frame = make_frame(JITTERED, m, delta=delta, seed=seed)
    return reconstruct(method, sample_function(name), frame, n, m, SolverOptions(**options))


def seed_median(method, field, **kwargs):
    return statistics.median(getattr(run(method, seed=seed, **kwargs), field) for seed in SEEDS)


def test_fourier_partial_sum_matches_table_scale():
    result = run("fourier")
    assert result.m == 16
    assert result.condition_number == 1.0
    assert result.iterations == 0
    assert result.coefficients.values.size == 33
    assert result.coefficients.frame_id == "integer-fourier"
    assert 1.4e-3 / 2 <= result.l2_error <= 1.4e-3 * 2


def test_fourier_partial_sum_bump6():
    result = run("fourier", name="bump6")
    assert 2.1e-5 / 2 <= result.l2_error <= 2.1e-5 * 2


def test_new_method_matches_fourier_accuracy():
    median_error = seed_median("new", "l2_error")
    assert 1.4e-3 / 3 <= median_error <= 1.4e-3 * 3
    fourier = run("fourier").l2_error
    for seed in SEEDS:
        ratio = run("new", seed=seed).l2_error / fourier
        assert 0.5 <= ratio <= 5.0


def test_new_method_iterations_and_diagnostics():
    result = run("new")
    assert result.converged
    assert result.status == "converged"
    assert result.relative_residual <= 1e-5
    assert result.m == 22
    assert result.seed == 1
    assert result.coefficients.values.size == 33
    assert result.error_iterations is None or result.error_iterations >= 1
    assert result.ls_deviation <= 1e-7
    assert result.wall_time_ms == pytest.approx(1000.0 * result.wall_time)
    assert 8 <= seed_median("new", "iterations") <= 25


def test_conditioning_separates_new_method_from_cc():
    new = [run("new", seed=seed) for seed in SEEDS]
    cc = [run("cc", seed=seed) for seed in SEEDS]
    for a, b in zip(new, cc):
        assert a.condition_number < b.condition_number
    assert 2.0 <= statistics.median(r.condition_number for r in new) <= 12.0
    assert 10.0 <= statistics.median(r.condition_number for r in cc) <= 60.0
    assert statistics.median(r.iterations for r in new) < statistics.median(r.iterations for r in cc)


def test_cc_expansion_uses_sampling_frame():
    result = run("cc")
    assert result.frame_id == "jittered-fourier(delta=0.25,seed=1)"
    assert result.coefficients.index_set == IndexSet(16)
    assert result.converged
    assert math.isfinite(result.l2_error)


@pytest.mark.parametrize("name", ["gaussian", "cospoly", "bump6"])
def test_zero_jitter_reduces_to_fourier_coefficients(name):
    fourier = run("fourier", name=name, m=16)
    for method in ("new", "cc", "finite-section"):
        result = run(method, name=name, m=16, delta=0.0)
        assert np.allclose(result.coefficients.values, fourier.coefficients.values, atol=1e-12)


@pytest.mark.parametrize("seed", SEEDS)
def test_new_method_is_exact_on_the_subspace(seed):
    basis = make_frame(INTEGER, 16)
    rng = np.random.default_rng(9 + seed)
    coefficients = coef_vector(IndexSet(16), rng.normal(size=33) + 1j * rng.normal(size=33), basis.frame_id)
    target = expansion_target(coefficients, basis, "span")
    frame = make_frame(JITTERED, 22, seed=seed)
    result = reconstruct("new", target, frame, 16, 22)
    assert result.converged
    assert result.l2_error <= 1e-9
    assert np.allclose(result.coefficients.values, coefficients.values, atol=1e-10)


def test_new_method_error_decreases_with_n():
    errors = [run("new", n=n, m=math.ceil(1.4 * n)).l2_error for n in (16, 32, 64)]
    assert errors[0] >= errors[1] >= errors[2]


def test_bump6_high_smoothness_rate():
    coarse = run("new", name="bump6", n=16, m=23).l2_error
    fine = run("new", name="bump6", n=32, m=45).l2_error
    assert fine / coarse <= 0.2


def test_iterations_follow_tolerance_but_coefficients_do_not():
    loose = run("new", seed=3)
    tight = run("new", seed=3, tol=1e-10)
    assert loose.iterations < tight.iterations
    assert loose.relative_residual <= 1e-5
    assert np.allclose(loose.coefficients.values, tight.coefficients.values, atol=1e-10)
    assert loose.l2_error == pytest.approx(tight.l2_error, rel=1e-6)


@pytest.mark.parametrize("method", ["new", "cc"])
def test_cg_matches_direct_least_squares(method):
    for seed in SEEDS:
        iterative = run(method, m=23, seed=seed)
        direct = run(method, m=23, seed=seed, solver="direct")
        assert iterative.ls_deviation <= 1e-7
        gap = np.linalg.norm(iterative.coefficients.values - direct.coefficients.values)
        assert gap <= 1e-7 * np.linalg.norm(direct.coefficients.values)


def test_finite_section_against_new_method():
    reference = run("new", seed=7).l2_error
    result = run("finite-section", m=120, seed=7)
    assert result.method == "finite-section"
    assert result.iterations == 0
    assert result.condition_number >= 1.0
    assert reference / 10 <= result.l2_error <= reference * 10


def test_finite_section_override_widens_operator_rows():
    plain = run("finite-section", seed=7)
    wider = run("finite-section", seed=7, section_m=40)
    assert wider.m == 22
    assert wider.l2_error < 1e-1
    assert not np.allclose(plain.coefficients.values, wider.coefficients.values)
    with pytest.raises(ValueError, match="below n"):
        run("finite-section", seed=7, section_m=8)


def test_direct_solver_reports_no_iterations():
    result = run("new", solver="direct")
    assert result.iterations == 0
    assert result.ls_deviation == 0.0
    iterative = run("new")
    assert np.allclose(result.coefficients.values, iterative.coefficients.values, atol=1e-9)


def test_richardson_needs_at_least_as_many_iterations_as_cg():
    richardson = run("new", solver="richardson")
    cg = run("new")
    assert richardson.converged
    assert richardson.iterations >= cg.iterations
    assert richardson.l2_error == pytest.approx(cg.l2_error, rel=0.2)


def test_reconstruct_rejects_bad_arguments():
    frame = make_frame(JITTERED, 22, seed=1)
    f = sample_function("gaussian")
    with pytest.raises(ValueError, match="Unknown method"):
        reconstruct("spectral", f, frame, 16, 22)
    with pytest.raises(ValueError, match="m >= n"):
        reconstruct("new", f, frame, 16, 8)
    with pytest.raises(ValueError, match="Unknown solver"):
        SolverOptions(solver="gmres")


def test_evaluate_expansion_constant_and_frame_check():
    basis = make_frame(INTEGER, 4)
    constant = coef_vector(IndexSet(0), [1.0], basis.frame_id)
    assert np.allclose(evaluate_expansion(constant, basis, uniform_grid(17)), 1.0)
    with pytest.raises(ValueError, match="belong to"):
        evaluate_expansion(constant, make_frame(JITTERED, 4, seed=1), [0.0])


def test_evaluate_expansion_linearity():
    frame = make_frame(JITTERED, 8, seed=2)
    rng = np.random.default_rng(10)
    a = coef_vector(IndexSet(8), rng.normal(size=17) + 1j * rng.normal(size=17), frame.frame_id)
    b = coef_vector(IndexSet(8), rng.normal(size=17) + 1j * rng.normal(size=17), frame.frame_id)
    both = coef_vector(IndexSet(8), a.values + b.values, frame.frame_id)
    grid = uniform_grid(33)
    total = evaluate_expansion(a, frame, grid) + evaluate_expansion(b, frame, grid)
    assert np.allclose(evaluate_expansion(both, frame, grid), total, atol=1e-13)


def test_fourier_expansion_pointwise_at_center():
    result = run("fourier", n=64, m=64)
    basis = make_frame(INTEGER, 64)
    value = evaluate_expansion(result.coefficients, basis, [0.0])[0]
    assert abs(value - 1.0) <= 2.6e-4 * 10


def test_error_metrics_on_span_element_and_grid():
    basis = make_frame(INTEGER, 6)
    coefficients = coef_vector(IndexSet(6), np.linspace(-1.0, 1.0, 13), basis.frame_id)
    target = expansion_target(coefficients, basis, "span")
    exact = frame_coefficients(target, basis)
    metrics = error_metrics(target, exact, basis)
    assert metrics.l2_error <= 1e-10
    assert metrics.grid.size == 1024
    assert metrics.max_pointwise == pytest.approx(metrics.pointwise.max())

    f = sample_function("gaussian")
    coarse = frame_coefficients(f, basis)
    metrics = error_metrics(f, coarse, basis, grid=np.linspace(-0.5, 0.5, 11))
    assert metrics.l2_error > 0.0
    assert np.all(metrics.pointwise <= metrics.max_pointwise)
    with pytest.raises(ValueError, match="lie in"):
        error_metrics(f, coarse, basis, grid=[0.0, 1.5])
