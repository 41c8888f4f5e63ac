import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualframes.banks import load_bank
from dualframes.refinable import (
    EXP_LIMIT,
    CertifiedValue,
    Generator,
    RefinableRangeError,
    RefinableSpec,
    constant_generator,
    eval_generator,
    eval_truncated,
    generator_set,
    nonstationary_phi_layer,
    nonstationary_psi_layer,
    sample_grid,
    verify_refinement,
)

from conftest import P


EPS = np.finfo(float).eps


def haar_phi(xi):
    # (1 - exp(-i xi)) / (i xi) without cancellation near 0
    xi = np.asarray(xi, dtype=float)
    return np.exp(-0.5j * xi) * np.sinc(xi / (2 * np.pi))


@pytest.fixture(scope="module")
def spec(haar):
    return RefinableSpec.stationary(haar.a, haar.d, 30)


def test_value_at_origin_is_exact(haar):
    for m in (1, 5, 30):
        v, b = eval_truncated(RefinableSpec.stationary(haar.a, 2, m), 0.0)
        assert v == 1 and b == 0


def test_closed_form_points(spec):
    v, b = eval_truncated(spec, 2 * np.pi)
    assert abs(v) < 1e-8 and b < 1e-6
    v, _ = eval_truncated(spec, np.pi)
    assert abs(v - (-2j / np.pi)) < 1e-8
    assert abs(v) == pytest.approx(0.63662, abs=1e-5)


def test_certified_value_unpacks(spec):
    cv = eval_truncated(spec, 1.0)
    assert isinstance(cv, CertifiedValue)
    value, bound = cv
    assert value == cv.value and bound == cv.tail_bound


def test_constants(spec):
    assert spec.constant() == pytest.approx(1.0)
    assert spec.tail(20) == pytest.approx(2.0 ** -20)


def test_normalization_required():
    with pytest.raises(ValueError):
        RefinableSpec.stationary(P({0: 1, 1: 1}), 2)


def test_overflow_range_is_an_error(spec):
    limit = EXP_LIMIT / spec.constant()
    eval_truncated(spec, limit * 0.99)
    with pytest.raises(RefinableRangeError):
        eval_truncated(spec, limit * 1.01)
    with pytest.raises(RefinableRangeError):
        eval_truncated(spec, np.array([0.0, -2 * limit]))


# generators


def test_unit_multiplier_gives_phi(haar, haar_gens, spec):
    xi = np.linspace(-10, 10, 41)
    assert len(haar_gens.phi) == 1
    np.testing.assert_array_equal(eval_generator(haar_gens.phi[0], xi).value, eval_truncated(spec, xi).value)


def test_haar_psi_values(haar_gens):
    psi = haar_gens.psi[0]
    assert eval_generator(psi, 0.0).value == 0
    v, b = eval_generator(psi, 2 * np.pi)
    assert abs(v - (-2j / np.pi)) < 1e-8
    assert b >= 0


def test_generator_bound_covers_closed_form(haar):
    gen = Generator(haar.b[0], RefinableSpec.stationary(haar.a, 2, 8), 2)
    xi = np.linspace(-6 * np.pi, 6 * np.pi, 301)
    v, b = eval_generator(gen, xi)
    exact = haar.b[0].evaluate(xi / 2) * haar_phi(xi / 2)
    assert np.all(np.abs(v - exact) <= b)


def test_generator_set_shapes():
    gens = generator_set(load_bank("bspline_tight"))
    assert len(gens.phi) == len(gens.phi_tilde) == 1
    assert len(gens.psi) == len(gens.psi_tilde) == 2


def test_function_generators():
    g = constant_generator(2.0)
    np.testing.assert_array_equal(eval_generator(g, np.zeros(3)).value, np.full(3, 2.0))
    assert eval_generator(lambda x: np.sin(x), np.pi / 2).value == pytest.approx(1.0)


# refinement identity


def test_refinement_haar(spec):
    chk = verify_refinement(spec, np.linspace(-np.pi, np.pi, 256))
    assert chk.residual < 1e-8 and chk.ok


def test_refinement_constant_mask():
    s = RefinableSpec.stationary(P({0: 1}), 2, 10)
    chk = verify_refinement(s, np.linspace(-50, 50, 101))
    assert chk.residual == 0 and chk.ok
    v, b = eval_truncated(s, np.linspace(-50, 50, 11))
    np.testing.assert_array_equal(v, 1)
    assert np.all(b < 1e-13)


def test_refinement_coarse_truncation_within_bound(haar):
    chk = verify_refinement(RefinableSpec.stationary(haar.a, 2, 1), np.linspace(-8, 8, 200))
    assert chk.ok and chk.residual <= chk.bound
    assert chk.residual > 1e-3


# sampling


def test_sample_grid_examples(spec):
    s = sample_grid(spec, -np.pi, np.pi, 3)
    np.testing.assert_allclose(s.xi, [-np.pi, 0, np.pi])
    np.testing.assert_allclose(s.values, haar_phi(s.xi), atol=1e-8)
    assert len(list(sample_grid(spec, 0, 1, 2).rows())) == 2
    with pytest.raises(ValueError):
        sample_grid(spec, 1, -1, 4)
    with pytest.raises(ValueError):
        sample_grid(spec, -1, 1, 1)


def test_sample_csv_columns(spec, haar_gens):
    text = sample_grid(spec, -1, 1, 4).to_csv()
    lines = text.splitlines()
    assert lines[0] == "xi,re,im,tail_bound" and len(lines) == 5
    assert sample_grid(haar_gens.psi[0], -1, 1, 3).to_csv().count("\n") == 4


# nonstationary refinable functions


@pytest.mark.parametrize("level", [0, 1, 3, 6])
def test_nonstationary_equals_stationary(haar, haar_ns, level):
    xi = np.linspace(-8 * np.pi, 8 * np.pi, 257)
    st_v, st_b = eval_truncated(RefinableSpec.stationary(haar.a, 2, 20), xi)
    ns_v, ns_b = eval_truncated(RefinableSpec.nonstationary(haar_ns, level, 20), xi)
    assert np.max(np.abs(st_v - ns_v)) <= 1e-12
    np.testing.assert_allclose(ns_b, st_b, rtol=1e-12)


def test_nonstationary_refinement(haar_ns):
    s = RefinableSpec.nonstationary(haar_ns, 1, 30, tilde=True)
    assert s.refine_dilation == 2
    assert verify_refinement(s, np.linspace(-4, 4, 64)).ok


def test_nonstationary_layers(haar_ns):
    phi, phit = nonstationary_phi_layer(haar_ns, 2)
    psi, psit = nonstationary_psi_layer(haar_ns, 2)
    assert len(phi) == len(phit) == len(psi) == len(psit) == 1
    assert phit[0].multiplier == haar_ns.theta(3)
    assert psi[0].scale == 2 and psi[0].multiplier == haar_ns.level(3).b[0]


# properties

xi_st = st.floats(-40, 40, allow_nan=False)


@settings(max_examples=80, deadline=None)
@given(xi_st, st.integers(1, 40))
def test_tail_bound_monotone_in_truncation(xi, m):
    # one more factor may add its own rounding allowance and nothing else
    a = load_bank("haar").a
    b_m = eval_truncated(RefinableSpec.stationary(a, 2, m), xi).tail_bound
    b_next = eval_truncated(RefinableSpec.stationary(a, 2, m + 1), xi).tail_bound
    assert b_next <= b_m + 4 * EPS * (2 + abs(xi))


@pytest.mark.parametrize("xi", [0.5, np.pi, 10.0, -25.0])
def test_tail_bound_strictly_decreasing_when_truncation_dominates(xi):
    a = load_bank("haar").a
    bounds = [eval_truncated(RefinableSpec.stationary(a, 2, m), xi).tail_bound for m in range(1, 25)]
    assert all(b < a_ for a_, b in zip(bounds, bounds[1:]))


@settings(max_examples=80, deadline=None)
@given(xi_st, st.sampled_from([3, 5, 10, 20]))
def test_bound_covers_true_value(xi, m):
    a = load_bank("haar").a
    v, b = eval_truncated(RefinableSpec.stationary(a, 2, m), xi)
    assert abs(v - complex(haar_phi(xi))) <= b


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3 * np.pi, 3 * np.pi), min_size=1, max_size=20), st.integers(2, 25))
def test_refinement_within_propagated_bounds(xs, m):
    a = load_bank("legall53").a
    assert verify_refinement(RefinableSpec.stationary(a, 2, m), np.array(xs)).ok
