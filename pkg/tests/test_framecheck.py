import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
import scipy.integrate as si

from dualframes.banks import load_bank
from dualframes.filterbank import NonstationaryBank
from dualframes.framecheck import (
    QuadratureError,
    RationalityError,
    SystemSpec,
    TestFunction,
    bracket_integral,
    bracket_series,
    check_bracket_identity,
    check_characterization,
    check_characterization_real,
    check_duality,
    check_nonstationary,
    default_grid,
    indicator,
    inner_product,
    integer_multiples,
    lattice_points,
    layer_sum,
    modulated_trapezoid,
    pairing,
    pairing_series,
    partial_sum,
    shannon_system,
)
from dualframes.refinable import GeneratorSet, constant_generator, eval_generator, zero_generator

from conftest import P

F = TestFunction.bump(0, 1)
TWO_PI = 2 * math.pi


def quad_ref(fn, lo, hi, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", si.IntegrationWarning)
        return si.quad(fn, lo, hi, epsabs=1e-15, epsrel=1e-14, limit=500, **kw)[0]


def bump_norm2():
    return quad_ref(lambda x: float(F(np.array([x]))[0].real) ** 2, -1, 1)


@pytest.fixture(scope="module")
def haar_system(haar):
    return SystemSpec.from_bank(haar)


# test functions


def test_bump_shape():
    assert F(0.0) == 1
    assert F(np.array([-1.0, 1.0, 1.5])).tolist() == [0, 0, 0]
    assert F.support == (-1, 1)
    with pytest.raises(ValueError):
        TestFunction.bump(0, 0)


def test_parse_and_product():
    g = TestFunction.parse("bump:0,1*bump:0.5,1")
    assert g.support == (-0.5, 1)
    x = np.linspace(-1, 2, 31)
    np.testing.assert_allclose(g(x), F(x) * TestFunction.bump(0.5, 1)(x))
    assert TestFunction.parse("zero").is_zero
    assert TestFunction.parse("bump:0,1*bump:5,1").is_zero
    with pytest.raises(ValueError):
        TestFunction.parse("gauss:0,1")


# quadrature and pairings


def test_pairing_against_constant_generator():
    ref = quad_ref(lambda x: float(F(np.array([x]))[0].real), -1, 1)
    assert abs(pairing(F, constant_generator(1.0), 1, 0) - ref) < 1e-12


def test_pairing_self_is_norm():
    v = pairing(F, F, 1)
    assert abs(v.imag) < 1e-15 and v.real > 0
    assert v.real == pytest.approx(bump_norm2(), abs=1e-12)


def test_pairing_rejects_zero_scale():
    with pytest.raises(ValueError):
        pairing(F, F, 0)
    with pytest.raises(ValueError):
        bracket_series(F, F, F, F, 0, 4)
    with pytest.raises(ValueError):
        bracket_integral(F, F, F, F, 0.0)


def test_modulation_sums_across_blocks():
    narrow = TestFunction.bump(0, 0.02)
    s = pairing_series(narrow, constant_generator(1.0), 1, 0, 5000)
    for n in (0, 1000, 2047, 2048, 2049, 4999):
        ref = quad_ref(lambda x: float(narrow(np.array([x]))[0].real), -0.02, 0.02, weight="cos", wvar=n)
        assert abs(s.values[n] - ref) < 1e-13


def test_pairing_scaling_and_translation(haar_gens):
    psi = haar_gens.psi[0]
    lam, k, n = 0.5, 1.5, 3

    def integrand(part):
        def h(x):
            g = complex(eval_generator(psi, lam * x - k).value)
            v = F(np.array([x]))[0] * np.conj(math.sqrt(lam) * np.exp(-1j * n * lam * x) * g)
            return v.real if part == 0 else v.imag
        return h

    ref = complex(quad_ref(integrand(0), -1, 1), quad_ref(integrand(1), -1, 1))
    assert abs(pairing(F, psi, lam, k, n) - ref) < 1e-10


def test_quadrature_non_convergence():
    with pytest.raises(QuadratureError):
        modulated_trapezoid(lambda x: (np.sign(x - 0.1234567), np.zeros(x.shape)), (-1, 1),
                            tol=1e-14, max_points=4097)


# bracket series and integral


def test_series_disjoint_frequency_support_is_zero():
    far = indicator(5, 6)
    s = bracket_series(F, F, far, far, 1, 8)
    assert s.value == 0


def test_series_self_partial_sums_real_nondecreasing(haar_gens):
    phi = haar_gens.phi[0]
    vals = [bracket_series(F, F, phi, phi, 0.5, k).value for k in (0, 2, 4, 8, 16, 32)]
    assert all(abs(v.imag) < 1e-15 for v in vals)
    assert all(b.real >= a.real for a, b in zip(vals, vals[1:]))


def test_series_stabilizes_in_kmax(haar_gens):
    phi = haar_gens.phi[0]
    s128 = bracket_series(F, F, phi, phi, 1, 128)
    s256 = bracket_series(F, F, phi, phi, 1, 256)
    assert abs(s128.value - s256.value) < 1e-8
    assert s128.last_term < 1e-10


def test_integral_empty_shift_range(haar_gens):
    phi = haar_gens.phi[0]
    i = bracket_integral(F, TestFunction.bump(28.3, 1), phi, phi, 1)
    assert i.value == 0 and i.kmax == 0


def test_integral_only_unshifted_term(haar_gens):
    phi = haar_gens.phi[0]
    i = bracket_integral(F, F, phi, phi, 1)
    assert i.kmax == 0
    ref = TWO_PI * quad_ref(
        lambda x: float(F(np.array([x]))[0].real ** 2 * abs(complex(eval_generator(phi, x).value)) ** 2), -1, 1)
    assert abs(i.value - ref) < 1e-10


@pytest.mark.parametrize("which", ["phi", "psi"])
@pytest.mark.parametrize("lam", [1, 0.5])
def test_bracket_identity_haar(haar_gens, which, lam):
    g, gt = (haar_gens.phi[0], haar_gens.phi_tilde[0]) if which == "phi" else (haar_gens.psi[0], haar_gens.psi_tilde[0])
    rep = check_bracket_identity(F, F, g, gt, lam, kmax=int(128 / lam))
    assert rep.passed and rep.difference < 1e-7


def test_bracket_identity_mixed_functions(haar_gens):
    g = TestFunction.bump(0.4, 0.8)
    rep = check_bracket_identity(F, g, haar_gens.psi[0], haar_gens.psi_tilde[0], 0.25, kmax=512)
    assert rep.passed
    assert rep.to_dict()["verdict"] == "pass"


def test_bracket_identity_shannon_layers():
    sysm = shannon_system(Fraction(3, 2))
    (phi,), (phit,) = sysm.phi_layer(0)
    (psi,), (psit,) = sysm.psi_layer(0)
    f = TestFunction.bump(0.3, 2)
    for g, gt in ((phi, phit), (psi, psit)):
        assert check_bracket_identity(f, f, g, gt, 1, kmax=64).passed


# partial sums and duality


def test_partial_sum_with_empty_psi_is_phi_bracket(haar_gens):
    z = zero_generator()
    gens = GeneratorSet(haar_gens.phi, [z], haar_gens.phi_tilde, [z])
    sysm = SystemSpec.stationary(gens, 2)
    ps = partial_sum(sysm, F, F, 0, 1)
    ls = layer_sum(F, F, haar_gens.phi, haar_gens.phi_tilde, 1)
    assert ps.value == ls.value
    assert abs(ps.value - bracket_integral(F, F, haar_gens.phi[0], haar_gens.phi[0], 1).value) < 1e-9


def test_partial_sum_disjoint_supports(haar_system):
    g = TestFunction.bump(28.3, 1)
    assert abs(partial_sum(haar_system, F, g, 0, 5).value) < 1e-8


def test_partial_sums_need_increasing_levels(haar_system):
    with pytest.raises(ValueError):
        partial_sum(haar_system, F, F, 2, 2)
    with pytest.raises(ValueError):
        check_duality(haar_system, F, F, 3, 3)


def test_scale_recursion(haar_system, haar_gens):
    # S_0^J' equals the phi layer at scale 2^-J' for an OEP bank
    for jp in (1, 3):
        s = partial_sum(haar_system, F, F, 0, jp).value
        phi_layer = layer_sum(F, F, haar_gens.phi, haar_gens.phi_tilde, 2.0 ** -jp).value
        assert abs(s - phi_layer) < 1e-7


def test_haar_duality_increasing(haar_system):
    table = check_duality(haar_system, F, F, 0, 8, tol=1e-4)
    assert table.passed
    target = TWO_PI * bump_norm2()
    assert table.rows[0].target.real == pytest.approx(target, abs=1e-10)
    s = [r.s for r in table.rows]
    assert all(abs(v.imag) < 1e-12 for v in s)
    assert all(b.real >= a.real - r.uncertainty for a, b, r in zip(s, s[1:], table.rows[1:]))
    assert all(v.real <= target + 1e-9 for v in s)
    assert [r.j_prime for r in table.rows] == list(range(1, 9))


def test_duality_independent_of_start_level(haar_system):
    a = check_duality(haar_system, F, F, 0, 8, tol=1e-4)
    b = check_duality(haar_system, F, F, 1, 8, tol=1e-4)
    assert a.verdict == b.verdict == "pass"
    assert abs(a.rows[-1].s - b.rows[-1].s) < 1e-7


def test_zero_system_fails_with_full_error(haar_system):
    table = check_duality(haar_system.zeroed(), F, F, 0, 3)
    assert not table.passed
    assert table.rows[-1].abs_err == pytest.approx(TWO_PI * bump_norm2(), abs=1e-10)


def test_zero_test_function_passes(haar_system):
    z = TestFunction.zero()
    table = check_duality(haar_system, z, F, 0, 3)
    assert table.passed and all(r.s == 0 and r.abs_err == 0 for r in table.rows)
    assert inner_product(z, F) == 0


def test_convergence_table_serialization(haar_system):
    table = check_duality(haar_system, F, F, 0, 3, tol=1e-1)
    lines = table.to_csv().splitlines()
    assert lines[0] == "J_prime,S_re,S_im,target_re,target_im,abs_err"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["1", "2", "3"]
    d = table.to_dict()
    assert d["verdict"] == "pass" and len(d["rows"]) == 3


def test_self_dual_shares_generators(haar_system):
    sd = haar_system.self_dual()
    phi, phit = sd.phi_layer(0)
    assert phi is phit or phi == phit


# characterization


def test_haar_characterization(haar_system):
    rep = check_characterization(haar_system.self_dual(), default_grid(512), kmax=8)
    assert rep.passed
    assert rep.max_residual("eq2") < 1e-8 and rep.max_residual("eq3") < 1e-8
    assert {e.k for e in rep.entries if e.identity == "eq2"} == set(range(-8, 9))
    assert {e.k for e in rep.entries if e.identity == "eq3"} == {k for k in range(-8, 9) if k % 2}
    assert rep.probe_status == "decreasing" and [j for j, _ in rep.probe] == list(range(1, 9))


def test_zero_psi_breaks_eq2(haar_gens):
    z = zero_generator()
    sysm = SystemSpec.stationary(GeneratorSet(haar_gens.phi, [z], haar_gens.phi_tilde, [z]), 2)
    rep = check_characterization(sysm)
    assert not rep.passed and rep.max_residual("eq2") > 0.1


def test_far_shifts_vanish_exactly():
    rep = check_characterization(shannon_system(2), kmax=6)
    assert rep.passed
    for k in (3, -5):
        assert rep.residual("eq3", k) == 0
    assert rep.residual("eq2", 6) == 0


def test_characterization_needs_integer_dilation():
    with pytest.raises(ValueError):
        check_characterization(shannon_system(Fraction(3, 2)))


def test_real_check_matches_integer_verdicts(haar_system):
    sh = shannon_system(2)
    assert check_characterization_real(sh).verdict == check_characterization(sh).verdict == "pass"
    assert check_characterization_real(haar_system.self_dual()).verdict == "pass"


def test_real_check_rational():
    rep = check_characterization_real(shannon_system(Fraction(3, 2)))
    assert rep.passed
    assert {e.k for e in rep.entries if e.identity == "I1"} == {-6, -3, 0, 3, 6}
    assert {e.k for e in rep.entries if e.identity == "I3"} == {k for k in range(-8, 9) if k % 2}
    assert integer_multiples(Fraction(3, 2), 3, False) and not integer_multiples(Fraction(3, 2), 2, False)


def test_real_check_irrational():
    rep = check_characterization_real(shannon_system(math.sqrt(2), irrational=True))
    assert rep.passed
    assert [e.k for e in rep.entries if e.identity == "I1"] == [0]
    i3 = {e.k for e in rep.entries if e.identity == "I3"}
    assert i3 == set(range(-8, 9)) - {0}
    assert integer_multiples(math.sqrt(2), 0, True) and not integer_multiples(math.sqrt(2), 2, True)


def test_real_check_detects_bad_dilation():
    # generators built for d = 3/2 but declared with d = 5/4 violate I1 or I2
    sh = shannon_system(Fraction(3, 2))
    bad = SystemSpec(lambda j: Fraction(4, 5) ** j, sh.phi_layer, sh.psi_layer, d=Fraction(5, 4))
    wide = default_grid(512, -2 * math.pi, 2 * math.pi)
    assert check_characterization_real(sh, wide).passed
    assert not check_characterization_real(bad, wide).passed


def test_real_check_needs_declared_rationality():
    with pytest.raises(RationalityError):
        check_characterization_real(shannon_system(1.5))


# nonstationary


def test_nonstationary_matches_stationary(haar, haar_ns):
    ns = check_nonstationary(SystemSpec.nonstationary(haar_ns))
    st = check_nonstationary(SystemSpec.from_bank(haar))
    assert ns.passed and st.passed
    assert [e.k for e in ns.entries] == [e.k for e in st.entries]
    assert max(abs(a.max_abs - b.max_abs) for a, b in zip(ns.entries, st.entries)) <= 1e-10
    assert not any(e.vacuous for e in ns.entries)


def test_lattice_points_exact():
    bank = load_bank("haar_nonstationary")
    # lambda_j^-1 Z = 2^j Z, so the union restricted to |k| <= 2 is {-2, -1, 1, 2}
    pts = lattice_points(SystemSpec.nonstationary(bank), 0, 2)
    assert pts == [Fraction(-2), Fraction(-1), Fraction(1), Fraction(2)]
    assert all(isinstance(k, Fraction) for k in pts)
    assert lattice_points(SystemSpec.nonstationary(bank), 1, 1) == [Fraction(-2), Fraction(2)]


def test_single_level_truncation(haar):
    bank = NonstationaryBank((haar,), "terminate", theta_next=P({0: 1}))
    sysm = SystemSpec.nonstationary(bank)
    x = default_grid(64)
    rep = check_nonstationary(sysm, x, kmax=1)
    (phi,), (phit,) = sysm.phi_layer(0)
    (psi,), (psit,) = sysm.psi_layer(0)

    def br(g, gt):
        return np.conj(eval_generator(g, x).value) * eval_generator(gt, x + TWO_PI).value

    expected = float(np.max(np.abs(br(phi, phit) + br(psi, psit))))
    assert rep.residual("ns_eq1", Fraction(1)) == pytest.approx(expected, abs=1e-15)
    assert sysm.psi_layer(1)[0][0].multiplier.is_zero


def test_zero_system_characterization_reports_growth(haar_system):
    rep = check_characterization(haar_system.zeroed(), kmax=2)
    assert rep.probe_status != "growing"
    assert all(v == pytest.approx(1.0) for _, v in rep.probe)
    assert all(e.max_abs == 0 for e in rep.entries)
