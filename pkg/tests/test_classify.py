import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _helpers import random_case
from lagcurves.classify import (CASES, ClassCase, case_constants, classify, closedness,
                                expected_roots, fundamental_period, generate, lcm_length_formula,
                                matrix_roots, one_parameter_generator, root_mismatch)
from lagcurves.core import act, expm
from lagcurves.curves import OrbitCurve, curvatures
from lagcurves.errors import InvalidParameters, UnsupportedCase


def test_classify_examples():
    c = classify(2.5, 5.6875)
    assert c.tag == "I.2.b" and abs(c.mu - 1.5) < 1e-15 and abs(c.nu - 0.5) < 1e-15
    assert classify(0.0, 0.0).tag == "IV"
    c = classify(1.0, 1.0)
    assert c.tag == "II.2" and c.mu == 1.0


def test_boundaries_go_to_degenerate_case():
    assert classify(1.0, 1.0 + 1e-13).tag == "II.2"
    assert classify(2.0, 3.0 + 1e-13).tag == "III.1"
    assert classify(-2.0, 3.0).tag == "III.2"
    assert classify(-1.0, 1.0).tag == "II.1"
    assert classify(1e-7, 0.0).tag == "IV"
    assert classify(0.5, 1.0).tag == "I.2.c"


def test_generate_examples():
    s = np.linspace(-2, 2, 9)
    r24, r12 = np.sqrt(24.0), np.sqrt(12.0)
    assert np.allclose(generate(ClassCase("IV"))(s), np.stack([s / r24, s ** 2 / r12, -s ** 4 / r24, s ** 3 / r12], 1))
    assert np.allclose(generate(ClassCase("II.2", 1.0))(s), np.stack([s, np.cos(s), -s ** 2 / 2, np.sin(s)], 1))
    mu, nu = 1.5, 0.5
    pts = generate(ClassCase("I.2.b", mu, nu))(s)
    an = (mu ** 2 - nu ** 2) ** -0.5 * nu ** -1.5
    am = (mu ** 2 - nu ** 2) ** -0.5 * mu ** -1.5
    assert np.allclose(np.hypot(pts[:, 0], pts[:, 2]), an, atol=1e-14)
    assert np.allclose(np.hypot(pts[:, 1], pts[:, 3]), am, atol=1e-14)


def test_invalid_parameters():
    with pytest.raises(InvalidParameters):
        generate(ClassCase("I.2.b", 0.5, 1.5))
    with pytest.raises(InvalidParameters):
        generate(ClassCase("II.1", -1.0))
    with pytest.raises(InvalidParameters):
        ClassCase("V")


@pytest.mark.parametrize("tag", CASES)
def test_round_trip(tag):
    rng = np.random.default_rng(abs(hash(tag)) % 2 ** 32)
    for _ in range(10):
        case = random_case(tag, rng)
        k3, k4 = case_constants(case)
        r = curvatures(generate(case).jet(rng.uniform(-1, 1), 5))
        assert abs(r.k1) <= 1e-7 and abs(r.k2 - 1) <= 1e-7
        assert abs(r.k3 - k3) <= 1e-7 and abs(r.k4 - k4) <= 1e-7
        back = classify(r.k3, r.k4, tol=1e-9)
        assert back.tag == tag
        if case.mu is not None:
            assert abs(back.mu - case.mu) <= 1e-5
        if case.nu is not None:
            assert abs(back.nu - case.nu) <= 1e-5
        exact = classify(k3, k4)
        assert exact.tag == tag


@pytest.mark.parametrize("tag", CASES)
def test_roots_match_matrix_eigenvalues(tag):
    rng = np.random.default_rng(30)
    case = random_case(tag, rng)
    assert root_mismatch(matrix_roots(*case_constants(case)), expected_roots(case)) <= 1e-8


def test_pole_fallback():
    mu = 1.0
    case = ClassCase("I.1", mu, mu / np.sqrt(3.0))
    c = generate(case)
    assert isinstance(c, OrbitCurve)
    r = curvatures(c.jet(0.3, 5))
    k3, k4 = case_constants(case)
    assert abs(r.k3 - k3) < 1e-9 and abs(r.k4 - k4) < 1e-9 and abs(r.k2 - 1) < 1e-9


def test_one_parameter_generator():
    case = ClassCase("I.2.b", 1.5, 0.5)
    X, p = one_parameter_generator(case)
    assert np.allclose(p, [0, (1.5 ** 3 * 2) ** -0.5, (0.5 ** 3 * 2) ** -0.5, 0], atol=1e-15)
    assert np.array_equal(act(expm(X, 0.0), p), p)
    c = generate(case)
    for s in np.linspace(0, 4 * np.pi, 25):
        assert np.max(np.abs(act(expm(X, s), p) - c(s))) <= 1e-9
    with pytest.raises(UnsupportedCase):
        one_parameter_generator(ClassCase("II.2", 1.0))


def test_closedness_examples():
    a = closedness(2.5, 5.6875)
    assert (a.m, a.n) == (3, 1) and abs(a.length - 12.5664) < 1e-3
    b = closedness(1.64, 2.0496)
    assert (b.m, b.n) == (5, 4) and abs(b.mu - 1.0) < 1e-12 and abs(b.nu - 0.8) < 1e-12
    assert abs(b.length - 31.4259) < 0.02
    assert closedness(1.0, 1.0) is None
    # irrational ratio
    mu, nu = 1.0, 1 / np.sqrt(2.0)
    assert closedness(mu ** 2 + nu ** 2, mu ** 4 + mu ** 2 * nu ** 2 + nu ** 4) is None


def test_frozen_period_oracle():
    # oracle output frozen from an independent brute-force scan
    assert closedness(2.5, 5.6875).length == pytest.approx(12.566370614359174, abs=1e-9)
    assert closedness(1.64, 2.0496).length == pytest.approx(31.415926535897928, abs=1e-9)
    # the printed lcm formula disagrees with both
    assert lcm_length_formula(3, 1, 0.5) == pytest.approx(12 * np.pi)
    assert lcm_length_formula(5, 4, 0.8) == pytest.approx(12.5 * np.pi)


def test_fundamental_period_simple():
    T = fundamental_period(lambda s: (np.cos(s), np.sin(2 * s)), 1.0, 20.0)
    assert abs(T - 2 * np.pi) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-30, 30))
def test_classify_total_and_consistent(k3, k4):
    case = classify(k3, k4)
    assert case.tag in CASES
    if case.tag != "IV" and case.tag not in ("II.1", "II.2", "III.1", "III.2"):
        a, b = case_constants(case)
        assert abs(a - k3) <= 1e-8 * max(1, abs(k3)) and abs(b - k4) <= 1e-8 * max(1, abs(k4), k3 * k3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 2.0), st.floats(0.05, 0.95))
def test_i2b_on_torus_orbit(mu, frac):
    c = generate(ClassCase("I.2.b", mu, mu * frac))
    p = c(np.linspace(-3, 3, 50))
    r1, r2 = np.hypot(p[:, 0], p[:, 2]), np.hypot(p[:, 1], p[:, 3])
    assert np.ptp(r1) <= 1e-9 * max(1, r1[0]) and np.ptp(r2) <= 1e-9 * max(1, r2[0])
