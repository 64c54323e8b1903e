import numpy as np
import pytest

from _helpers import random_case
from lagcurves.classify import CASES, GEODESIC_CASES, ClassCase, generate
from lagcurves.errors import (LagrangianViolated, NotArcLength, SmoothnessInsufficient,
                              VariationNotAdmissible)
from lagcurves.geodesics import (Bump, BumpSum, bump, el_residual, first_variation, make_admissible,
                                 random_variation, raw_vs_reduced)
from lagcurves.taylor import Taylor

I2B = generate(ClassCase("I.2.b", 1.5, 0.5))
II2 = generate(ClassCase("II.2", 1.0))


def test_verdict_examples():
    assert el_residual(II2, (-1, 1)).verdict
    assert el_residual(generate(ClassCase("IV")), (-1, 1)).verdict
    rep = el_residual(I2B, (-1, 1))
    assert not rep.verdict
    assert abs(rep.sup_k2 - 0.5625) <= 1e-10
    assert rep.sup_dk1 <= 1e-10


def test_verdict_sweep():
    rng = np.random.default_rng(40)
    for tag in CASES:
        for _ in range(10):
            v = el_residual(generate(random_case(tag, rng)), (-1, 1), n=21).verdict
            assert v == (tag in GEODESIC_CASES)


def test_el_residual_needs_arclength():
    slow = I2B.reparametrize(lambda t: 0.5 * t)
    with pytest.raises(NotArcLength):
        el_residual(slow, (-1, 1))


def test_make_admissible_examples():
    b = bump(0.0, 1.0)
    s = np.linspace(-1.2, 1.2, 13)
    T = Taylor.variable(s, 3)
    d = b(Taylor.variable(s, 5)).derivatives()
    var = make_admissible(v4=b)
    v1, v2, v3, v4 = var.components(T)
    assert np.allclose(v2.c[0], -1.5 * d[1], atol=1e-14)
    assert np.all(v1.c == 0) and np.all(v3.c == 0)
    var = make_admissible(v3=b)
    v2 = var.components(T)[1]
    assert np.allclose(v2.c[0], 0.5 * d[2], atol=1e-13)
    zero = make_admissible()
    assert all(np.all(c.c == 0) for c in zero.components(T))


def test_make_admissible_errors():
    with pytest.raises(SmoothnessInsufficient):
        make_admissible(v3=Bump(0.0, 1.0, n=2))
    with pytest.raises(SmoothnessInsufficient):
        make_admissible(v4=Bump(0.0, 1.0, n=1))
    with pytest.raises(VariationNotAdmissible):
        make_admissible(v3=bump(0.0, 1.0), support=(-0.5, 0.5))


def test_bump_properties():
    b = Bump(0.3, 0.5, n=8, amplitude=2.0)
    assert b.support == (-0.2, 0.8) and b.smoothness == 7
    s = np.array([-1.0, -0.2, 0.3, 0.8, 1.5])
    assert np.allclose(b(s), [0, 0, 2.0, 0, 0])
    d = b(Taylor.variable(np.array([-0.2, 0.8, -2.0]), 6)).derivatives()
    assert np.max(np.abs(d[:7])) <= 1e-12
    both = BumpSum([b, Bump(-1.0, 0.2)])
    assert both.support == (-1.2, 0.8)


def test_first_variation_examples():
    fv = first_variation(II2, make_admissible(v3=bump(0.0, 1.0, 8, 0.1)))
    assert abs(fv.fd) <= 1e-6 and abs(fv.el1) <= 1e-6
    fv = first_variation(II2, make_admissible(v4=bump(0.3, 0.8, 8, 0.1)))
    assert abs(fv.fd) <= 1e-6 and abs(fv.el1) <= 1e-6
    fv = first_variation(I2B, make_admissible(v4=bump(0.0, 1.0, 8, 0.1)))
    assert abs(fv.el1) <= 1e-10 and abs(fv.fd) <= 1e-6
    fv = first_variation(I2B, make_admissible(v3=bump(0.0, 1.5, 8, 0.1)))
    # int 2 k2 v3 with k2 = 0.5625 and the integral of the bump
    from scipy.integrate import quad
    expect = 2 * 0.5625 * quad(lambda s: float(bump(0.0, 1.5, 8, 0.1)(np.array([s]))[0]), -1.5, 1.5,
                               epsabs=1e-14)[0]
    assert abs(fv.el1 - expect) <= 1e-10
    assert abs(fv.fd - fv.analytic) <= 1e-6
    assert first_variation(I2B, make_admissible()).fd == 0.0


@pytest.mark.parametrize("case", [ClassCase("I.2.b", 1.5, 0.5), ClassCase("II.2", 1.0)])
def test_first_variation_matches_derivative_of_length(case):
    c = generate(case)
    rng = np.random.default_rng(41)
    for _ in range(10):
        fv = first_variation(c, random_variation(rng, (-1.5, 1.5)))
        assert abs(fv.fd - fv.analytic) <= 1e-5
        assert fv.lagrangian_residual <= 1e-10


def test_lagrangian_violation_detected():
    with pytest.raises(LagrangianViolated):
        first_variation(I2B, make_admissible(v3=bump(0.0, 1.0, 8, 0.1)), lagrangian_tol=1e-30)


def test_integration_by_parts_identity():
    wobbly = I2B.reparametrize(lambda t: t + 0.1 * np.sin(t))
    rng = np.random.default_rng(42)
    for c in (I2B, wobbly):
        for _ in range(3):
            d = raw_vs_reduced(c, random_variation(rng, (-1.0, 1.0), n=8, scale=1.0))
            assert d["difference"] <= 1e-8
