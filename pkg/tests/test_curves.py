import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _helpers import fd_derivative, random_case, random_curve
from lagcurves.classify import CASES, ClassCase, generate
from lagcurves.core import CurveJet, act_on_jet, lam, random_group
from lagcurves.curves import (ClosedForm, Sampled, arclength_reparam, curvatures, dpair_witness,
                              flip_orientation, invariant_arrays, is_lagrangian,
                              osculating_null_check, phase_portraits, predicates, sigma,
                              symplectic_length)
from lagcurves.errors import (FrameCompletionFailed, InflectionPoint, InsufficientOrder,
                              NotLagrangian, OrderTooHigh, OrientationViolation, OutOfRange)

R24, R12 = np.sqrt(24.0), np.sqrt(12.0)
TYPE_IV = ClosedForm(lambda t: (t / R24, t * t / R12, -t ** 4 / R24, t ** 3 / R12), window=(-2, 2))
I2B = generate(ClassCase("I.2.b", 1.5, 0.5))


def test_line_jet():
    p, v = np.array([1.0, 2, 3, 4]), np.array([0.5, -1, 0, 2])
    line = ClosedForm(lambda t: [p[i] + t * v[i] for i in range(4)])
    X = line.jet(0.7, 3).X
    assert np.allclose(X[1], v, atol=1e-15)
    assert np.all(X[2:] == 0)


def test_type_iv_jet():
    X = TYPE_IV.jet(1.0, 5).X
    assert np.allclose(X[4], [0, 0, -24 / R24, 0], atol=1e-14)
    assert np.allclose(generate(ClassCase("IV")).jet(1.0, 4).X[4], X[4], atol=1e-13)


def test_order_limits():
    with pytest.raises(OrderTooHigh):
        TYPE_IV.jet(0.0, 7)
    with pytest.raises(InsufficientOrder):
        curvatures(TYPE_IV.jet(0.0, 4))


def test_sampled_jet_is_fourth_order():
    circle = ClosedForm(lambda t: (np.cos(t), np.sin(t), np.cos(2 * t), np.sin(3 * t)))
    errs = []
    for h in (0.02, 0.01):
        ts = np.arange(-1.0, 1.0 + h / 2, h)
        s = Sampled(ts[0], h, circle(ts))
        errs.append(np.max(np.abs(s.jet(0.0, 3).X - circle.jet(0.0, 3).X)))
    assert 12 < errs[0] / errs[1] < 20


def test_sampled_rejects_bad_input():
    with pytest.raises(ValueError):
        Sampled(0.0, 0.1, np.zeros((5, 4)))
    with pytest.raises(ValueError):
        Sampled(0.0, -0.1, np.zeros((12, 4)))
    s = Sampled(0.0, 0.1, np.random.default_rng(0).normal(size=(20, 4)))
    with pytest.raises(OutOfRange):
        s.jet(-1.0, 2)
    with pytest.raises(OutOfRange):
        s.jet(0.1, 2)


def test_curvature_examples():
    r = curvatures(TYPE_IV.jet(0.3, 5))
    assert np.allclose([r.k1, r.k2, r.k3, r.k4], [0, 1, 0, 0], atol=1e-13)
    r = curvatures(I2B.jet(0.4, 5))
    assert abs(r.k3 - 2.5) < 1e-12 and abs(r.k4 - 5.6875) < 1e-12


def test_identity_table():
    rng = np.random.default_rng(5)
    for _ in range(5):
        c = random_curve(rng)
        t = rng.uniform(-0.5, 0.5)

        def k(i, tt):
            X = c.jets(np.array([tt]), 5)[0]
            return lam(X[i], X[i + 1])

        X = c.jet(t, 5).X
        d1 = fd_derivative(lambda u: k(1, u), t)
        d1_2 = fd_derivative(lambda u: fd_derivative(lambda v: k(1, v), u, 1e-2), t, 1e-2)
        d2 = fd_derivative(lambda u: k(2, u), t)
        d2_2 = fd_derivative(lambda u: fd_derivative(lambda v: k(2, v), u, 1e-2), t, 1e-2)
        d3 = fd_derivative(lambda u: k(3, u), t)
        assert abs(lam(X[1], X[3]) - d1) <= 1e-7 * max(1, abs(d1))
        assert abs(lam(X[1], X[4]) - (d1_2 - k(2, t))) <= 1e-6 * max(1, abs(d1_2))
        assert abs(lam(X[2], X[4]) - d2) <= 1e-7 * max(1, abs(d2))
        assert abs(lam(X[3], X[5]) - d3) <= 1e-7 * max(1, abs(d3))
        # the second derivative, not the first, of k2 enters here
        assert abs(lam(X[2], X[5]) - (d2_2 - k(3, t))) <= 1e-6 * max(1, abs(d2_2))


def test_phi_identity():
    rng = np.random.default_rng(6)
    for _ in range(10):
        r = curvatures(random_curve(rng).jet(rng.uniform(-1, 1), 5))
        assert r.phi_residual <= 1e-8 * max(1.0, abs(r.phi))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_group_invariance(seed):
    rng = np.random.default_rng(seed)
    jet = CurveJet(0.0, rng.normal(size=(6, 4)))
    a = curvatures(jet)
    b = curvatures(act_on_jet(random_group(rng), jet))
    for name in ("k1", "k2", "k3", "k4", "phi"):
        x, y = getattr(a, name), getattr(b, name)
        assert abs(x - y) <= 1e-9 * max(1.0, abs(x))


def test_is_lagrangian_examples():
    assert is_lagrangian(TYPE_IV, (-1, 1))[0]
    par = ClosedForm(lambda t: (t, 0.0, t * t, 0.0))
    ok, res = is_lagrangian(par, (-1, 1))
    assert not ok and abs(res - 2.0) < 1e-12
    planar = ClosedForm(lambda t: (np.cos(t), np.sin(t), 0.0, 0.0))
    ok, res = is_lagrangian(planar, (-1, 1))
    assert ok and res == 0.0
    line = ClosedForm(lambda t: (t, 2 * t, 0.0, 0.0))
    assert not is_lagrangian(line, (-1, 1))[0]


def test_lagrangian_predicate_invariance():
    rng = np.random.default_rng(7)
    g = random_group(rng)
    moved = TYPE_IV.transformed(g).reparametrize(lambda t: 0.5 * t + 0.1 * t ** 3)
    scaled = ClosedForm(lambda t: [2.5 * x for x in moved.func(t)])
    assert is_lagrangian(scaled, (-1, 1), tol=1e-8 * 6.25 * 100)[0]
    bad = ClosedForm(lambda t: (t, 0.0, t * t, 0.0))
    moved_bad = bad.transformed(g).reparametrize(lambda t: 0.5 * t + 0.1 * t ** 3)
    assert not is_lagrangian(moved_bad, (-1, 1))[0]


def test_predicates():
    assert predicates(TYPE_IV, (-1, 1)) == dict(lagrangian=True, nondegenerate=True, linearly_full=True)
    line = ClosedForm(lambda t: (t, 2 * t, 0.0, 0.0))
    assert predicates(line, (-1, 1)) == dict(lagrangian=False, nondegenerate=False, linearly_full=False)
    assert all(predicates(I2B, (-2, 2)).values())


def test_arclength_examples():
    assert np.allclose(sigma(TYPE_IV, np.linspace(-1, 1, 11)), 1.0, atol=1e-14)
    slow = I2B.reparametrize(lambda t: t + 0.1 * np.sin(t))
    assert abs(symplectic_length(slow, (0.0, 4 * np.pi)) - 4 * np.pi) <= 1e-7
    assert abs(symplectic_length(I2B, (0.0, 4 * np.pi)) - 12.5664) < 1e-4


def test_arclength_reparam():
    c = TYPE_IV.reparametrize(lambda t: 0.4 * t + 0.05 * t ** 3, window=(-1.5, 1.5))
    out, length = arclength_reparam(c)
    assert abs(length - symplectic_length(c, (-1.5, 1.5))) < 1e-8
    ts = out.ts[20:-20:25]
    X = out.jets(ts, 3)
    assert np.max(np.abs(lam(X[:, 2], X[:, 3]) - 1.0)) <= 1e-6
    with pytest.raises(OrientationViolation):
        arclength_reparam(flip_orientation(TYPE_IV), (-1, 1))
    with pytest.raises(NotLagrangian):
        arclength_reparam(ClosedForm(lambda t: (t, np.sin(t), t * t, np.cos(t))), (-1, 1))


def test_phase_portrait_examples():
    assert phase_portraits(I2B, (-2, 2), 101).residual <= 1e-8
    plane = ClosedForm(lambda t: (np.cos(t), 0.0, np.sin(t), 0.0))
    p = phase_portraits(plane, (-1, 1), 11)
    assert np.all(p.b == 0)
    c = random_curve(np.random.default_rng(8))
    p = phase_portraits(c, (-1, 1), 11)
    assert np.array_equal(p.curve_points(), c(p.t))


def test_dpair_examples():
    # a = b when gamma = (x, -x, y, y)
    c = ClosedForm(lambda t: (np.cos(t), -np.cos(t), 2 * np.sin(t), 2 * np.sin(t)))
    p = phase_portraits(c, (-1, 1), 5)
    A, T = dpair_witness(p, p.t[1])
    assert np.allclose(A, np.eye(2), atol=1e-14) and np.allclose(T, 0, atol=1e-14)
    # two circles of equal radius, offset by angle alpha
    r, alpha = 1.3, 0.4
    c = ClosedForm(lambda t: (r * np.cos(t), -r * np.cos(t + alpha), r * np.sin(t), r * np.sin(t + alpha)))
    p = phase_portraits(c, (-1, 1), 5)
    A, T = dpair_witness(p, p.t[2])
    rot = np.array([[np.cos(alpha), -np.sin(alpha)], [np.sin(alpha), np.cos(alpha)]])
    assert np.allclose(A, rot, atol=1e-13) and np.allclose(T, 0, atol=1e-13)
    rng = np.random.default_rng(9)
    ts = np.sort(rng.uniform(-2, 2, 100))
    p = phase_portraits(I2B, ts=ts)
    for t in ts:
        A, T = dpair_witness(p, t)
        assert abs(np.linalg.det(A) - 1) <= 1e-9


def test_dpair_inflection():
    with pytest.raises(InflectionPoint):
        p = phase_portraits(generate(ClassCase("IV")), ts=np.array([0.0]))
        dpair_witness(p, 0.0)


def test_osculating_null():
    rng = np.random.default_rng(10)
    for tag in CASES:
        chk = osculating_null_check(generate(random_case(tag, rng)), (-1, 1), 21)
        assert chk.null_residual <= 1e-8
        # the frame has E1 = g', E2 = g'', so the block is (0, 0; 0, c22)
        assert np.max(np.abs(chk.c[:, 0, :])) <= 1e-10
        assert np.min(np.abs(chk.c[:, 1, 1])) > 1e-3
    line = ClosedForm(lambda t: (t, 2 * t, 0.0, 0.0))
    with pytest.raises(FrameCompletionFailed):
        osculating_null_check(line, (-1, 1), 5)


def test_invariant_arrays_shapes():
    X = I2B.jets(np.linspace(0, 1, 3), 6)
    d = invariant_arrays(X)
    assert all(v.shape == (3,) for v in d.values())
    assert {"ddk3", "dk3", "dddk1", "ddk2", "dphi"} <= set(d)
