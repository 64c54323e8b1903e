import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagcurves.core import (BASIS, AlgebraElement, CurveJet, GroupElement, J, act, act_on_jet,
                            basis, bracket, expm, is_symplectic, lam, random_algebra, random_group)
from lagcurves.errors import NotSymplectic

finite = st.floats(-1e3, 1e3, allow_nan=False)
vec4 = st.lists(finite, min_size=4, max_size=4).map(np.array)


def test_j_constant():
    assert np.array_equal(J @ J, -np.eye(4))
    assert np.array_equal(J.T, -J)


def test_lambda_examples():
    e = np.eye(4)
    assert lam(e[0], e[2]) == 1.0
    assert lam([1, 2, 3, 4], [5, 6, 7, 8]) == -16.0


@settings(max_examples=50, deadline=None)
@given(vec4, vec4, vec4, finite)
def test_lambda_bilinear_antisymmetric(x, y, z, c):
    assert lam(x, x) == 0.0
    assert lam(x, y) == -lam(y, x)
    lhs = lam(x + c * z, y)
    rhs = lam(x, y) + c * lam(z, y)
    scale = (np.abs(x).sum() + abs(c) * np.abs(z).sum()) * np.abs(y).sum()
    assert abs(lhs - rhs) <= 1e-12 * max(scale, 1e-300)


def test_is_symplectic_examples():
    assert is_symplectic(np.eye(4), 1e-10)
    assert is_symplectic(J, 1e-10)
    assert not is_symplectic(np.diag([2.0, 1, 1, 1]), 1e-10)
    with pytest.raises(ValueError):
        is_symplectic(np.eye(4), 0.0)


def test_act_examples():
    x = np.array([1.0, 2, 3, 4])
    assert np.array_equal(act(GroupElement.identity(), x), x)
    a = np.array([0.5, -1, 2, 3])
    assert np.array_equal(act(GroupElement(a, np.eye(4)), np.zeros(4)), a)
    assert np.array_equal(act(GroupElement(np.zeros(4), J), np.eye(4)[0]), -np.eye(4)[2])


def test_act_composition():
    rng = np.random.default_rng(1)
    g, h = random_group(rng), random_group(rng)
    x = rng.normal(size=4)
    assert np.allclose(act(g @ h, x), act(g, act(h, x)), rtol=1e-12, atol=1e-12)


def test_group_rejects_non_symplectic():
    with pytest.raises(NotSymplectic):
        GroupElement(np.zeros(4), np.diag([2.0, 1, 1, 1]))


def test_act_on_jet():
    rng = np.random.default_rng(2)
    jet = CurveJet(0.3, rng.normal(size=(5, 4)))
    assert np.array_equal(act_on_jet(GroupElement.identity(), jet).X, jet.X)
    moved = act_on_jet(GroupElement(np.ones(4), np.eye(4)), jet)
    assert np.array_equal(moved.X[1:], jet.X[1:])
    assert np.array_equal(moved.X[0], jet.X[0] + 1)


def test_expm_examples():
    assert np.allclose(expm(np.zeros((5, 5)), 2.0).matrix(), np.eye(5), atol=0)
    g = expm(basis("T1"), 1.7)
    assert np.allclose(g.a, [1.7, 0, 0, 0], atol=1e-15)
    assert np.allclose(g.A, np.eye(4), atol=1e-15)


def test_expm_rotation_block():
    th = 0.7
    A = expm(basis("B11") - basis("C11"), th).A
    c, s = np.cos(th), np.sin(th)
    # exp of (0, 1; -1, 0) in the (x1, x3) coordinates
    assert np.allclose(A[np.ix_([0, 2], [0, 2])], [[c, s], [-s, c]], atol=1e-14)
    assert np.allclose(A[np.ix_([1, 3], [1, 3])], np.eye(2), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-1.0, 1.0))
def test_expm_is_symplectic_and_one_parameter(seed, t):
    rng = np.random.default_rng(seed)
    m = random_algebra(rng).matrix()
    m *= 50.0 / max(1.0, np.abs(m).sum(axis=1).max()) * abs(t)
    g = expm(m)
    assert is_symplectic(g.A, 1e-10 * max(1.0, np.abs(g.A).max() ** 2))
    m = random_algebra(rng).matrix()
    s = rng.uniform(-1, 1)
    lhs = (expm(m, s) @ expm(m, t)).matrix()
    rhs = expm(m, s + t).matrix()
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.abs(rhs).max())


def test_basis_independent_and_closed():
    flat = BASIS.reshape(14, 25)
    assert np.linalg.matrix_rank(flat) == 14
    for x in BASIS:
        for y in BASIS:
            b = bracket(x, y)
            c, *_ = np.linalg.lstsq(flat.T, b.reshape(25), rcond=None)
            assert np.max(np.abs(flat.T @ c - b.reshape(25))) <= 1e-12


def test_algebra_roundtrip():
    rng = np.random.default_rng(3)
    x = random_algebra(rng)
    y = AlgebraElement.from_matrix(x.matrix())
    assert np.allclose(x.coeffs, y.coeffs, atol=1e-13)
    m = x.matrix()
    assert np.all(m[0] == 0)
    M = m[1:, 1:]
    assert np.max(np.abs(M.T @ J + J @ M)) <= 1e-12
