"""Affine symplectic group of R^4 and its Lie algebra.

Group elements are pairs ``(a, A)`` acting by ``x -> A x + a`` with ``A`` in
Sp(4, R). They are represented by the 5x5 matrix ``[[1, 0], [a, A]]``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotSymplectic

J = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)
J.setflags(write=False)

SYMPLECTIC_TOL = 1e-10

BASIS_NAMES = (
    "T1", "T2", "T3", "T4",
    "A11", "A22", "A12", "A21",
    "B11", "B22", "B12",
    "C11", "C22", "C12",
)


def lam(x, y):
    """Symplectic form ``x^T J y``, broadcast over leading axes."""
    x = np.asarray(x)
    y = np.asarray(y)
    # pairwise grouping makes lam(x, y) == -lam(y, x) exactly
    return ((x[..., 0] * y[..., 2] - x[..., 2] * y[..., 0])
            + (x[..., 1] * y[..., 3] - x[..., 3] * y[..., 1]))


def symplectic_defect(A):
    """Max-norm of ``A^T J A - J``."""
    A = np.asarray(A, dtype=float)
    return float(np.max(np.abs(A.T @ J @ A - J)))


def is_symplectic(A, tol=SYMPLECTIC_TOL):
    if not tol > 0:
        raise ValueError("tol must be positive")
    A = np.asarray(A, dtype=float)
    if A.shape != (4, 4) or not np.all(np.isfinite(A)):
        return False
    return symplectic_defect(A) <= tol


def sp_inverse(A):
    """Inverse of a symplectic matrix, ``J^-1 A^T J``."""
    return -J @ np.asarray(A).T @ J


def _basis_matrices():
    mats = []
    for a in range(4):
        m = np.zeros((5, 5))
        m[a + 1, 0] = 1.0
        mats.append(m)

    def lin(entries):
        m = np.zeros((5, 5))
        for (i, j), v in entries.items():
            m[i + 1, j + 1] = v
        return m

    mats += [
        lin({(0, 0): 1, (2, 2): -1}),           # A11
        lin({(1, 1): 1, (3, 3): -1}),           # A22
        lin({(0, 1): 1, (3, 2): -1}),           # A12
        lin({(1, 0): 1, (2, 3): -1}),           # A21
        lin({(0, 2): 1}),                       # B11
        lin({(1, 3): 1}),                       # B22
        lin({(0, 3): 1, (1, 2): 1}),            # B12
        lin({(2, 0): 1}),                       # C11
        lin({(3, 1): 1}),                       # C22
        lin({(2, 1): 1, (3, 0): 1}),            # C12
    ]
    out = np.array(mats)
    out.setflags(write=False)
    return out


BASIS = _basis_matrices()
_BASIS_FLAT = BASIS.reshape(14, 25).T


def basis(name):
    """5x5 matrix of a named basis element, e.g. ``basis("B11")``."""
    return BASIS[BASIS_NAMES.index(name)].copy()


def algebra_defect(m):
    """Distance of a 5x5 matrix from the affine symplectic Lie algebra."""
    m = np.asarray(m, dtype=float)
    M = m[1:, 1:]
    return float(max(np.max(np.abs(m[0])), np.max(np.abs(M.T @ J + J @ M))))


@dataclass(frozen=True)
class AlgebraElement:
    """Element of the Lie algebra given by its 14 basis coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(14)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite algebra coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, **named):
        c = np.zeros(14)
        for k, v in named.items():
            c[BASIS_NAMES.index(k)] = v
        return cls(c)

    @classmethod
    def from_matrix(cls, m, tol=1e-12):
        m = np.asarray(m, dtype=float)
        scale = max(1.0, float(np.max(np.abs(m))))
        if algebra_defect(m) > tol * scale:
            raise NotSymplectic("matrix is not in the affine symplectic algebra")
        c, *_ = np.linalg.lstsq(_BASIS_FLAT, m.reshape(25), rcond=None)
        return cls(c)

    def matrix(self):
        return np.tensordot(self.coeffs, BASIS, axes=1)

    def __add__(self, other):
        return AlgebraElement(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return AlgebraElement(self.coeffs - other.coeffs)

    def __mul__(self, s):
        return AlgebraElement(self.coeffs * float(s))

    __rmul__ = __mul__


def bracket(x, y):
    """Commutator of two algebra elements (or 5x5 matrices)."""
    mx = x.matrix() if isinstance(x, AlgebraElement) else np.asarray(x)
    my = y.matrix() if isinstance(y, AlgebraElement) else np.asarray(y)
    return mx @ my - my @ mx


@dataclass(frozen=True)
class GroupElement:
    """Affine symplectic transformation ``x -> A x + a``.

    Construction rejects linear parts that are not symplectic. The tolerance
    is relative to ``max(1, |A|^2)`` since the defect is quadratic in A.
    """

    a: np.ndarray
    A: np.ndarray
    tol: float = SYMPLECTIC_TOL

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(4)
        A = np.array(self.A, dtype=float).reshape(4, 4)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(A))):
            raise NotSymplectic("non-finite group element")
        scale = max(1.0, float(np.max(np.abs(A))) ** 2)
        d = symplectic_defect(A)
        if d > self.tol * scale:
            raise NotSymplectic(f"linear part not symplectic (defect {d:.3e})")
        a.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", A)

    @classmethod
    def identity(cls):
        return cls(np.zeros(4), np.eye(4))

    @classmethod
    def from_matrix(cls, m, tol=SYMPLECTIC_TOL):
        m = np.asarray(m, dtype=float)
        if m.shape != (5, 5):
            raise ValueError("expected a 5x5 matrix")
        if np.max(np.abs(m[0] - [1, 0, 0, 0, 0])) > 1e-12:
            raise NotSymplectic("first row must be (1, 0, 0, 0, 0)")
        return cls(m[1:, 0], m[1:, 1:], tol)

    def matrix(self):
        m = np.zeros((5, 5))
        m[0, 0] = 1.0
        m[1:, 0] = self.a
        m[1:, 1:] = self.A
        return m

    def __matmul__(self, other):
        """Composition: ``(g @ h) x = g(h(x))``."""
        return GroupElement(self.A @ other.a + self.a, self.A @ other.A,
                            max(self.tol, other.tol))

    def inverse(self):
        Ai = sp_inverse(self.A)
        return GroupElement(-Ai @ self.a, Ai, self.tol)


def act(g, x):
    """``A x + a``; ``x`` may carry leading axes."""
    x = np.asarray(x, dtype=float)
    return x @ g.A.T + g.a


MAX_JET_ORDER = 6


@dataclass(frozen=True)
class CurveJet:
    """Parameter value ``t`` and derivative columns ``X[i] = gamma^(i)(t)``.

    ``X`` has shape ``(k + 1, 4)``.
    """

    t: float
    X: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 4 or X.shape[0] < 1:
            raise ValueError("jet columns must have shape (k+1, 4)")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t", float(self.t))

    @property
    def order(self):
        return self.X.shape[0] - 1


def act_on_jet(g, jet):
    """Translation on ``X[0]`` only, linear part on every column."""
    X = jet.X @ g.A.T
    X[0] += g.a
    return CurveJet(jet.t, X)


def expm_matrix(m, t=1.0):
    """Exponential of a square matrix (or a stack of them).

    Scaling and squaring with a truncated Taylor series: the scaled matrix has
    infinity norm at most 0.5 and the series is summed to 18 terms, well past
    double precision.
    """
    m = np.asarray(m, dtype=float) * t
    n = m.shape[-1]
    norm = float(np.max(np.sum(np.abs(m), axis=-1))) if m.size else 0.0
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    x = m / (2.0 ** s)
    eye = np.broadcast_to(np.eye(n), m.shape)
    term = eye.copy()
    out = eye.copy()
    for k in range(1, 19):
        term = term @ x / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def expm(m, t=1.0, tol=SYMPLECTIC_TOL):
    """Group exponential ``exp(t m)`` of an algebra element or 5x5 matrix."""
    mm = m.matrix() if isinstance(m, AlgebraElement) else np.asarray(m, dtype=float)
    if mm.shape != (5, 5) or not np.all(np.isfinite(mm)):
        raise ValueError("expected a finite 5x5 matrix")
    e = expm_matrix(mm, t)
    e[0] = (1.0, 0.0, 0.0, 0.0, 0.0)
    return GroupElement.from_matrix(e, tol)


def random_algebra(rng, scale=1.0):
    """Random algebra element with normal coefficients."""
    return AlgebraElement(rng.normal(scale=scale, size=14))


def random_group(rng, scale=0.5):
    """Random group element ``exp(m)`` with ``m`` drawn by :func:`random_algebra`."""
    return expm(random_algebra(rng, scale))
