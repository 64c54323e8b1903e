"""Curves in R^4, their jets and symplectic invariants.

Two curve representations are provided. :class:`ClosedForm` wraps a formula
evaluated with truncated Taylor arithmetic, so its jets are exact to roundoff.
:class:`Sampled` holds uniformly spaced points and differentiates them with
central finite-difference stencils.
"""

from dataclasses import dataclass, field
from math import ceil, factorial

import numpy as np
from scipy.integrate import quad, solve_ivp

from .core import MAX_JET_ORDER, CurveJet, expm_matrix, lam, sp_inverse
from .errors import (
    FrameCompletionFailed,
    InflectionPoint,
    InsufficientOrder,
    NotLagrangian,
    OrderTooHigh,
    OrientationViolation,
    OutOfRange,
)
from .taylor import Taylor, taylor_stack


def _check_order(k):
    if k > MAX_JET_ORDER:
        raise OrderTooHigh(f"jet order {k} exceeds {MAX_JET_ORDER}")
    if k < 0:
        raise ValueError("jet order must be non-negative")


class Curve:
    """Common interface: point evaluation and jets."""

    window = None

    def jet(self, t, k):
        _check_order(k)
        return CurveJet(t, self.jets(np.array([t], dtype=float), k)[0])

    def jets(self, ts, k):
        """Derivative columns at many parameters, shape ``(n, k+1, 4)``."""
        raise NotImplementedError

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.jets(np.atleast_1d(t), 0)[:, 0].reshape(t.shape + (4,))

    def default_window(self):
        if self.window is None:
            raise ValueError("a window must be supplied for this curve")
        return self.window


class ClosedForm(Curve):
    """Curve given by a formula ``func(t) -> (x1, x2, x3, x4)``.

    The formula must use numpy ufuncs (``np.sin`` etc.) or arithmetic so that
    it accepts :class:`~lagcurves.taylor.Taylor` arguments. Components may be
    plain constants.
    """

    def __init__(self, func, window=None, name=None):
        self.func = func
        self.window = window
        self.name = name

    def taylor(self, ts, order):
        """Taylor expansion of the curve at each ``ts``, shape ``(n, 4)``."""
        ts = np.asarray(ts, dtype=float)
        T = Taylor.variable(ts, order)
        comps = self.func(T)
        return taylor_stack(comps, order, ts.shape)

    def jets(self, ts, k):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        d = self.taylor(ts, k).derivatives()
        return np.moveaxis(d, 0, -2)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        comps = self.func(t)
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), t.shape)
                         for c in comps], axis=-1)

    def reparametrize(self, h, window=None):
        """The curve ``t -> self(h(t))``; ``h`` must accept Taylor values."""
        f = self.func
        return ClosedForm(lambda t: f(h(t)), window=window, name=self.name)

    def transformed(self, g):
        """Image ``g * gamma`` under a group element."""
        f = self.func
        A, a = g.A, g.a

        def image(t):
            x = list(f(t))
            return [sum(A[i, j] * x[j] for j in range(4)) + a[i] for i in range(4)]

        return ClosedForm(image, window=self.window, name=self.name)


class OrbitCurve(Curve):
    """Curve ``s -> first column of base @ exp(s A)`` for a constant algebra matrix."""

    def __init__(self, A, base=None, window=None, name=None):
        self.A = np.asarray(A, dtype=float)
        self.base = np.eye(5) if base is None else np.asarray(base, dtype=float)
        self.window = window
        self.name = name
        powers = [np.eye(5)]
        for _ in range(16):
            powers.append(powers[-1] @ self.A)
        self._cols = np.array([p[:, 0] for p in powers])

    def frames(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.array([self.base @ expm_matrix(self.A, s) for s in ts])

    def _derivs(self, ts, k):
        F = self.frames(ts)
        return np.einsum("nij,kj->nki", F, self._cols[: k + 1])[..., 1:]

    def jets(self, ts, k):
        return self._derivs(ts, k)

    def taylor(self, ts, order):
        d = self._derivs(ts, order)
        f = np.array([factorial(j) for j in range(order + 1)], dtype=float)
        return Taylor(np.moveaxis(d, 1, 0) / f[:, None, None])


def fornberg_weights(x0, x, m):
    """Finite-difference weights for derivatives 0..m at ``x0`` on nodes ``x``.

    Returns an array ``w`` with ``w[k, j]`` the weight of node ``j`` in the
    k-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


class Sampled(Curve):
    """Uniformly spaced samples ``points[i] = gamma(t0 + i h)``.

    Jets use central stencils of accuracy ``accuracy`` built on every
    ``stride``-th sample. Jets whose stencil would leave the grid are refused.
    """

    MIN_POINTS = 9

    def __init__(self, t0, h, points, accuracy=4, stride=1):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise ValueError("points must have shape (n, 4)")
        if len(pts) < self.MIN_POINTS:
            raise ValueError(f"a sampled curve needs at least {self.MIN_POINTS} points")
        if not (h > 0 and np.isfinite(h)):
            raise ValueError("h must be positive")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite sample")
        if accuracy < 2 or accuracy % 2:
            raise ValueError("accuracy must be a positive even integer")
        pts.setflags(write=False)
        self.t0 = float(t0)
        self.h = float(h)
        self.points = pts
        self.accuracy = int(accuracy)
        self.stride = int(stride)
        self.window = (self.t0, self.t0 + (len(pts) - 1) * self.h)

    @property
    def ts(self):
        return self.t0 + self.h * np.arange(len(self.points))

    def with_stencil(self, accuracy=None, stride=None):
        return Sampled(self.t0, self.h, self.points,
                       self.accuracy if accuracy is None else accuracy,
                       self.stride if stride is None else stride)

    def half_width(self, k):
        return max(2, ceil((self.accuracy + k - 2) / 2))

    def margin(self, k):
        """Parameter distance needed from each end for a jet of order k."""
        return self.half_width(k) * self.stride * self.h

    def jets(self, ts, k):
        _check_order(k)
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        p = self.half_width(k)
        n = len(self.points)
        offsets = self.stride * np.arange(-p, p + 1)
        out = np.empty((len(ts), k + 1, 4))
        cache = {}
        for idx, t in enumerate(ts):
            u = (t - self.t0) / self.h
            i0 = int(np.rint(u))
            if not (-1e-9 <= u <= n - 1 + 1e-9):
                raise OutOfRange(f"t={t} outside the sampled window {self.window}")
            if i0 + offsets[0] < 0 or i0 + offsets[-1] > n - 1:
                raise OutOfRange(f"t={t} too close to the end of the sampled window")
            frac = round(u - i0, 12)
            if frac not in cache:
                w = fornberg_weights(frac, offsets.astype(float), k)
                scale = (1.0 / self.h) ** np.arange(k + 1)
                cache[frac] = w * scale[:, None]
            out[idx] = cache[frac] @ self.points[i0 + offsets]
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = (t - self.t0) / self.h
        i = np.rint(u)
        if np.any(np.abs(u - i) > 1e-9) or np.any(i < 0) or np.any(i > len(self.points) - 1):
            raise OutOfRange("sampled curves are evaluated at grid nodes only")
        return self.points[i.astype(int)]


# invariants


@dataclass(frozen=True)
class InvariantReport:
    """Symplectic curvatures of a jet.

    ``phi`` is the determinant of the first four derivatives and
    ``phi_formula`` the same quantity assembled from curvatures and their
    derivatives; the two agree to roundoff.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    dk1: float
    ddk1: float
    dk2: float
    phi: float
    phi_formula: float

    @property
    def phi_residual(self):
        return abs(self.phi - self.phi_formula)

    def as_dict(self):
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def _lam_table(X):
    n = X.shape[-2]
    L = np.zeros(X.shape[:-2] + (n, n))
    for i in range(n):
        for j in range(n):
            L[..., i, j] = lam(X[..., i, :], X[..., j, :])
    return L


def invariant_arrays(X):
    """Curvatures and their derivatives from derivative columns.

    ``X`` has shape ``(..., k+1, 4)`` with ``k >= 4``. Derivatives of the
    curvatures come from the identities obtained by differentiating
    ``k_i = L(X_i, X_{i+1})``. Returns a dict of arrays; entries that need a
    fifth derivative are present only when ``k >= 5``.
    """
    X = np.asarray(X, dtype=float)
    k = X.shape[-2] - 1
    if k < 4:
        raise InsufficientOrder("curvatures need a jet of order at least 4")
    L = _lam_table(X)
    out = {
        "k1": L[..., 1, 2],
        "k2": L[..., 2, 3],
        "k3": L[..., 3, 4],
        "dk1": L[..., 1, 3],
        "ddk1": L[..., 1, 4] + L[..., 2, 3],
        "dk2": L[..., 2, 4],
        "phi": np.linalg.det(X[..., 1:5, :]),
    }
    if k >= 5:
        out["k4"] = L[..., 4, 5]
        out["dddk1"] = L[..., 1, 5] + 2.0 * out["dk2"]
        out["ddk2"] = L[..., 2, 5] + out["k3"]
        out["dk3"] = L[..., 3, 5]
        out["dphi"] = np.linalg.det(np.stack(
            [X[..., 1, :], X[..., 2, :], X[..., 3, :], X[..., 5, :]], axis=-2))
    if k >= 6:
        out["ddk3"] = L[..., 4, 5] + L[..., 3, 6]
    return out


def phi_from_curvatures(k1, k2, k3, dk1, dk2, ddk1):
    return k2 * k2 - k1 * k3 + dk1 * dk2 - k2 * ddk1


def curvatures(jet):
    """Symplectic curvatures ``k_i = L(X_i, X_{i+1})`` of a jet of order >= 5."""
    if jet.order < 5:
        raise InsufficientOrder("curvatures need a jet of order at least 5")
    d = invariant_arrays(jet.X)
    f = {key: float(v) for key, v in d.items()}
    return InvariantReport(
        k1=f["k1"], k2=f["k2"], k3=f["k3"], k4=f["k4"],
        dk1=f["dk1"], ddk1=f["ddk1"], dk2=f["dk2"], phi=f["phi"],
        phi_formula=phi_from_curvatures(f["k1"], f["k2"], f["k3"],
                                        f["dk1"], f["dk2"], f["ddk1"]),
    )


def invariant_derivatives(jet):
    """All curvature derivatives used by the Maurer-Cartan matrices, as floats."""
    if jet.order < 5:
        raise InsufficientOrder("derivative invariants need a jet of order at least 5")
    return {k: float(v) for k, v in invariant_arrays(jet.X).items()}


# predicates


def _grid(c, window, n, margin_order=0):
    if window is None:
        window = c.default_window()
    a, b = float(window[0]), float(window[1])
    if isinstance(c, Sampled):
        m = c.margin(margin_order)
        a = max(a, c.window[0] + m)
        b = min(b, c.window[1] - m)
        if b < a:
            raise OutOfRange("window too short for the requested jets")
        ia = int(np.ceil((a - c.t0) / c.h - 1e-9))
        ib = int(np.floor((b - c.t0) / c.h + 1e-9))
        idx = np.arange(ia, ib + 1)
        if n is not None and len(idx) > n:
            idx = idx[np.linspace(0, len(idx) - 1, n).round().astype(int)]
        return c.t0 + c.h * idx
    return np.linspace(a, b, 201 if n is None else n)


def _scale(v):
    return np.linalg.norm(v, axis=-1)


def is_lagrangian(c, window=None, tol=1e-8, n=201, rank_tol=1e-10):
    """``(flag, max |L(g', g'')|)`` on a grid over the window.

    The flag also requires g' and g'' to be independent: the smaller singular
    value of ``[g', g'']`` must exceed ``rank_tol`` times the larger one.
    """
    ts = _grid(c, window, n, 2)
    X = c.jets(ts, 2)
    res = float(np.max(np.abs(lam(X[:, 1], X[:, 2]))))
    sv = np.linalg.svd(X[:, 1:3, :], compute_uv=False)
    independent = bool(np.all(sv[:, 1] > rank_tol * np.maximum(sv[:, 0], 1e-300)))
    return (res <= tol and independent), res


def predicates(c, window=None, n=201, tol=1e-8, rel_tol=1e-10):
    """Lagrangian, non-degenerate and linearly full flags on a grid."""
    lagr, _ = is_lagrangian(c, window, tol, n)
    ts = _grid(c, window, n, 4)
    X = c.jets(ts, 4)
    n23 = _scale(X[:, 2]) * _scale(X[:, 3])
    L23 = lam(X[:, 2], X[:, 3])
    nondeg = bool(np.all(np.abs(L23) > rel_tol * np.maximum(n23, 1e-300))) and bool(np.all(n23 > 0))
    norms = np.prod(_scale(X[:, 1:5]), axis=-1)
    det = np.linalg.det(X[:, 1:5, :])
    full = bool(np.all(np.abs(det) > rel_tol * np.maximum(norms, 1e-300))) and bool(np.all(norms > 0))
    if lagr and full:
        # with L(g', g'') = 0 the determinant equals L(g'', g''')^2
        assert nondeg
    return {"lagrangian": lagr, "nondegenerate": nondeg, "linearly_full": full}


# arc length


def _fifth_root(x):
    return np.sign(x) * np.abs(x) ** 0.2


def sigma(c, ts):
    """Symplectic arc element ``L(g'', g''')^(1/5)`` at each parameter."""
    X = c.jets(np.atleast_1d(ts), 3)
    return _fifth_root(lam(X[:, 2], X[:, 3]))


def symplectic_length(c, window=None, epsrel=1e-12):
    if window is None:
        window = c.default_window()
    val, _ = quad(lambda t: float(sigma(c, t)[0]), window[0], window[1],
                  epsabs=1e-13, epsrel=epsrel, limit=400)
    return val


def flip_orientation(c):
    """The same trace run backwards, which changes the sign of L(g'', g''')."""
    if isinstance(c, Sampled):
        return Sampled(-c.window[1], c.h, c.points[::-1], c.accuracy, c.stride)
    if isinstance(c, ClosedForm):
        f = c.func
        w = None if c.window is None else (-c.window[1], -c.window[0])
        return ClosedForm(lambda t: f(-t), window=w, name=c.name)
    raise TypeError("unsupported curve type")


def arclength_reparam(c, window=None, h=1e-2, check_n=201, lagrangian_tol=1e-8):
    """Resample a curve at uniform symplectic arc length.

    Returns ``(Sampled, length)``. The length is an adaptive quadrature of the
    arc element. The parameter ``t(s)`` solves ``dt/ds = 1/sigma(t)`` with a
    high-order adaptive Runge-Kutta method and is read off at uniform ``s``.
    """
    if window is None:
        window = c.default_window()
    ok, res = is_lagrangian(c, window, lagrangian_tol, check_n)
    if not ok:
        raise NotLagrangian(f"curve is not Lagrangian on the window (residual {res:.3e})")
    ts = _grid(c, window, check_n, 3)
    if np.any(sigma(c, ts) <= 0):
        raise OrientationViolation("L(g'', g''') is not positive on the window")
    t0 = float(ts[0])
    t1 = float(ts[-1])
    length = symplectic_length(c, (t0, t1))
    n = max(Sampled.MIN_POINTS, int(ceil(length / h)) + 1)
    s_grid = np.linspace(0.0, length, n)
    sol = solve_ivp(lambda s, t: 1.0 / sigma(c, t), (0.0, length), [t0],
                    method="DOP853", t_eval=s_grid, rtol=1e-13, atol=1e-13)
    t_of_s = sol.y[0]
    t_of_s[-1] = min(t_of_s[-1], t1)
    pts = c(t_of_s) if not isinstance(c, Sampled) else _sampled_values(c, t_of_s)
    return Sampled(0.0, length / (n - 1), pts), length


def _sampled_values(c, ts):
    return c.jets(ts, 0)[:, 0]


# phase portraits


@dataclass(frozen=True)
class PhasePortrait:
    """Planar shadows ``a = (g1, g3)`` and ``b = (-g2, g4)`` on a shared grid.

    Derivatives of both plane curves are kept for the d-pair witness.
    """

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    da: np.ndarray = field(repr=False)
    dda: np.ndarray = field(repr=False)
    db: np.ndarray = field(repr=False)
    ddb: np.ndarray = field(repr=False)

    @property
    def residual(self):
        """max |a' ^ a'' - b' ^ b''| over the grid."""
        return float(np.max(np.abs(_wedge(self.da, self.dda) - _wedge(self.db, self.ddb))))

    def curve_points(self):
        """Inverse coordinate shuffle back to R^4."""
        return np.stack([self.a[:, 0], -self.b[:, 0], self.a[:, 1], self.b[:, 1]], axis=-1)


def _wedge(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _split(X):
    return np.stack([X[..., 0], X[..., 2]], axis=-1), np.stack([-X[..., 1], X[..., 3]], axis=-1)


def phase_portraits(c, window=None, n=201, ts=None):
    if ts is None:
        ts = _grid(c, window, n, 2)
    ts = np.asarray(ts, dtype=float)
    X = c.jets(ts, 2)
    a, b = _split(X[:, 0])
    da, db = _split(X[:, 1])
    dda, ddb = _split(X[:, 2])
    return PhasePortrait(ts, a, b, da, dda, db, ddb)


def dpair_witness(portrait, t, tol=1e-8):
    """``(A, T)`` with det A = 1 matching the 2-jets of a and b at ``t``.

    ``A = (b', b'') (a', a'')^-1`` and ``T = b - A a``.
    """
    scale = max(1e-300, float(np.max(np.abs(portrait.t))) if len(portrait.t) else 1.0)
    hits = np.nonzero(np.abs(portrait.t - t) <= 1e-12 * max(1.0, scale))[0]
    if len(hits) == 0:
        raise OutOfRange(f"t={t} is not on the portrait grid")
    i = int(hits[0])
    Ma = np.column_stack([portrait.da[i], portrait.dda[i]])
    Mb = np.column_stack([portrait.db[i], portrait.ddb[i]])
    wa = _wedge(portrait.da[i], portrait.dda[i])
    size = np.linalg.norm(portrait.da[i]) * np.linalg.norm(portrait.dda[i])
    if abs(wa) <= tol * max(size, 1e-300):
        raise InflectionPoint(f"a has an inflection at t={t}")
    A = Mb @ np.linalg.inv(Ma)
    T = portrait.b[i] - A @ portrait.a[i]
    return A, T


# osculating curve


@dataclass(frozen=True)
class NullCheck:
    """Lower-left block ``[[c11, c12], [c21, c22]]`` of ``E^-1 E'`` along the curve."""

    t: np.ndarray
    c: np.ndarray
    null_residual: float
    min_witness: float


def minimal_normal_columns(k1, dk1, ddk1, k2, dk2, k3):
    """Normalized columns of the minimal-order section, shape ``(..., 4, 4)``."""
    k1 = np.asarray(k1, dtype=float)
    z = np.zeros_like(k1)
    o = np.ones_like(k1)
    rows = [
        [o, z, z, z],
        [z, o, z, -k3 / k2],
        [z, k1, dk1, ddk1 - k2],
        [z, z, k2, dk2],
    ]
    return np.moveaxis(np.array([[np.broadcast_to(e, k1.shape) for e in r] for r in rows]),
                       (0, 1), (-2, -1))


def osculating_null_check(c, window=None, n=201, tol=1e-12):
    """Null-curve residual of the osculating Lagrangian planes.

    Uses the minimal-order frame, whose first two vectors are g' and g'' on a
    Lagrangian curve, and its exact derivative
    ``E' = ((X2..X5) - E N') N^-1``.
    """
    ts = _grid(c, window, n, 5)
    X = c.jets(ts, 5)
    d = invariant_arrays(X)
    k2, phi = d["k2"], d["phi"]
    size = np.prod(_scale(X[:, 1:5]), axis=-1)
    if np.any(np.abs(k2 * phi) <= tol * np.maximum(size, 1e-300) ** 1.5) or np.any(size == 0):
        raise FrameCompletionFailed("g' and g'' do not extend to a symplectic frame")
    N = minimal_normal_columns(d["k1"], d["dk1"], d["ddk1"], k2, d["dk2"], d["k3"])
    z = np.zeros_like(k2)
    dN = np.moveaxis(np.array([
        [z, z, z, z],
        [z, z, z, -(d["dk3"] * k2 - d["k3"] * d["dk2"]) / k2 ** 2],
        [z, d["dk1"], d["ddk1"], d["dddk1"] - d["dk2"]],
        [z, z, d["dk2"], d["ddk2"]],
    ]), (0, 1), (-2, -1))
    Xp = np.moveaxis(X[:, 1:5, :], -1, -2)
    Ninv = np.linalg.inv(N)
    E = Xp @ Ninv
    dE = (np.moveaxis(X[:, 2:6, :], -1, -2) - E @ dN) @ Ninv
    Einv = np.array([sp_inverse(e) for e in E])
    C = (Einv @ dE)[:, 2:4, 0:2]
    c11, c21, c22 = C[:, 0, 0], C[:, 0, 1], C[:, 1, 1]
    null = float(np.max(np.abs(c11 * c22 - c21 ** 2)))
    wit = float(np.min(c11 ** 2 + c22 ** 2 + c21 ** 2))
    return NullCheck(ts, C, null, wit)
