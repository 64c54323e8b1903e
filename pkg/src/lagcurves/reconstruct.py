"""Curves from prescribed curvatures by Lie-group integration of F' = F K.

Each step multiplies the frame by the exponential of an algebra element, so
the linear part stays symplectic up to roundoff and the drift measured on the
output is a genuine bug detector.
"""

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.interpolate import CubicSpline

from .core import GroupElement, J, expm_matrix, sp_inverse
from .curves import Sampled, fornberg_weights
from .errors import NotFull, ProfileSingularity, SectionNotTransverse, StepRejected
from .frames import CrossSection, MovingFrame, frame, serret_matrix
from .taylor import Taylor

DERIV_ORDER = 3


class Tabulated:
    """Curvature function given on a grid, interpolated by a cubic spline.

    Calling it on a :class:`Taylor` value returns the spline's derivatives
    as Taylor coefficients.
    """

    def __init__(self, s, values):
        self.s = np.asarray(s, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.spline = CubicSpline(self.s, self.values)

    def __call__(self, x):
        if isinstance(x, Taylor):
            if x.order >= 1 and (np.any(x.c[1] != 1.0) or np.any(x.c[2:] != 0)):
                raise TypeError("tabulated profiles accept the identity variable only")
            t = x.c[0]
            c = np.zeros_like(x.c)
            fact = 1.0
            for k in range(min(x.order, 3) + 1):
                if k:
                    fact *= k
                c[k] = self.spline(t, k) / fact
            return Taylor(c)
        return self.spline(x)


def _as_callable(f):
    if f is None or callable(f):
        return f
    value = float(f)
    return lambda s: value


@dataclass
class CurvatureProfile:
    """Curvature functions of arc length.

    ``k1`` is ``None`` for the Lagrangian pipeline (k1 = 0, minimal section)
    and a function for the generic section. Each entry may be a constant, a
    :class:`Tabulated` object or a callable written with numpy ufuncs.
    """

    k2: object
    k3: object
    k4: object
    k1: object = None

    def __post_init__(self):
        self.k2 = _as_callable(self.k2)
        self.k3 = _as_callable(self.k3)
        self.k4 = _as_callable(self.k4)
        self.k1 = _as_callable(self.k1)

    @property
    def section(self):
        return CrossSection.MINIMAL if self.k1 is None else CrossSection.GENERIC

    def invariants(self, s):
        """Curvatures and the derivatives needed by K at each ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        d2 = _derivs(self.k2, s, 2)
        d3 = _derivs(self.k3, s, 1)
        d4 = _derivs(self.k4, s, 0)
        out = {"k2": d2[0], "dk2": d2[1], "ddk2": d2[2],
               "k3": d3[0], "dk3": d3[1], "k4": d4[0]}
        if self.k1 is None:
            z = np.zeros_like(s)
            out.update(k1=z, dk1=z, ddk1=z, dddk1=z)
        else:
            d1 = _derivs(self.k1, s, 3)
            out.update(k1=d1[0], dk1=d1[1], ddk1=d1[2], dddk1=d1[3])
        return out


def _derivs(f, s, order):
    T = Taylor.variable(s, order)
    try:
        val = f(T)
    except (TypeError, ValueError):
        return _fd_derivs(f, s, order)
    if isinstance(val, Taylor):
        return val.derivatives()[: order + 1] * np.ones_like(s)
    out = np.zeros((order + 1,) + s.shape)
    out[0] = val
    return out


def _fd_derivs(f, s, order, h=1e-2):
    offsets = np.arange(-4, 5, dtype=float)
    w = fornberg_weights(0.0, offsets, order) / h ** np.arange(order + 1)[:, None]
    vals = np.array([[float(f(x + o * h)) for o in offsets] for x in s])
    return (vals @ w.T).T


def profile_matrices(profile, s):
    """Serret-Frenet matrices K(s) for the profile's section."""
    inv = profile.invariants(s)
    section = profile.section
    out = np.empty((len(np.atleast_1d(s)), 5, 5))
    for i in range(out.shape[0]):
        row = {k: float(v[i]) for k, v in inv.items()}
        if abs(row["k2"]) <= 1e-12 and section is CrossSection.MINIMAL:
            raise ProfileSingularity(f"k2 vanishes near s={np.atleast_1d(s)[i]}")
        try:
            out[i] = serret_matrix(section, row).K
        except SectionNotTransverse as exc:
            raise ProfileSingularity(str(exc)) from None
    return out


def _check_k2(profile, s):
    """Reject k2 vanishing or changing sign on the sampled points ``s``."""
    if profile.section is not CrossSection.MINIMAL:
        return
    k2 = _derivs(profile.k2, np.asarray(s, dtype=float), 0)[0]
    bad = np.nonzero((np.abs(k2) <= 1e-12) | (np.sign(k2) != np.sign(k2[0])))[0]
    if len(bad):
        raise ProfileSingularity(f"k2 vanishes or changes sign near s={s[bad[0]]}")


@dataclass(frozen=True)
class ReconstructionResult:
    s: np.ndarray
    frames: np.ndarray
    drift: float

    @property
    def curve(self):
        return self.frames[:, 1:, 0]

    def frame_at(self, i):
        return MovingFrame.from_matrix(self.frames[i])

    def sampled(self, accuracy=8, stride=1):
        """Uniform-grid output as a :class:`Sampled` curve."""
        h = np.diff(self.s)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0):
            raise ValueError("output grid is not uniform")
        return Sampled(self.s[0], h[0], self.curve, accuracy, stride)


def frame_drift(frames):
    E = frames[:, 1:, 1:]
    d = np.einsum("nji,jk,nkl->nil", E, J, E) - J
    return float(np.max(np.abs(d)))


_G = sqrt(3.0) / 6.0


def _step_factors(profile, s, h, order):
    if order == 2:
        K = profile_matrices(profile, s + 0.5 * h)
        return [expm_matrix(k, hh) for k, hh in zip(K, np.broadcast_to(h, s.shape))]
    if order == 4:
        hs = np.broadcast_to(h, s.shape)
        K1 = profile_matrices(profile, s + (0.5 - _G) * hs)
        K2 = profile_matrices(profile, s + (0.5 + _G) * hs)
        out = []
        for a, b, hh in zip(K1, K2, hs):
            omega = 0.5 * hh * (a + b) + (sqrt(3.0) / 12.0) * hh * hh * (a @ b - b @ a)
            out.append(expm_matrix(omega))
        return out
    raise ValueError("order must be 2 or 4")


def _init_matrix(init):
    if init is None:
        return np.eye(5)
    if isinstance(init, (MovingFrame, GroupElement)):
        return init.matrix()
    return MovingFrame.from_matrix(init).matrix()


def integrate(profile, s_range, h=1e-3, init=None, order=2):
    """Integrate the Serret-Frenet system on a uniform grid.

    One step is ``F <- F expm(h K(s + h/2))`` (order 2) or the two-stage
    Gauss-Magnus step with a commutator correction (order 4). The step is
    adjusted so that a whole number of steps covers ``s_range``.
    """
    s0, s1 = float(s_range[0]), float(s_range[1])
    if not h > 0:
        raise ValueError("h must be positive")
    if s1 <= s0:
        raise ValueError("empty integration range")
    n = max(1, int(round((s1 - s0) / h)))
    h = (s1 - s0) / n
    s = s0 + h * np.arange(n + 1)
    _check_k2(profile, np.sort(np.concatenate([s, s[:-1] + 0.5 * h])))
    factors = _step_factors(profile, s[:-1], h, order)
    frames = np.empty((n + 1, 5, 5))
    frames[0] = _init_matrix(init)
    for i, f in enumerate(factors):
        frames[i + 1] = frames[i] @ f
    frames[:, 0] = (1.0, 0.0, 0.0, 0.0, 0.0)
    return ReconstructionResult(s, frames, frame_drift(frames))


def integrate_adaptive(profile, s_range, tol=1e-10, h0=1e-2, h_min=1e-6, order=4, init=None):
    """Step-doubling adaptive integration on a non-uniform grid.

    A step is accepted when one step of size h and two of size h/2 agree to
    ``tol`` in the max norm; otherwise h is halved. Falling below ``h_min``
    raises :class:`StepRejected`.
    """
    s0, s1 = float(s_range[0]), float(s_range[1])
    _check_k2(profile, np.linspace(s0, s1, 1001))
    F = _init_matrix(init)
    s_list, frames = [s0], [F]
    s, h = s0, h0
    p = order + 1
    while s < s1 - 1e-15:
        h = min(h, s1 - s)
        full = _step_factors(profile, np.array([s]), h, order)[0]
        half1 = _step_factors(profile, np.array([s]), h / 2, order)[0]
        half2 = _step_factors(profile, np.array([s + h / 2]), h / 2, order)[0]
        a = F @ full
        b = F @ half1 @ half2
        err = float(np.max(np.abs(a - b)))
        if err <= tol:
            s += h
            F = b
            s_list.append(s)
            frames.append(F)
            h = h * min(2.0, 0.9 * (tol / max(err, 1e-300)) ** (1.0 / p))
        else:
            h = h * max(0.2, 0.9 * (tol / err) ** (1.0 / p))
            if h < h_min:
                raise StepRejected(f"step size fell below {h_min} at s={s}")
    frames = np.array(frames)
    frames[:, 0] = (1.0, 0.0, 0.0, 0.0, 0.0)
    return ReconstructionResult(np.array(s_list), frames, frame_drift(frames))


def congruence_align(c1, c2, section=CrossSection.MINIMAL, index=None):
    """Group element g with ``g * c1 ~ c2``, aligning frames at one sample.

    Both curves must be :class:`Sampled` on the same grid. Frames are taken
    at the first sample that admits a jet of order 4 (or at ``index``).
    Returns ``(g, residual)`` with residual ``max_i |g * c1(t_i) - c2(t_i)|``.
    """
    if len(c1.points) != len(c2.points) or abs(c1.h - c2.h) > 1e-12 * c1.h or abs(c1.t0 - c2.t0) > 1e-12:
        raise ValueError("curves must share one parameter grid")
    if index is None:
        index = int(np.ceil(c1.margin(4) / c1.h - 1e-9))
    t = c1.t0 + index * c1.h
    try:
        F1 = frame(c1.jet(t, 4), section).matrix()
        F2 = frame(c2.jet(t, 4), section).matrix()
    except SectionNotTransverse as exc:
        raise NotFull(str(exc)) from None
    inv1 = np.eye(5)
    inv1[1:, 1:] = sp_inverse(F1[1:, 1:])
    inv1[1:, 0] = -inv1[1:, 1:] @ F1[1:, 0]
    g = F2 @ inv1
    A = g[1:, 1:]
    a = g[1:, 0]
    residual = float(np.max(np.linalg.norm(c1.points @ A.T + a - c2.points, axis=1)))
    return GroupElement(a, A, 1e-8), residual
