"""Lagrangian curves with constant curvatures.

Arc-length parametrized Lagrangian curves with constant ``k3``, ``k4`` are
orbits of one-parameter subgroups. They fall into nine cases according to the
roots of ``z^2 + k3 z + (k3^2 - k4)`` with ``z = lambda^2``. The
discriminant of that quadratic is ``D = 4 k4 - 3 k3^2``.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, pi, sqrt

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .core import AlgebraElement
from .curves import ClosedForm, OrbitCurve
from .errors import InvalidParameters, UnsupportedCase
from .frames import lagrangian_arclength_matrix

CASES = ("I.1", "I.2.a", "I.2.b", "I.2.c", "II.1", "II.2", "III.1", "III.2", "IV")
TWO_PARAMETER = ("I.1", "I.2.a", "I.2.b", "I.2.c")
ONE_PARAMETER = ("II.1", "II.2", "III.1", "III.2")
GEODESIC_CASES = ("II.1", "II.2", "IV")


@dataclass(frozen=True)
class ClassCase:
    tag: str
    mu: float = None
    nu: float = None

    def __post_init__(self):
        if self.tag not in CASES:
            raise InvalidParameters(f"unknown case {self.tag!r}")

    def as_dict(self):
        return {"case": self.tag, "mu": self.mu, "nu": self.nu}


def validate(case):
    """Check the parameter constraints of a case; return the case."""
    t, mu, nu = case.tag, case.mu, case.nu
    if t == "IV":
        return case
    if mu is None or not (np.isfinite(mu) and mu > 0):
        raise InvalidParameters(f"case {t} needs mu > 0")
    if t in TWO_PARAMETER:
        if nu is None or not (np.isfinite(nu) and nu > 0):
            raise InvalidParameters(f"case {t} needs nu > 0")
        if t in ("I.2.a", "I.2.b") and not mu > nu:
            raise InvalidParameters(f"case {t} needs mu > nu")
    return case


def case_constants(case):
    """``(k3, k4)`` of a case."""
    validate(case)
    t, m2 = case.tag, (case.mu or 0.0) ** 2
    n2 = (case.nu or 0.0) ** 2
    if t == "I.1":
        return 2 * (n2 - m2), (m2 - 3 * n2) * (3 * m2 - n2)
    if t == "I.2.a":
        return -(m2 + n2), m2 * m2 + m2 * n2 + n2 * n2
    if t == "I.2.b":
        return m2 + n2, m2 * m2 + m2 * n2 + n2 * n2
    if t == "I.2.c":
        return m2 - n2, m2 * m2 - m2 * n2 + n2 * n2
    if t == "II.1":
        return -m2, m2 * m2
    if t == "II.2":
        return m2, m2 * m2
    if t == "III.1":
        return 2 * m2, 3 * m2 * m2
    if t == "III.2":
        return -2 * m2, 3 * m2 * m2
    return 0.0, 0.0


def classify(k3, k4, tol=1e-12):
    """Case tag and parameters of the constant curvatures ``(k3, k4)``.

    Boundary sets are decided against ``tol * max(1, k3^2, |k4|)``; ties go to
    the more degenerate case.
    """
    k3 = float(k3)
    k4 = float(k4)
    if not (np.isfinite(k3) and np.isfinite(k4)):
        raise InvalidParameters("curvatures must be finite")
    eps = tol * max(1.0, k3 * k3, abs(k4))
    q = k3 * k3 - k4
    D = 4.0 * k4 - 3.0 * k3 * k3
    if k3 * k3 <= eps and abs(k4) <= eps:
        return ClassCase("IV")
    if abs(q) <= eps:
        return ClassCase("II.2", sqrt(k3)) if k3 > 0 else ClassCase("II.1", sqrt(-k3))
    if abs(D) <= 4.0 * eps:
        return ClassCase("III.1", sqrt(k3 / 2)) if k3 > 0 else ClassCase("III.2", sqrt(-k3 / 2))
    if D < 0:
        r = sqrt(q)
        return ClassCase("I.1", sqrt((r - k3 / 2) / 2), sqrt((r + k3 / 2) / 2))
    sD = sqrt(D)
    if q < 0:
        return ClassCase("I.2.c", sqrt((k3 + sD) / 2), sqrt((sD - k3) / 2))
    if k3 > 0:
        return ClassCase("I.2.b", sqrt((k3 + sD) / 2), sqrt((k3 - sD) / 2))
    return ClassCase("I.2.a", sqrt((-k3 + sD) / 2), sqrt((-k3 - sD) / 2))


def expected_roots(case):
    """Eigenvalues of the constant Serret-Frenet matrix, with multiplicity."""
    validate(case)
    t, mu, nu = case.tag, case.mu, case.nu
    if t == "I.1":
        r = [complex(sm * mu, sn * nu) for sm in (1, -1) for sn in (1, -1)]
    elif t == "I.2.a":
        r = [mu, -mu, nu, -nu]
    elif t == "I.2.b":
        r = [1j * mu, -1j * mu, 1j * nu, -1j * nu]
    elif t == "I.2.c":
        r = [1j * mu, -1j * mu, nu, -nu]
    elif t == "II.1":
        r = [mu, -mu, 0, 0]
    elif t == "II.2":
        r = [1j * mu, -1j * mu, 0, 0]
    elif t == "III.1":
        r = [1j * mu, 1j * mu, -1j * mu, -1j * mu]
    elif t == "III.2":
        r = [mu, mu, -mu, -mu]
    else:
        r = [0, 0, 0, 0]
    return np.array([0j] + [complex(x) for x in r])


def matrix_roots(k3, k4, cluster=1e-5):
    """Eigenvalues of the constant Serret-Frenet matrix.

    Eigenvalues of a defective matrix split by about sqrt(eps); each cluster
    closer than ``cluster`` is replaced by its mean, which is accurate to
    roundoff.
    """
    ev = np.linalg.eigvals(lagrangian_arclength_matrix(k3, k4))
    scale = max(1.0, float(np.max(np.abs(ev))))
    out = ev.copy()
    seen = np.zeros(len(ev), dtype=bool)
    for i in range(len(ev)):
        if seen[i]:
            continue
        grp = np.abs(ev - ev[i]) <= cluster * scale
        grp &= ~seen
        out[grp] = ev[grp].mean()
        seen |= grp
    return out


def root_mismatch(a, b):
    """Max distance under the best one-to-one matching of two multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c]))


# closed forms


def _closed_form(tag, mu, nu):
    sin, cos, sinh, cosh = np.sin, np.cos, np.sinh, np.cosh
    if tag == "I.1":
        m2, n2 = mu * mu, nu * nu
        w = m2 + n2
        a1 = (m2 - 3 * n2) * mu / w
        b = 0.5 / (w * w * mu * nu)
        c2 = 0.5 * (m2 - 3 * n2) / ((n2 - 3 * m2) * w * w * n2)
        c3 = 0.5 * (3 * m2 - n2) / ((m2 - 3 * n2) * w * w * m2)
        a4 = (n2 - 3 * m2) * nu / w

        def f(s):
            return (a1 * cos(nu * s) * sinh(mu * s),
                    -b * sin(nu * s) * sinh(mu * s) + c2 * cos(nu * s) * cosh(mu * s),
                    -b * sin(nu * s) * sinh(mu * s) + c3 * cos(nu * s) * cosh(mu * s),
                    a4 * sin(nu * s) * cosh(mu * s))
        return f
    if tag in ("I.2.a", "I.2.b", "I.2.c"):
        c = 1.0 / sqrt(mu * mu - nu * nu) if tag != "I.2.c" else 1.0 / sqrt(mu * mu + nu * nu)
        an = c / nu ** 1.5
        am = c / mu ** 1.5
        if tag == "I.2.a":
            return lambda s: (an * sinh(nu * s), am * cosh(mu * s), an * cosh(nu * s), am * sinh(mu * s))
        if tag == "I.2.b":
            return lambda s: (an * sin(nu * s), am * cos(mu * s), an * cos(nu * s), am * sin(mu * s))
        return lambda s: (-an * sinh(nu * s), am * cos(mu * s), an * cosh(nu * s), am * sin(mu * s))
    if tag == "II.1":
        a = mu ** -2.5
        return lambda s: (s, a * cosh(mu * s), s * s / (2 * mu * mu), a * sinh(mu * s))
    if tag == "II.2":
        a = mu ** -2.5
        return lambda s: (s, a * cos(mu * s), -s * s / (2 * mu * mu), a * sin(mu * s))
    if tag == "III.1":
        m2 = mu * mu
        return lambda s: (s * cos(mu * s) / m2,
                          s * sin(mu * s) / mu + 3 * cos(mu * s) / m2,
                          -cos(mu * s) / (2 * m2),
                          -sin(mu * s) / (2 * m2 * mu))
    if tag == "III.2":
        m2 = mu * mu
        return lambda s: (s * cosh(mu * s) / m2,
                          s * sinh(mu * s) / mu - 3 * cosh(mu * s) / m2,
                          -cosh(mu * s) / (2 * m2),
                          sinh(mu * s) / (2 * m2 * mu))
    r24, r12 = sqrt(24.0), sqrt(12.0)
    return lambda s: (s / r24, s * s / r12, -(s ** 4) / r24, s ** 3 / r12)


POLE_TOL = 1e-6


def near_pole(case):
    """True where the closed form of case I.1 is singular (there k4 = 0)."""
    if case.tag != "I.1":
        return False
    m2, n2 = case.mu ** 2, case.nu ** 2
    return min(abs(m2 - 3 * n2), abs(n2 - 3 * m2)) <= POLE_TOL * (m2 + n2)


def generate(case, window=(-2.0, 2.0)):
    """Arc-length curve of a case.

    Returns the closed form of the case. Near the two poles of the I.1
    formula the orbit ``s -> exp(s A) e0`` of the constant Serret-Frenet
    matrix is returned instead; it has the same curvatures.
    """
    validate(case)
    if near_pole(case):
        k3, k4 = case_constants(case)
        return OrbitCurve(lagrangian_arclength_matrix(k3, k4), window=window, name=case.tag)
    return ClosedForm(_closed_form(case.tag, case.mu, case.nu), window=window, name=case.tag)


def orbit_curve(k3, k4, window=(-2.0, 2.0)):
    """The orbit ``exp(s A) e0`` with the identity as initial frame."""
    return OrbitCurve(lagrangian_arclength_matrix(k3, k4), window=window)


def one_parameter_generator(case):
    """Algebra element X and point p with ``exp(s X) p`` equal to the curve.

    Available for case I.2.b, where X = mu (C22 - B22) + nu (B11 - C11).
    """
    validate(case)
    if case.tag != "I.2.b":
        raise UnsupportedCase(f"no one-parameter generator for case {case.tag}")
    mu, nu = case.mu, case.nu
    X = AlgebraElement.from_dict(C22=mu, B22=-mu, B11=nu, C11=-nu)
    d = mu * mu - nu * nu
    p = np.array([0.0, (mu ** 3 * d) ** -0.5, (nu ** 3 * d) ** -0.5, 0.0])
    return X, p


# closedness


@dataclass(frozen=True)
class TorusKnotInfo:
    m: int
    n: int
    length: float
    period: float
    mu: float
    nu: float
    ratio_error: float
    confidence: float

    def as_dict(self):
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def closed_window(k3, k4):
    """The open region ``k3 > 0, k3^2 > k4 > 3 k3^2 / 4``."""
    return k3 > 0 and k3 * k3 > k4 > 0.75 * k3 * k3


def closedness(k3, k4, tol=1e-9, max_den=64, period_tol=1e-9):
    """Torus-knot data of a closed constant-curvature curve, or ``None``.

    The frequency ratio mu/nu is approximated by continued fractions with
    denominators up to ``max_den``; it counts as rational when the error is
    at most ``tol * mu / nu``. The symplectic length is the fundamental
    period found by :func:`fundamental_period`, not a formula.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    k3, k4 = float(k3), float(k4)
    if not closed_window(k3, k4):
        return None
    sD = sqrt(4 * k4 - 3 * k3 * k3)
    mu = sqrt((k3 + sD) / 2)
    nu = sqrt((k3 - sD) / 2)
    ratio = mu / nu
    frac = Fraction(ratio).limit_denominator(max_den)
    m, n = frac.numerator, frac.denominator
    err = abs(ratio - m / n)
    allowed = tol * ratio
    if err > allowed or gcd(m, n) != 1:
        return None
    curve = generate(ClassCase("I.2.b", mu, nu))
    T_max = 2 * pi * max_den / min(mu, nu)
    T = fundamental_period(curve.func, 2 * pi / max(mu, nu), T_max, period_tol)
    if T is None:
        return None
    return TorusKnotInfo(m, n, T, T, mu, nu, err, 1.0 - err / allowed)


def fundamental_period(func, scale, T_max, tol=1e-9, samples=64, oversample=40):
    """Smallest T > 0 with ``max_s |g(s + T) - g(s)| <= tol`` on a grid of s.

    The squared defect is scanned on a grid of T with spacing
    ``scale / oversample``; each local minimum is refined by root finding on
    the derivative of the squared defect, and the first candidate meeting the
    tolerance is returned. ``None`` when there is none below ``T_max``.
    """
    s = np.linspace(0.0, scale, samples, endpoint=False)
    g0 = np.stack(func(s), axis=-1)

    def pts(T):
        return np.stack(func(s + T), axis=-1)

    def vel(T, h=1e-6):
        return (pts(T + h) - pts(T - h)) / (2 * h)

    def sq(T):
        return float(np.sum((pts(T) - g0) ** 2))

    def dsq(T):
        return float(np.sum((pts(T) - g0) * vel(T)))

    dT = scale / oversample
    Ts = np.arange(dT, T_max + dT, dT)
    # vectorized scan over all T at once, chunked to bound memory
    vals = np.empty(len(Ts))
    for i in range(0, len(Ts), 2048):
        chunk = Ts[i:i + 2048]
        P = np.stack(func(s[None, :] + chunk[:, None]), axis=-1)
        vals[i:i + 2048] = np.sum((P - g0[None]) ** 2, axis=(1, 2))
    mins = [i for i in range(1, len(Ts) - 1) if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]]
    for i in mins:
        a, b = Ts[i - 1], Ts[i + 1]
        try:
            T = brentq(dsq, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        except ValueError:
            T = Ts[i]
        defect = float(np.max(np.linalg.norm(pts(T) - g0, axis=1)))
        if defect <= tol:
            return T
    return None


def lcm_length_formula(m, n, nu):
    """``2 pi lcm(m, n) / (nu n)``, kept for comparison with the oracle."""
    from math import lcm
    return 2 * pi * lcm(m, n) / (nu * n)
