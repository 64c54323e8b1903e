"""First variation of the symplectic arc length on Lagrangian curves.

Along an arc-length Lagrangian curve set ``k1 = -k3`` and
``k2 = k3^2 - k4``. Variations are written in the minimal frame,
``v = v1 E1 + v2 E2 + v3 E3 + v4 E4``; they preserve the Lagrangian condition
to first order exactly when ``v2 = (v3'' - 3 v4') / 2``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .curves import _grid, invariant_arrays
from .errors import (
    LagrangianViolated, NotArcLength, NotFull, NotLagrangian, SmoothnessInsufficient,
    VariationNotAdmissible,
)
from .frames import _lam_taylor, lagrangian_frame_taylor
from .taylor import Taylor

ADMISSIBLE_TOL = 1e-9
ARCLENGTH_TOL = 1e-6


class Bump:
    """``amplitude * (1 - x^2)^n`` with ``x = (s - center) / radius``.

    Zero outside the support; ``n - 1`` derivatives vanish at its ends.
    Taylor arguments are evaluated with the polynomial formula.
    """

    def __init__(self, center, radius, n=8, amplitude=1.0):
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.center = float(center)
        self.radius = float(radius)
        self.n = int(n)
        self.amplitude = float(amplitude)

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    @property
    def smoothness(self):
        return self.n - 1

    def __call__(self, s):
        if isinstance(s, Taylor):
            x = (s - self.center) / self.radius
            out = (1.0 - x * x) ** self.n * self.amplitude
            # the expansion vanishes identically off the open support
            return Taylor(out.c * (np.abs(x.c[0]) < 1))
        x = (np.asarray(s, dtype=float) - self.center) / self.radius
        return np.where(np.abs(x) < 1, self.amplitude * np.clip(1 - x * x, 0, None) ** self.n, 0.0)

    def as_dict(self):
        return {"center": self.center, "radius": self.radius, "n": self.n, "amplitude": self.amplitude}


def bump(center, radius, n=8, amplitude=1.0):
    return Bump(center, radius, n, amplitude)


class Zero:
    support = None
    smoothness = np.inf

    def __call__(self, s):
        if isinstance(s, Taylor):
            return s * 0.0
        return np.zeros_like(np.asarray(s, dtype=float))


class BumpSum:
    """Sum of bumps; supported on the hull of their supports."""

    def __init__(self, bumps):
        self.bumps = list(bumps)
        if not self.bumps:
            raise ValueError("empty bump sum")

    @property
    def support(self):
        return _support_of(self.bumps)

    @property
    def smoothness(self):
        return min(b.smoothness for b in self.bumps)

    def __call__(self, s):
        out = self.bumps[0](s)
        for b in self.bumps[1:]:
            out = out + b(s)
        return out


def _smoothness(f):
    if isinstance(f, (Bump, Zero, BumpSum)):
        return f.smoothness
    try:
        f(Taylor.variable(np.zeros(1), 6))
    except Exception:
        return -1
    return np.inf


def _eval(f, T):
    v = f(T)
    if not isinstance(v, Taylor):
        return Taylor.constant(np.broadcast_to(v, T.shape), T.order)
    return v


@dataclass
class Variation:
    """Frame components ``v1..v4`` and the support interval K.

    The components are callables accepting floats, arrays and :class:`Taylor`
    values of the identity variable. ``v2`` is ``None`` when it is derived
    from the admissibility constraint.
    """

    v1: object
    v3: object
    v4: object
    support: tuple
    v2: object = None
    smoothness: float = field(default=np.inf)

    def components(self, T):
        """Taylor expansions of v1..v4 at the identity variable ``T``."""
        lift = Taylor.variable(T.c[0], T.order + 2)
        v3 = _eval(self.v3, lift)
        v4 = _eval(self.v4, lift)
        if self.v2 is None:
            v2 = (v3.deriv().deriv() - v4.deriv().truncate(T.order) * 3.0) * 0.5
        else:
            v2 = _eval(self.v2, T)
        return (_eval(self.v1, T), v2.truncate(T.order), v3.truncate(T.order), v4.truncate(T.order))

    def admissibility_defect(self, ts):
        if self.v2 is None:
            return 0.0
        T = Taylor.variable(ts, 2)
        v2 = _eval(self.v2, T).c[0]
        v3 = _eval(self.v3, T).derivatives()
        v4 = _eval(self.v4, T).derivatives()
        return float(np.max(np.abs(v2 - 0.5 * (v3[2] - 3 * v4[1]))))


def _support_of(fs):
    sup = [f.support for f in fs if getattr(f, "support", None) is not None]
    if not sup:
        return None
    return (min(a for a, _ in sup), max(b for _, b in sup))


def make_admissible(v3=None, v4=None, v1=None, support=None):
    """Variation with ``v2 = (v3'' - 3 v4') / 2``.

    Components default to zero. ``support`` is required for callables that
    are not :class:`Bump` objects and must contain the bumps' supports.
    """
    v1 = Zero() if v1 is None else v1
    v3 = Zero() if v3 is None else v3
    v4 = Zero() if v4 is None else v4
    s3, s4, s1 = _smoothness(v3), _smoothness(v4), _smoothness(v1)
    if s3 < 2:
        raise SmoothnessInsufficient("v3 must be twice differentiable")
    if s4 < 1:
        raise SmoothnessInsufficient("v4 must be differentiable")
    if s1 < 0:
        raise SmoothnessInsufficient("v1 must be continuous")
    inner = _support_of([v1, v3, v4])
    if support is None:
        support = inner if inner is not None else (0.0, 0.0)
    support = (float(support[0]), float(support[1]))
    if inner is not None and (inner[0] < support[0] - 1e-12 or inner[1] > support[1] + 1e-12):
        raise VariationNotAdmissible("component supports are not inside the support interval")
    # v2 loses two derivatives of v3 and one of v4
    smooth = min(s1, s3 - 2, s4 - 1)
    return Variation(v1, v3, v4, support, None, smooth)


@dataclass(frozen=True)
class GeodesicReport:
    s: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    el_v3: np.ndarray
    el_v4: np.ndarray
    sup_dk1: float
    sup_k2: float
    tol: float

    @property
    def verdict(self):
        return bool(self.sup_dk1 <= self.tol and self.sup_k2 <= self.tol)

    def as_dict(self):
        return {"verdict": self.verdict, "sup_dk1": self.sup_dk1, "sup_k2": self.sup_k2,
                "k1_mean": float(np.mean(self.k1)), "k2_mean": float(np.mean(self.k2)),
                "tol": self.tol}


def el_residual(curve, window=None, n=201, tol=1e-8):
    """Euler-Lagrange data ``2 k2 + k1''`` and ``k1'`` along the curve.

    The verdict is true when ``sup |k1'|`` and ``sup |k2|`` are at most
    ``tol * max(1, k3^2, |k4|)``.
    """
    ts = _grid(curve, window, n, 6)
    X = curve.jets(ts, 6)
    d = invariant_arrays(X)
    scale = max(1.0, float(np.max(d["k3"] ** 2)), float(np.max(np.abs(d["k4"]))))
    if np.max(np.abs(d["k2"] - 1.0)) > ARCLENGTH_TOL:
        raise NotArcLength(f"k2 deviates from 1 by {np.max(np.abs(d['k2'] - 1.0)):.3g}")
    if np.max(np.abs(d["k1"])) > 1e-8 * scale:
        raise NotLagrangian("k1 does not vanish")
    if np.min(np.abs(d["phi"])) <= 1e-12 * scale:
        raise NotFull("the curve is not linearly full")
    k1 = -d["k3"]
    k2 = d["k3"] ** 2 - d["k4"]
    dk1 = -d["dk3"]
    ddk1 = -d["ddk3"]
    return GeodesicReport(ts, k1, k2, 2 * k2 + ddk1, dk1,
                          float(np.max(np.abs(dk1))), float(np.max(np.abs(k2))), tol * scale)


def _nodes(support, nodes):
    a, b = support
    if not b > a:
        raise VariationNotAdmissible("empty support")
    nodes = max(int(nodes), 2001)
    if nodes % 2 == 0:
        nodes += 1
    return np.linspace(a, b, nodes)


def _curvature_taylor(curve, ts, order):
    # k1 = -k3 and k2 = k3^2 - k4 as Taylor series along the nodes
    G = curve.taylor(ts, order + 5)
    X = [G]
    for _ in range(5):
        X.append(X[-1].deriv())
    k3 = _lam_taylor(X[3], X[4]).truncate(order)
    k4 = _lam_taylor(X[4], X[5]).truncate(order)
    return -k3, k3 * k3 - k4


def el1_integrals(curve, var, nodes=2001):
    """``int_K ((2 k2 + k1'') v3 + k1' v4) ds`` and the raw integral before
    integration by parts, both by composite Simpson."""
    s = _nodes(var.support, nodes)
    k1, k2 = _curvature_taylor(curve, s, 3)
    d1 = k1.derivatives()
    kk2 = k2.c[0]
    T = Taylor.variable(s, 4)
    v3 = _eval(var.v3, T).derivatives()
    v4 = _eval(var.v4, T).derivatives()
    reduced = (2 * kk2 + d1[2]) * v3[0] + d1[1] * v4[0]
    raw = (2 * kk2 * v3[0] + d1[0] * v3[2] + 2 * v3[4]
           + 3 * d1[1] * v4[0] + 2 * d1[0] * v4[1] - 5 * v4[3])
    return float(simpson(reduced, x=s)), float(simpson(raw, x=s))


def raw_vs_reduced(curve, var, nodes=4001):
    """Raw and reduced integrals and their difference."""
    red, raw = el1_integrals(curve, var, nodes)
    return {"reduced": red, "raw": raw, "difference": abs(red - raw)}


CORRECTOR_STEPS = 4


def _perturbed_sigma(curve, var, s, u):
    """Arc element of the corrected variation ``g + u v + c E2`` on nodes."""
    order = 3 + 2 * CORRECTOR_STEPS
    g, E, _ = lagrangian_frame_taylor(curve, s, order)
    T = Taylor.variable(s, order)
    comps = var.components(T)
    coef = Taylor(np.stack([c.c for c in comps], -1))
    base = g + _apply(E, coef) * u
    E2 = E[..., 1]
    c = Taylor.constant(np.zeros_like(s), order)
    for _ in range(CORRECTOR_STEPS):
        cur = base + E2 * Taylor(c.c[..., None])
        d1 = cur.deriv()
        r = _lam_taylor(d1, d1.deriv())
        c = c.truncate(r.order) + r * 0.5
        base = base.truncate(c.order)
        E2 = E2.truncate(c.order)
    gu = base + E2 * Taylor(c.c[..., None])
    d1 = gu.deriv()
    d2 = d1.deriv()
    d3 = d2.deriv()
    residual = float(np.max(np.abs(_lam_taylor(d1, d2).c[0])))
    return _lam_taylor(d2, d3).c[0], residual


def _apply(E, coef):
    # sum_j coef_j E_j for Taylor E of shape (n, 4, 4) and coef of shape (n, 4)
    K = min(E.order, coef.order)
    out = np.zeros((K + 1,) + coef.shape)
    for k in range(K + 1):
        for j in range(k + 1):
            out[k] += np.einsum("nij,nj->ni", E.c[j], coef.c[k - j])
    return Taylor(out)


@dataclass(frozen=True)
class FirstVariation:
    fd: float
    el1: float
    analytic: float
    raw: float
    eps: float
    lagrangian_residual: float

    def as_dict(self):
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def first_variation(curve, var, eps=1e-4, nodes=2001, lagrangian_tol=1e-10):
    """Central difference of the symplectic length over K.

    ``el1`` is ``int_K ((2 k2 + k1'') v3 + k1' v4)``; ``analytic`` is the
    derivative of the length, one fifth of it, since the arc element is
    ``Lambda(g'', g''')^(1/5)``. The step actually used is ``eps`` divided
    by the largest derivative (orders 0 to 3) of the components when that
    exceeds one, so that ``u v`` stays a small perturbation of the 3-jet.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not var.support[1] > var.support[0]:
        # the zero variation
        return FirstVariation(0.0, 0.0, 0.0, 0.0, eps, 0.0)
    s = _nodes(var.support, nodes)
    if var.admissibility_defect(s) > ADMISSIBLE_TOL:
        raise VariationNotAdmissible("v2 != (v3'' - 3 v4') / 2")
    eps = eps / max(1.0, variation_size(var, s))
    lengths = []
    worst = 0.0
    for u in (eps, -eps):
        lam23, res = _perturbed_sigma(curve, var, s, u)
        worst = max(worst, res)
        if res > lagrangian_tol or np.min(lam23) <= 0:
            raise LagrangianViolated(f"perturbed curve has Lagrangian residual {res:.3g}")
        lengths.append(simpson(lam23 ** 0.2, x=s))
    fd = float((lengths[0] - lengths[1]) / (2 * eps))
    el1, raw = el1_integrals(curve, var, nodes)
    return FirstVariation(fd, el1, el1 / 5.0, raw, eps, worst)


def variation_size(var, s):
    """Largest ``|v_j^(k)|`` for k <= 3 on the nodes."""
    comps = var.components(Taylor.variable(s, 3))
    return float(max(np.max(np.abs(c.derivatives())) for c in comps))


def random_variation(rng, window=(-2.0, 2.0), n=8, scale=0.1):
    """Admissible variation with random bumps inside ``window``."""
    a, b = window
    width = b - a

    def one():
        r = rng.uniform(0.3, 0.5) * width
        c = rng.uniform(a + r, b - r)
        return Bump(c, r, n, rng.normal() * scale)

    return make_admissible(v3=one(), v4=one(), v1=one(), support=(a, b))
