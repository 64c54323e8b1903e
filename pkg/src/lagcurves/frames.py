"""Moving frames and Serret-Frenet matrices for three cross-sections.

Conventions: a frame is ``F = [[1, 0], [p, E]]`` with ``E`` symplectic, the
inverse of the moving frame map. Each section fixes ``E`` through its matrix
of normalized columns ``N`` by ``(X1 .. X4) = E N`` and ``p = X0``. The
Serret-Frenet matrix ``K`` satisfies ``F' = F K`` along a curve.

* ``generic`` needs ``k1 != 0`` and ``phi != 0``.
* ``minimal`` needs ``k2 != 0`` and ``phi != 0``; its first two frame vectors
  are g' and g'' on Lagrangian curves.
* ``gram-schmidt`` needs ``k2 != 0`` and ``phi != 0`` and is built from the
  symplectic Gram-Schmidt matrix R with ``E = (X1 .. X4) R``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import GroupElement, algebra_defect, lam, symplectic_defect
from .curves import invariant_arrays, minimal_normal_columns
from .taylor import Taylor
from .errors import InsufficientOrder, NotSymplectic, SectionNotTransverse

FRAME_TOL = 1e-9
TRANSVERSALITY_TOL = 1e-12


class CrossSection(str, Enum):
    GENERIC = "generic"
    MINIMAL = "minimal"
    GRAM_SCHMIDT = "gram-schmidt"


@dataclass(frozen=True)
class MovingFrame:
    """Origin ``p`` and symplectic basis ``E`` (columns E1..E4)."""

    p: np.ndarray
    E: np.ndarray
    tol: float = FRAME_TOL

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(4)
        E = np.array(self.E, dtype=float).reshape(4, 4)
        scale = max(1.0, float(np.max(np.abs(E))) ** 2)
        if not np.all(np.isfinite(E)) or symplectic_defect(E) > self.tol * scale:
            raise NotSymplectic("frame vectors are not a symplectic basis")
        p.setflags(write=False)
        E.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "E", E)

    @classmethod
    def identity(cls):
        return cls(np.zeros(4), np.eye(4))

    @classmethod
    def from_matrix(cls, m, tol=FRAME_TOL):
        m = np.asarray(m, dtype=float)
        return cls(m[1:, 0], m[1:, 1:], tol)

    def matrix(self):
        m = np.eye(5)
        m[1:, 0] = self.p
        m[1:, 1:] = self.E
        return m

    def group_element(self):
        return GroupElement(self.p, self.E, max(self.tol, 1e-10))


@dataclass(frozen=True)
class MaurerCartanData:
    section: CrossSection
    K: np.ndarray
    tau: float


# normalized columns


def _inv(inv, *names):
    try:
        return [inv[n] for n in names]
    except KeyError as exc:
        raise InsufficientOrder(f"missing invariant {exc.args[0]}") from None


def normalized_columns(section, inv):
    """Matrix ``N`` of normalized columns (iota X1 .. iota X4)."""
    section = CrossSection(section)
    if section is CrossSection.MINIMAL:
        k1, dk1, ddk1, k2, dk2, k3 = _inv(inv, "k1", "dk1", "ddk1", "k2", "dk2", "k3")
        return minimal_normal_columns(k1, dk1, ddk1, k2, dk2, k3)
    if section is CrossSection.GRAM_SCHMIDT:
        k1, dk1, k2, dk2, k3, phi = _inv(inv, "k1", "dk1", "k2", "dk2", "k3", "phi")
        return np.array([
            [dk1 / k2, 1.0, 0.0, -k3 / k2],
            [1.0, 0.0, 0.0, 0.0],
            [-k1, 0.0, k2, dk2],
            [0.0, 0.0, 0.0, -phi / k2],
        ])
    k1, dk1, ddk1, k2, dk2, phi = _inv(inv, "k1", "dk1", "ddk1", "k2", "dk2", "phi")
    return np.array([
        [1.0, 0.0, -k2 / k1, -dk2 / k1],
        [0.0, 0.0, -k1, -2.0 * dk1],
        [0.0, k1, dk1, ddk1 - k2],
        [0.0, 0.0, 0.0, phi / k1 ** 2],
    ])


def gram_schmidt_R(X):
    """Symplectic Gram-Schmidt matrix R built from the pairings L(Xi, Xj)."""
    L = lambda i, j: float(lam(X[i], X[j]))
    phi = float(np.linalg.det(X[1:5]))
    L23 = L(2, 3)
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [1.0, -L(1, 3) / L23, 0.0, -L(3, 4) / phi],
        [0.0, L(1, 2) / L23, 1.0 / L23, L(2, 4) / phi],
        [0.0, 0.0, 0.0, -L23 / phi],
    ])


def _transversality(section, inv, size=1.0, tol=TRANSVERSALITY_TOL):
    k1, k2, phi = inv["k1"], inv["k2"], inv["phi"]
    # phi counts as two pairings
    if section is CrossSection.GENERIC:
        val, dims = k1 ** 3 * phi, 5
    elif section is CrossSection.MINIMAL:
        val, dims = k2 * phi, 3
    else:
        val, dims = k2 ** 2 * phi, 4
    if not np.isfinite(val) or abs(val) <= tol * size ** dims:
        raise SectionNotTransverse(
            f"{section.value} section is not transverse here (value {val:.3e})")


def frame(jet, section=CrossSection.MINIMAL, tol=TRANSVERSALITY_TOL):
    """Moving frame of a jet of order >= 4 for the given cross-section."""
    section = CrossSection(section)
    if jet.order < 4:
        raise InsufficientOrder("frames need a jet of order at least 4")
    X = jet.X
    inv = {k: float(v) for k, v in invariant_arrays(X[:5]).items()}
    # rough size of one pairing L(Xi, Xj), used to scale the guard
    size = float(np.prod(np.linalg.norm(X[1:5], axis=1))) ** 0.5
    _transversality(section, inv, max(size, 1e-300), tol)
    Xp = X[1:5].T
    if section is CrossSection.GRAM_SCHMIDT:
        E = Xp @ gram_schmidt_R(X)
    else:
        E = Xp @ np.linalg.inv(normalized_columns(section, inv))
    return MovingFrame(X[0], E)


def frame_minimal(jet):
    return frame(jet, CrossSection.MINIMAL)


def frame_gram_schmidt(jet):
    return frame(jet, CrossSection.GRAM_SCHMIDT)


def frame_generic(jet):
    return frame(jet, CrossSection.GENERIC)


# Serret-Frenet matrices


def tau_minimal(inv):
    k2, dk2, ddk2, k3, dk3, k4, phi = _inv(inv, "k2", "dk2", "ddk2", "k3", "dk3", "k4", "phi")
    return (k2 ** 2 * k4 - k2 * dk2 * dk3 + k2 * k3 * ddk2 - k2 * k3 ** 2) / phi ** 2


def tau_gram_schmidt(inv):
    k2, dk2, ddk2, k3, dk3, k4, phi = _inv(inv, "k2", "dk2", "ddk2", "k3", "dk3", "k4", "phi")
    return (k4 - (dk2 * dk3 - k3 * ddk2 + k3 ** 2) / k2) * k2 ** 2 / phi ** 2


def tau_generic(inv):
    """Fifth-order invariant of the generic section, term by term as published."""
    k1, dk1, ddk1, dddk1, k2, dk2, ddk2, k4, phi, dphi = _inv(
        inv, "k1", "dk1", "ddk1", "dddk1", "k2", "dk2", "ddk2", "k4", "phi", "dphi")
    p2 = phi ** 2
    return (k1 ** 4 / p2 * k4
            + k1 ** 3 * dk2 / p2 * dddk1
            - (ddk1 - k2) * k1 ** 3 / p2 * ddk2
            + 2.0 * dk1 * k1 ** 2 / p2 * dphi
            - 2.0 * k1 ** 2 / phi * (2.0 * ddk1 - k2)
            - k1 ** 2 / p2 * (k2 * dk1 * dk2 + k2 * ddk1 ** 2 - 2.0 * ddk1 * k2 ** 2
                              + 2.0 * dk2 ** 2 * k1 - ddk1 * dk1 * dk2 + k2 ** 3))


def _embed(rows):
    K = np.zeros((5, 5))
    K[1:, :] = np.array(rows, dtype=float)
    return K


def serret_matrix(section, inv, tol=TRANSVERSALITY_TOL):
    """Serret-Frenet matrix ``K`` with ``F' = F K`` and the fifth-order invariant.

    ``inv`` maps names (k1, dk1, ddk1, dddk1, k2, dk2, ddk2, k3, dk3, k4, phi,
    dphi) to values, e.g. from :func:`lagcurves.curves.invariant_derivatives`.
    ``phi`` and ``dphi`` are filled in from the curvatures when absent.
    """
    section = CrossSection(section)
    inv = complete_invariants(inv)
    _transversality(section, inv, 1.0, tol)
    k1, dk1, k2, k3, phi = inv["k1"], inv["dk1"], inv["k2"], inv["k3"], inv["phi"]
    if section is CrossSection.MINIMAL:
        t = tau_minimal(inv)
        K = _embed([
            [1, 0, k1 * t, -t, dk1 * t / k2],
            [0, 1, -k1 * dk1 * t / k2, dk1 * t / k2, -(dk1 ** 2 * t + k3) / k2 ** 2],
            [0, k1, 0, 0, -1],
            [0, 0, k2 + k1 ** 2 * t, -k1 * t, k1 * dk1 * t / k2],
        ])
    elif section is CrossSection.GRAM_SCHMIDT:
        t = tau_gram_schmidt(inv)
        K = _embed([
            [dk1 / k2, 0, phi / k2 ** 2, -k3 / k2 ** 2, 0],
            [1, 0, 0, 0, -t],
            [-k1, k2, 0, 0, 0],
            [0, 0, -k1 * phi / k2 ** 2, -phi / k2 ** 2, 0],
        ])
    else:
        t = tau_generic(inv)
        K = _embed([
            [1, 0, 0, -k2 / k1 ** 2, -1],
            [0, 0, 0, -1, -t],
            [0, k1, 0, 0, 0],
            [0, 0, -phi / k1 ** 3, 0, 0],
        ])
    return MaurerCartanData(section, K, float(t))


def printed_pullback(section, inv):
    """The pulled-back Maurer-Cartan form as it is usually displayed.

    For the minimal and Gram-Schmidt sections this is exactly ``-K``. For the
    generic section the displayed linear block carries the opposite sign, so
    it differs from ``-K`` there; see the tests.
    """
    section = CrossSection(section)
    data = serret_matrix(section, inv)
    if section is CrossSection.GENERIC:
        inv = complete_invariants(inv)
        k1, k2, phi, t = inv["k1"], inv["k2"], inv["phi"], data.tau
        return -_embed([
            [1, 0, 0, k2 / k1 ** 2, 1],
            [0, 0, 0, 1, t],
            [0, -k1, 0, 0, 0],
            [0, 0, phi / k1 ** 3, 0, 0],
        ])
    return -data.K


def complete_invariants(inv):
    inv = dict(inv)
    inv.setdefault("k1", 0.0)
    for name in ("dk1", "ddk1", "dddk1", "dk2", "ddk2", "dk3"):
        inv.setdefault(name, 0.0)
    k1, k2, k3 = inv["k1"], inv["k2"], inv["k3"]
    dk1, ddk1, dddk1 = inv["dk1"], inv["ddk1"], inv["dddk1"]
    dk2, ddk2, dk3 = inv["dk2"], inv["ddk2"], inv["dk3"]
    inv.setdefault("phi", k2 ** 2 - k1 * k3 + dk1 * dk2 - k2 * ddk1)
    inv.setdefault("dphi", 2 * k2 * dk2 - dk1 * k3 - k1 * dk3 + dk1 * ddk2 - k2 * dddk1)
    return inv


def lagrangian_arclength_matrix(k3, k4):
    """Constant-curvature matrix A for k1 = 0, k2 = 1."""
    return _embed([
        [1, 0, 0, k3 ** 2 - k4, 0],
        [0, 1, 0, 0, -k3],
        [0, 0, 0, 0, -1],
        [0, 0, 1, 0, 0],
    ])


def _lam_taylor(x, y):
    return (x[..., 0] * y[..., 2] + x[..., 1] * y[..., 3]
            - x[..., 2] * y[..., 0] - x[..., 3] * y[..., 1])


def lagrangian_frame_taylor(curve, ts, order):
    """Taylor expansions of gamma and of the minimal frame of an arc-length
    Lagrangian curve.

    With k1 = 0 and k2 = 1 the frame is ``E = (X1, X2, -X4 - k3 X2, X3)``.
    Returns ``(gamma, E, k3)``; ``E`` has shape ``(n, 4, 4)`` with columns
    E1..E4, all expanded to ``order``.
    """
    G = curve.taylor(ts, order + 4)
    X = [G]
    for _ in range(4):
        X.append(X[-1].deriv())
    X1, X2, X3, X4 = (x.truncate(order) for x in X[1:])
    k3 = _lam_taylor(X3, X4)
    E3 = -X4 - X2 * Taylor(k3.c[..., None])
    E = Taylor(np.stack([X1.c, X2.c, E3.c, X3.c], axis=-1))
    return G.truncate(order), E, k3


def is_in_algebra(K, tol=1e-12):
    scale = max(1.0, float(np.max(np.abs(K))))
    return algebra_defect(K) <= tol * scale


__all__ = [
    "CrossSection", "MovingFrame", "MaurerCartanData", "frame", "frame_minimal",
    "frame_gram_schmidt", "frame_generic", "normalized_columns", "gram_schmidt_R",
    "serret_matrix", "printed_pullback", "tau_minimal", "tau_gram_schmidt",
    "tau_generic", "lagrangian_arclength_matrix", "lagrangian_frame_taylor", "complete_invariants",
]
