"""Lagrangian tori swept by a quadric profile along a closed directrix.

For a closed arc-length curve g with constant curvatures (k3 > 0 and
k = k3^2 - k4 > 0) and a closed unit-speed curve (x, y, z) on the quadric
``x^2 + k3 y^2 - z^2 = h`` the map

    f(s, theta) = g(s) + x E2 + ((sqrt(k) z - 1) / k) E3 + y E4

is a Lagrangian immersion of a torus.
"""

import csv
from dataclasses import dataclass
from math import pi, sqrt
from pathlib import Path

import numpy as np

from .classify import ClassCase, closedness, generate
from .core import lam
from .errors import CurvatureWindowViolated, EmptyBranch, InvalidParameters, IoError, NotClosed
from .frames import lagrangian_frame_taylor

QUADRIC_TOL = 1e-9
SPEED_TOL = 1e-8


@dataclass(frozen=True)
class QuadricProfile:
    """Closed unit-speed curve on the quadric, built from an angle psi.

    The curve is ``z = z0 + delta sin(psi)``, ``x = r cos(psi)``,
    ``y = r sin(psi) / sqrt(k3)`` with ``r = sqrt(h + z^2)``; ``delta = 0``
    gives the planar ellipse. ``theta`` is Euclidean arc length.
    """

    h: float
    k3: float
    z0: float
    delta: float = 0.0
    _coef: np.ndarray = None
    length: float = None

    @property
    def branch(self):
        return "+" if self.z0 > 0 else "-"

    def _psi_values(self, psi):
        z = self.z0 + self.delta * np.sin(psi)
        dz = self.delta * np.cos(psi)
        r = np.sqrt(self.h + z * z)
        dr = z * dz / r
        w = 1.0 / sqrt(self.k3)
        x = r * np.cos(psi)
        y = r * np.sin(psi) * w
        dx = dr * np.cos(psi) - r * np.sin(psi)
        dy = (dr * np.sin(psi) + r * np.cos(psi)) * w
        return np.stack([x, y, z], -1), np.stack([dx, dy, dz], -1)

    def speed(self, psi):
        return np.linalg.norm(self._psi_values(psi)[1], axis=-1)

    def arclength(self, psi):
        """Arc length from psi = 0, from the Fourier series of the speed."""
        psi = np.asarray(psi, dtype=float)
        c = self._coef
        k = np.arange(1, len(c))
        ph = np.exp(1j * np.multiply.outer(psi, k)) - 1.0
        return c[0].real * psi + 2.0 * np.real(ph @ (c[1:] / (1j * k)))

    def psi(self, theta):
        """Monotone inversion of the arc length by Newton's method."""
        theta = np.asarray(theta, dtype=float)
        p = theta / self.length * 2 * pi
        for _ in range(50):
            step = (self.arclength(p) - theta) / self.speed(p)
            p = p - step
            if np.max(np.abs(step), initial=0.0) < 1e-15:
                break
        return p

    def __call__(self, theta):
        """Points and unit tangents ``(alpha, alpha')`` at ``theta``."""
        p = self.psi(theta)
        a, da = self._psi_values(p)
        return a, da / self.speed(p)[..., None]

    def quadric_residual(self, theta):
        a, _ = self(theta)
        return np.abs(a[..., 0] ** 2 + self.k3 * a[..., 1] ** 2 - a[..., 2] ** 2 - self.h)


def _speed_coefficients(prof, n=64):
    # Fourier coefficients of the periodic speed, refined until the tail is negligible
    while True:
        psi = 2 * pi * np.arange(n) / n
        with np.errstate(invalid="ignore", divide="ignore"):
            v = prof.speed(psi)
        if not np.all(v > 1e-12):
            raise InvalidParameters("profile has a stationary point")
        c = np.fft.rfft(v) / n
        if np.max(np.abs(c[-4:])) <= 1e-17 * abs(c[0]) or n >= 1 << 16:
            return c
        n *= 2


def make_profile(h, k3, branch="+", z0=None, kind="ellipse", delta=0.0):
    """Closed unit-speed profile on the quadric ``x^2 + k3 y^2 - z^2 = h``.

    ``kind="ellipse"`` is the section z = z0; ``kind="wave"`` lets z oscillate
    as ``z0 + delta sin(psi)``. Without ``z0`` the height is
    ``+-sqrt(|h| + 1)`` on the requested branch.
    """
    h, k3 = float(h), float(k3)
    if not k3 > 0:
        raise EmptyBranch("the quadric profile needs k3 > 0")
    if branch not in ("+", "-"):
        raise InvalidParameters("branch must be '+' or '-'")
    sign = 1.0 if branch == "+" else -1.0
    if z0 is None:
        z0 = sign * sqrt(abs(h) + 1.0)
    z0 = float(z0)
    if kind == "ellipse":
        delta = 0.0
    elif kind != "wave":
        raise InvalidParameters(f"unknown profile kind {kind!r}")
    delta = float(delta)
    if z0 == 0.0:
        raise EmptyBranch("z0 = 0 meets the plane z = 0 (the vertex when h = 0)")
    if np.sign(z0) != sign:
        raise EmptyBranch(f"z0 = {z0} is not on branch {branch}")
    if abs(delta) >= abs(z0):
        raise EmptyBranch("z changes sign along the profile")
    zmin = abs(z0) - abs(delta)
    if h + zmin * zmin <= 0:
        raise EmptyBranch(f"h + z^2 <= 0 for h={h}, z0={z0}: no closed curve")
    prof = QuadricProfile(h, k3, z0, delta)
    coef = _speed_coefficients(prof)
    object.__setattr__(prof, "_coef", coef)
    object.__setattr__(prof, "length", float(2 * pi * coef[0].real))
    return prof


@dataclass(frozen=True)
class TorusMesh:
    s: np.ndarray
    theta: np.ndarray
    vertices: np.ndarray
    residual: np.ndarray
    residual_direct: np.ndarray
    periods: tuple
    period_defects: tuple
    min_singular_value: float

    @property
    def shape(self):
        return self.vertices.shape[:2]

    def faces(self):
        return quad_faces(*self.shape)

    def summary(self):
        return {
            "grid": list(self.shape),
            "periods": list(self.periods),
            "max_residual": float(np.max(np.abs(self.residual))),
            "max_residual_direct": float(np.max(np.abs(self.residual_direct))),
            "period_defect_s": self.period_defects[0],
            "period_defect_theta": self.period_defects[1],
            "min_singular_value": self.min_singular_value,
        }


def quad_faces(ns, nt):
    """0-based quads of a doubly periodic grid, consistently wound."""
    i, j = np.meshgrid(np.arange(ns), np.arange(nt), indexing="ij")
    i1, j1 = (i + 1) % ns, (j + 1) % nt
    idx = lambda a, b: a * nt + b
    return np.stack([idx(i, j), idx(i1, j), idx(i1, j1), idx(i, j1)], -1).reshape(-1, 4)


def lint_faces(faces):
    """True when every directed edge appears once and its reverse once."""
    edges = {}
    for f in faces:
        for a, b in zip(f, np.roll(f, -1)):
            edges[(int(a), int(b))] = edges.get((int(a), int(b)), 0) + 1
    return all(n == 1 and edges.get((b, a)) == 1 for (a, b), n in edges.items())


def _directrix(directrix):
    if isinstance(directrix, ClassCase):
        from .classify import case_constants
        k3, k4 = case_constants(directrix)
    else:
        k3, k4 = map(float, directrix)
    if not (k3 > 0 and k3 * k3 - k4 > 0):
        raise CurvatureWindowViolated(f"need k3 > 0 and k3^2 - k4 > 0, got k3={k3}, k4={k4}")
    info = closedness(k3, k4)
    if info is None:
        raise NotClosed(f"the curve with k3={k3}, k4={k4} is not closed")
    return k3, k4, info


def _evaluate(curve, k3, k, prof, s, theta):
    g, E, _ = lagrangian_frame_taylor(curve, s, 1)
    g0, dg = g.c[0], g.c[1]
    E0, dE = E.c[0], E.c[1]
    a, da = prof(theta)
    x, y, z = a[..., 0], a[..., 1], a[..., 2]
    dx, dy, dz = da[..., 0], da[..., 1], da[..., 2]
    rk = sqrt(k)
    w = (rk * z - 1.0) / k
    coeff = np.stack([np.zeros_like(x), x, w, y], -1)
    F = g0[:, None, :] + np.einsum("sij,tj->sti", E0, coeff)
    # tangents as displayed
    cs = np.stack([rk * z, -k3 * y, -y, x], -1)
    ct = np.stack([np.zeros_like(x), dx, dz / rk, dy], -1)
    fs = np.einsum("sij,tj->sti", E0, cs)
    ft = np.einsum("sij,tj->sti", E0, ct)
    # tangents from the frame derivative
    fs_direct = dg[:, None, :] + np.einsum("sij,tj->sti", dE, coeff)
    return F, fs, ft, fs_direct


def molding_surface(directrix, profile, grid=(256, 256)):
    """Vertices, Lagrangian residuals and period defects of the torus.

    ``directrix`` is a :class:`ClassCase` or a pair ``(k3, k4)``; it must be
    a closed curve. The residual is ``Lambda(f_s, f_theta)`` with the
    displayed tangent vectors; ``residual_direct`` uses ``f_s`` obtained by
    differentiating the frame.
    """
    k3, k4, info = _directrix(directrix)
    if abs(profile.k3 - k3) > 1e-12 * max(1.0, k3):
        raise InvalidParameters("profile and directrix have different k3")
    ns, nt = (int(v) for v in grid)
    if ns < 2 or nt < 2:
        raise InvalidParameters("grid needs at least 2x2 vertices")
    curve = generate(ClassCase("I.2.b", info.mu, info.nu))
    k = k3 * k3 - k4
    lg, la = info.length, profile.length
    s = lg * np.arange(ns) / ns
    theta = la * np.arange(nt) / nt
    speed = np.linalg.norm(profile(theta)[1], axis=-1)
    if np.max(np.abs(speed - 1.0)) > SPEED_TOL:
        raise InvalidParameters("profile is not unit speed")
    if np.max(profile.quadric_residual(theta)) > QUADRIC_TOL * max(1.0, abs(profile.h)):
        raise InvalidParameters("profile leaves the quadric")
    F, fs, ft, fsd = _evaluate(curve, k3, k, profile, s, theta)
    res = lam(fs, ft)
    res_direct = lam(fsd, ft)
    Fs, _, _, _ = _evaluate(curve, k3, k, profile, s + lg, theta)
    Ft, _, _, _ = _evaluate(curve, k3, k, profile, s, theta + la)
    defects = (float(np.max(np.linalg.norm(Fs - F, axis=-1))),
               float(np.max(np.linalg.norm(Ft - F, axis=-1))))
    jac = np.stack([fs, ft], -1)
    smin = float(np.min(np.linalg.svd(jac, compute_uv=False)[..., -1]))
    if not smin > 0:
        raise InvalidParameters("the molding map is not an immersion on the grid")
    return TorusMesh(s, theta, F, res, res_direct, (lg, la), defects, smin)


PROJECTIONS = {
    "drop1": lambda v: v[:, [1, 2, 3]],
    "drop2": lambda v: v[:, [0, 2, 3]],
    "drop3": lambda v: v[:, [0, 1, 3]],
    "drop4": lambda v: v[:, [0, 1, 2]],
    "portrait-a": lambda v: np.stack([v[:, 0], v[:, 2], -v[:, 1]], -1),
    "portrait-b": lambda v: np.stack([-v[:, 1], v[:, 3], v[:, 0]], -1),
}

CSV_HEADER = ["s", "theta", "x1", "x2", "x3", "x4", "residual"]


def _fmt(x):
    return "%.17g" % x


def export_csv(mesh, path):
    """Rows ``s, theta, x1..x4, residual`` with s the slow index."""
    ns, nt = mesh.shape
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for i in range(ns):
                for j in range(nt):
                    v = mesh.vertices[i, j]
                    w.writerow([_fmt(mesh.s[i]), _fmt(mesh.theta[j]), *map(_fmt, v), _fmt(mesh.residual[i, j])])
    except OSError as exc:
        raise IoError(str(exc)) from None
    return Path(path)


def load_mesh_csv(path):
    """Rows of a mesh CSV as a float array with the header's column order."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(str(exc)) from None
    if not rows or rows[0] != CSV_HEADER:
        raise IoError(f"{path}: not a mesh CSV")
    return np.array([[float(x) for x in r] for r in rows[1:]])


def export_obj(mesh, path, projection="drop4", sidecar=True):
    """Wavefront OBJ of an R^3 projection plus the full CSV sidecar.

    Faces are 1-based quads with periodic wrap. The sidecar has the same
    stem with suffix ``.csv``.
    """
    if projection not in PROJECTIONS:
        raise InvalidParameters(f"unknown projection {projection!r}")
    verts = PROJECTIONS[projection](mesh.vertices.reshape(-1, 4))
    faces = mesh.faces() + 1
    path = Path(path)
    try:
        with open(path, "w") as fh:
            fh.write(f"# projection {projection}\n")
            for v in verts:
                fh.write("v %s %s %s\n" % tuple(_fmt(x) for x in v))
            for f in faces:
                fh.write("f %d %d %d %d\n" % tuple(f))
    except OSError as exc:
        raise IoError(str(exc)) from None
    side = None
    if sidecar:
        side = export_csv(mesh, path.with_suffix(".csv"))
    return path, side


def export_mesh(mesh, path, format="obj", projection="drop4"):
    fmt = format.lower()
    if fmt == "obj":
        return export_obj(mesh, path, projection)
    if fmt == "csv":
        return export_csv(mesh, path)
    raise InvalidParameters(f"unknown mesh format {format!r}")
