"""Fast invariant checks run by ``lagcurves selftest``."""

import numpy as np

from .classify import CASES, ClassCase, case_constants, classify, closedness, generate
from .core import act_on_jet, expm_matrix, random_group
from .curves import ClosedForm, curvatures, dpair_witness, osculating_null_check, phase_portraits
from .frames import lagrangian_arclength_matrix
from .geodesics import el_residual, make_admissible, bump, first_variation
from .reconstruct import CurvatureProfile, integrate
from .tori import make_profile, molding_surface


def _params(tag, rng):
    mu = rng.uniform(0.6, 1.6)
    if tag in ("I.2.a", "I.2.b"):
        return ClassCase(tag, mu, mu * rng.uniform(0.2, 0.8))
    if tag in ("I.1", "I.2.c"):
        nu = rng.uniform(0.3, 1.2)
        if tag == "I.1":
            while min(abs(mu * mu - 3 * nu * nu), abs(nu * nu - 3 * mu * mu)) < 0.1:
                nu = rng.uniform(0.3, 1.2)
        return ClassCase(tag, mu, nu)
    if tag == "IV":
        return ClassCase("IV")
    return ClassCase(tag, mu)


def check_invariance(rng):
    curve = ClosedForm(lambda t: (np.sin(t), np.cos(2 * t) + t, t ** 3 / 6, np.exp(0.3 * t)))
    worst = 0.0
    for _ in range(5):
        jet = curve.jet(rng.uniform(-1, 1), 5)
        g = random_group(rng)
        a, b = curvatures(jet), curvatures(act_on_jet(g, jet))
        for name in ("k1", "k2", "k3", "k4", "phi"):
            x, y = getattr(a, name), getattr(b, name)
            worst = max(worst, abs(x - y) / max(1.0, abs(x)))
    return worst <= 1e-9, f"max relative change {worst:.2e}"


def check_classification(rng):
    worst = 0.0
    for tag in CASES:
        case = _params(tag, rng)
        k3, k4 = case_constants(case)
        rep = curvatures(generate(case).jet(0.2, 5))
        worst = max(worst, abs(rep.k1), abs(rep.k2 - 1), abs(rep.k3 - k3), abs(rep.k4 - k4))
        back = classify(k3, k4)
        if back.tag != tag:
            return False, f"{tag} classified as {back.tag}"
    return worst <= 1e-7, f"max curvature error {worst:.2e}"


def check_closedness(rng):
    info = closedness(2.5, 5.6875)
    ok = info is not None and (info.m, info.n) == (3, 1) and abs(info.length - 4 * np.pi) < 1e-9
    return ok, f"(m, n, length) = {None if info is None else (info.m, info.n, info.length)}"


def check_reconstruction(rng):
    res = integrate(CurvatureProfile(1.0, 1.0, 1.0), (0.0, 2.0), h=1e-3)
    A = lagrangian_arclength_matrix(1.0, 1.0)
    exact = expm_matrix(A[None], res.s[:, None, None])[..., 1:, 0]
    err = float(np.max(np.abs(exact - res.curve)))
    return err <= 1e-8 and res.drift <= 1e-8, f"error {err:.2e}, drift {res.drift:.2e}"


def check_torus(rng):
    mesh = molding_surface((2.5, 5.6875), make_profile(-1.0, 2.5, "+"), (32, 32))
    r = float(np.max(np.abs(mesh.residual)))
    d = max(mesh.period_defects)
    return r <= 1e-8 and d <= 1e-8, f"residual {r:.2e}, period defect {d:.2e}"


def check_geodesics(rng):
    for tag in CASES:
        case = _params(tag, rng)
        v = el_residual(generate(case), (-1.0, 1.0), n=21).verdict
        if v != (tag in ("II.1", "II.2", "IV")):
            return False, f"verdict {v} for {tag}"
    fv = first_variation(generate(ClassCase("I.2.b", 1.5, 0.5)),
                         make_admissible(v3=bump(0.0, 1.5, 8, 0.1)))
    ok = abs(fv.fd - fv.analytic) <= 1e-5
    return ok, f"fd {fv.fd:.6g}, derivative of length {fv.analytic:.6g}"


def check_osculating(rng):
    worst, dp = 0.0, 0.0
    for tag in CASES:
        c = generate(_params(tag, rng))
        worst = max(worst, osculating_null_check(c, (-1.0, 1.0), 21).null_residual)
        p = phase_portraits(c, (-1.0, 1.0), 21)
        dp = max(dp, p.residual)
        A, _ = dpair_witness(p, p.t[7])
        dp = max(dp, abs(np.linalg.det(A) - 1))
    return worst <= 1e-8 and dp <= 1e-8, f"null residual {worst:.2e}, d-pair {dp:.2e}"


CHECKS = [
    ("invariance", check_invariance),
    ("classification", check_classification),
    ("closedness", check_closedness),
    ("reconstruction", check_reconstruction),
    ("torus", check_torus),
    ("geodesics", check_geodesics),
    ("osculating", check_osculating),
]


def run(seed=0):
    """List of ``(name, passed, detail)``."""
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
