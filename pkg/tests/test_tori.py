import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagcurves.classify import ClassCase
from lagcurves.errors import CurvatureWindowViolated, EmptyBranch, InvalidParameters, IoError, NotClosed
from lagcurves.tori import (CSV_HEADER, QuadricProfile, _speed_coefficients, export_csv, export_mesh,
                            export_obj, lint_faces, load_mesh_csv, make_profile, molding_surface,
                            quad_faces)

DIRECTRIX = ClassCase("I.2.b", 1.5, 0.5)


def test_profile_circle():
    p = make_profile(-1.0, 1.0, "+", z0=np.sqrt(2.0))
    assert abs(p.length - 2 * np.pi) < 1e-12
    a, da = p(np.linspace(0, p.length, 17))
    assert np.allclose(np.hypot(a[:, 0], a[:, 1]), 1.0, atol=1e-12)
    assert np.allclose(a[:, 2], np.sqrt(2.0))


@pytest.mark.parametrize("kind,delta", [("ellipse", 0.0), ("wave", 0.4)])
@pytest.mark.parametrize("h,branch", [(-1.0, "+"), (-1.0, "-"), (0.5, "+"), (0.0, "-")])
def test_profile_invariants(kind, delta, h, branch):
    p = make_profile(h, 2.5, branch, kind=kind, delta=delta)
    th = np.linspace(0, p.length, 257)
    a, da = p(th)
    assert np.max(p.quadric_residual(th)) <= 1e-9
    assert np.max(np.abs(np.linalg.norm(da, axis=1) - 1)) <= 1e-8
    assert np.all(np.sign(a[:, 2]) == (1 if branch == "+" else -1))
    # closed with period length
    assert np.allclose(a[0], a[-1], atol=1e-10)
    # unit speed: no chord is longer than its arc, and the polygon length converges
    chords = np.linalg.norm(np.diff(a, axis=0), axis=1)
    assert np.all(chords <= (th[1] - th[0]) * (1 + 1e-12))
    assert abs(chords.sum() - p.length) <= 1e-2 * p.length


def test_profile_errors():
    with pytest.raises(EmptyBranch):
        make_profile(0.0, 1.0, "+", z0=0.0)
    with pytest.raises(EmptyBranch):
        make_profile(-4.0, 1.0, "+", z0=1.0)
    with pytest.raises(EmptyBranch):
        make_profile(-1.0, 1.0, "+", z0=-2.0)
    with pytest.raises(EmptyBranch):
        make_profile(-1.0, -1.0, "+")
    with pytest.raises(InvalidParameters):
        make_profile(-1.0, 1.0, "x")


def test_stationary_profile_rejected():
    # h + z0^2 = 0 collapses the section to a point
    with pytest.raises(InvalidParameters):
        _speed_coefficients(QuadricProfile(-1.0, 1.0, 1.0))


def test_molding_surface_full_grid():
    mesh = molding_surface(DIRECTRIX, make_profile(-1.0, 2.5, "+"), (256, 256))
    assert mesh.vertices.shape == (256, 256, 4)
    assert np.max(np.abs(mesh.residual)) <= 1e-8
    assert np.max(np.abs(mesh.residual_direct)) <= 1e-8
    assert max(mesh.period_defects) <= 1e-8
    assert mesh.min_singular_value > 0
    assert abs(mesh.periods[0] - 4 * np.pi) < 1e-9


@settings(max_examples=8, deadline=None)
@given(st.floats(-2.0, 2.0), st.sampled_from(["+", "-"]), st.floats(0.0, 0.5))
def test_molding_surface_lagrangian_for_any_profile(h, branch, delta):
    prof = make_profile(h, 2.5, branch, kind="wave", delta=delta)
    mesh = molding_surface((2.5, 5.6875), prof, (24, 20))
    assert np.max(np.abs(mesh.residual)) <= 1e-8
    assert np.max(np.abs(mesh.residual_direct)) <= 1e-8
    assert max(mesh.period_defects) <= 1e-8
    assert mesh.min_singular_value > 0


def test_molding_surface_errors():
    prof = make_profile(-1.0, 1.0, "+")
    with pytest.raises(CurvatureWindowViolated):
        molding_surface((1.0, 1.0), prof, (4, 4))
    with pytest.raises(CurvatureWindowViolated):
        molding_surface(ClassCase("II.2", 1.0), prof, (4, 4))
    mu, nu = 1.0, 1 / np.sqrt(2.0)
    with pytest.raises(NotClosed):
        molding_surface((mu ** 2 + nu ** 2, mu ** 4 + mu ** 2 * nu ** 2 + nu ** 4), prof, (4, 4))


def test_faces_counting_and_lint():
    f = quad_faces(4, 4)
    assert f.shape == (16, 4)
    assert lint_faces(f)
    assert set(f.ravel()) == set(range(16))
    assert not lint_faces(np.array([[0, 1, 2, 3], [0, 1, 2, 3]]))


def test_obj_and_csv_export(tmp_path):
    mesh = molding_surface(DIRECTRIX, make_profile(-1.0, 2.5, "+"), (4, 4))
    obj, side = export_obj(mesh, tmp_path / "t.obj", "portrait-a")
    lines = obj.read_text().splitlines()
    assert lines[0] == "# projection portrait-a"
    v = [l for l in lines if l.startswith("v ")]
    f = np.array([[int(x) for x in l.split()[1:]] for l in lines if l.startswith("f ")])
    assert len(v) == 16 and len(f) == 16
    assert f.min() == 1 and f.max() == 16
    assert lint_faces(f - 1)
    rows = load_mesh_csv(side)
    assert side.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert np.array_equal(rows[:, 2:6], mesh.vertices.reshape(-1, 4))
    assert np.array_equal(rows[:, 6], mesh.residual.reshape(-1))
    again = export_mesh(mesh, tmp_path / "u.csv", "csv")
    assert np.array_equal(load_mesh_csv(again), rows)


def test_export_errors(tmp_path):
    mesh = molding_surface(DIRECTRIX, make_profile(-1.0, 2.5, "+"), (4, 4))
    with pytest.raises(IoError):
        export_obj(mesh, tmp_path / "missing" / "t.obj")
    with pytest.raises(InvalidParameters):
        export_obj(mesh, tmp_path / "t.obj", "nope")
    with pytest.raises(InvalidParameters):
        export_mesh(mesh, tmp_path / "t.ply", "ply")
