"""Lagrangian curves in symplectic R^4: invariants, frames, reconstruction,
constant-curvature classification, Lagrangian tori and geodesics."""

from .errors import *  # noqa: F401,F403
from .core import (AlgebraElement, CurveJet, GroupElement, J, act, act_on_jet, bracket, expm,
                   is_symplectic, lam, random_algebra, random_group, sp_inverse)
from .curves import (ClosedForm, OrbitCurve, Sampled, arclength_reparam, curvatures,
                     invariant_derivatives, osculating_null_check, phase_portraits, predicates,
                     symplectic_length)
from .frames import CrossSection, MovingFrame, frame, lagrangian_arclength_matrix, serret_matrix
from .reconstruct import CurvatureProfile, Tabulated, congruence_align, integrate, integrate_adaptive
from .classify import ClassCase, classify, closedness, expected_roots, generate, matrix_roots
from .tori import export_obj, make_profile, molding_surface
from .geodesics import bump, el_residual, first_variation, make_admissible, raw_vs_reduced

__version__ = "0.1.0"
