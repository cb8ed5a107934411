"""In-fan gradient recovery and second-order time centering.

Given the face-extrapolated states, their spatial gradients and the two-wave
resolved state, these routines recover the gradient of the resolved state by
enforcing time-linearized jump conditions at both extremal waves and solving
the resulting stacked 2M x M system in the least-squares sense.  The wave
trajectories are treated as straight in space-time (no curvature unknowns),
which keeps the system over-determined with the gradient as the only
unknown.

The recovered gradient then yields time-centered fluxes and fluctuations:
one half-step of the linearized in-fan evolution applied to the resolved
flux, or equal-and-opposite corrections applied to the two fluctuations.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg, riemann
from .systems.base import SystemDescriptor, char_matrix


@dataclass
class GrpFaceInput:
    """Inputs of one face-local gradient solve.

    Gradients are in physical units (per unit length).  u_star is the
    resolved state the active scheme form actually uses (conservative or
    path-conservative).
    """

    ul_face: np.ndarray
    ur_face: np.ndarray
    gl: np.ndarray
    gr: np.ndarray
    speeds: riemann.WaveSpeedPair
    u_star: np.ndarray


@dataclass
class GrpFaceSolution:
    """Recovered in-fan gradient plus degradation diagnostics.

    degraded means the stacked system lost rank (a wave speed collided with
    an interior eigenvalue) and the gradient was zeroed: the face falls back
    to first order in time, which is the safe choice.
    """

    grad_star: np.ndarray
    ls_residual: float = 0.0
    degraded: bool = False


def _solve_stacked(top, bottom, rhs_top, rhs_bottom, m):
    a = np.vstack([top, bottom])
    b = np.concatenate([rhs_top, rhs_bottom])
    rep = linalg.least_squares(a, b)
    if rep.effective_rank < m:
        return GrpFaceSolution(np.zeros(m), rep.residual_norm, degraded=True)
    return GrpFaceSolution(rep.solution, rep.residual_norm, degraded=False)


def grp_gradient_conservative(sys: SystemDescriptor, face: GrpFaceInput,
                              a_star=None) -> GrpFaceSolution:
    """Gradient of the resolved state for a conservative system.

    Each extremal wave contributes M equations
        (S I - A(U*))^2 grad* = (S I - A(U_side))^2 g_side
    and the stacked 2M x M system is solved in the least-squares sense.
    a_star may carry a precomputed characteristic matrix at u_star.
    """
    m = sys.n_vars
    eye = np.eye(m)
    sys.require_admissible(face.u_star)
    if a_star is None:
        a_star = sys.cons_jacobian(face.u_star)
    sl, sr = face.speeds.s_left, face.speeds.s_right

    wr = sr * eye - a_star
    wl = sl * eye - a_star
    rr = sr * eye - char_matrix(sys, face.ur_face)
    rl = sl * eye - char_matrix(sys, face.ul_face)
    return _solve_stacked(wr @ wr, wl @ wl,
                          rr @ (rr @ face.gr), rl @ (rl @ face.gl), m)


def grp_gradient_noncons(sys: SystemDescriptor, face: GrpFaceInput,
                         a_star=None) -> GrpFaceSolution:
    """Gradient of the resolved state when non-conservative products exist.

    The jump conditions generalize the conservative ones: the squared factor
    splits into (S I - C - Btilde)(S I - A), with the path-averaged coupling
    matrix evaluated on the segment between the resolved state and the
    respective input state.  With B identically zero this reduces exactly to
    the conservative stack.
    """
    m = sys.n_vars
    eye = np.eye(m)
    sl, sr = face.speeds.s_left, face.speeds.s_right

    sys.require_admissible(face.u_star)
    c_star = sys.cons_jacobian(face.u_star)
    if a_star is None:
        a_star = (c_star + sys.noncons_matrix(face.u_star)
                  if sys.has_nonconservative else c_star)
    bt_r = btilde_or_zero(sys, face.u_star, face.ur_face)
    bt_l = btilde_or_zero(sys, face.ul_face, face.u_star)

    top = (sr * eye - c_star - bt_r) @ (sr * eye - a_star)
    bottom = (sl * eye - c_star - bt_l) @ (sl * eye - a_star)

    c_r = sys.cons_jacobian(face.ur_face)
    a_r = char_matrix(sys, face.ur_face)
    c_l = sys.cons_jacobian(face.ul_face)
    a_l = char_matrix(sys, face.ul_face)
    rhs_top = (sr * eye - c_r - bt_r) @ ((sr * eye - a_r) @ face.gr)
    rhs_bottom = (sl * eye - c_l - bt_l) @ ((sl * eye - a_l) @ face.gl)
    return _solve_stacked(top, bottom, rhs_top, rhs_bottom, m)


def btilde_or_zero(sys, ua, ub):
    if sys.has_nonconservative:
        return riemann.btilde(sys, ua, ub)
    return np.zeros((sys.n_vars, sys.n_vars))


def evolve_state(sys: SystemDescriptor, u, g, xi: float, t: float) -> np.ndarray:
    """Linearized in-the-small evolution U + t (xi I - A(U)) g.

    xi is the similarity coordinate x/t; xi = 0 evolves the state straight
    up the time axis, which is how upwind traces are advanced to the
    half-time level.
    """
    g = np.asarray(g, dtype=float)
    a = char_matrix(sys, u)
    return u + t * (xi * g - a @ g)


def grp_flux_conservative(sys: SystemDescriptor, f_star, u_star, grad_star,
                          dt: float) -> np.ndarray:
    """Time-centered face flux: resolved flux minus the half-step drift."""
    a = char_matrix(sys, u_star)
    return f_star - 0.5 * dt * (a @ (a @ grad_star))


def grp_fluctuations(d_minus, d_plus, sys: SystemDescriptor, u_star, grad_star,
                     dt: float):
    """Time-centered fluctuations.

    The same half-step drift is subtracted from the left-going fluctuation
    and added to the right-going one, so their sum (the consistency quantity)
    is untouched.
    """
    a = char_matrix(sys, u_star)
    corr = 0.5 * dt * (a @ (a @ grad_star))
    return d_minus - corr, d_plus + corr
