"""Face-local two-wave Riemann machinery.

Everything evaluated at a single cell face lives here: extremal wave-speed
estimates, the two-wave resolved state and flux (for conservative systems),
the path-averaged coupling matrices and the implicit resolved state (for
systems with non-conservative products), left/right-going fluctuations, the
shock flattener, and the anti-diffusive correction that sharpens selected
intermediate waves.

All functions are pure; faces can be processed in any order or in parallel.
"""

from dataclasses import dataclass

import numpy as np

from .systems.base import SystemDescriptor, char_matrix

# Fixed-point solve of the implicit resolved state.
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAXITER = 100
# Minimum relative gap enforced between the extremal speeds.
SPEED_GAP_RTOL = 1e-12
# Relative-jump thresholds of the shock flattener ramp.
FLATTENER_ETA1 = 0.25
FLATTENER_ETA2 = 0.75

# 3-point Gauss-Legendre rule on [0, 1]: exact for quintic integrands, which
# is plenty for the segment-path averages of smooth coupling matrices.
_GL3_NODES = (0.5 - 0.5 * 0.6 ** 0.5, 0.5, 0.5 + 0.5 * 0.6 ** 0.5)
_GL3_WEIGHTS = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


class FixedPointError(RuntimeError):
    """Implicit resolved-state iteration failed to converge.

    Carries the last iterate and its residual so callers can degrade
    gracefully instead of aborting a whole run.
    """

    def __init__(self, message, last_iterate, residual):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass
class WaveSpeedPair:
    """Extremal signal speeds bounding the Riemann fan, s_left < s_right."""

    s_left: float
    s_right: float

    def __post_init__(self):
        if not self.s_left < self.s_right:
            raise ValueError(f"need s_left < s_right, got {self.s_left}, {self.s_right}")


@dataclass
class HllResolution:
    """Resolved state of the two-wave solver, with iteration diagnostics."""

    u_star: np.ndarray
    f_star: np.ndarray = None
    fixed_point_iterations: int = 0
    converged: bool = True


def wave_speed_estimates(sys: SystemDescriptor, ul, ur) -> WaveSpeedPair:
    """Davis-type three-point bounds on the extremal signal speeds.

    Takes the min/max eigenvalue over the left state, the right state and
    their arithmetic mean, then enforces a tiny minimum gap so downstream
    divisions by (s_right - s_left) stay safe even for identical inputs.
    """
    sys.require_admissible(ul)
    sys.require_admissible(ur)
    lam_l = sys.eigenvalues(ul)
    lam_r = sys.eigenvalues(ur)
    lam_m = sys.eigenvalues(0.5 * (ul + ur))
    sl = min(lam_l[0], lam_r[0], lam_m[0])
    sr = max(lam_l[-1], lam_r[-1], lam_m[-1])
    gap = SPEED_GAP_RTOL * max(1.0, abs(sl), abs(sr))
    if sr - sl < gap:
        mid = 0.5 * (sl + sr)
        sl, sr = mid - 0.5 * gap, mid + 0.5 * gap
    return WaveSpeedPair(sl, sr)


def hll_state_conservative(ul, ur, fl, fr, speeds: WaveSpeedPair) -> np.ndarray:
    """Resolved state between the extremal waves of a conservative system."""
    sl, sr = speeds.s_left, speeds.s_right
    return (sr * ur - sl * ul - (fr - fl)) / (sr - sl)


def hll_flux(ul, ur, fl, fr, speeds: WaveSpeedPair) -> np.ndarray:
    """Resolved flux of the two-wave solver (subsonic-fan formula).

    Callers handle supersonic fans by branching to pure upwinding; this
    formula is only meaningful when the fan straddles the interface.
    """
    sl, sr = speeds.s_left, speeds.s_right
    return (sr * fl - sl * fr + sr * sl * (ur - ul)) / (sr - sl)


def btilde(sys: SystemDescriptor, ua, ub) -> np.ndarray:
    """Path-average of the coupling matrix B along the segment from ua to ub.

    The segment path in state space is the same parametrization that defines
    the jump terms of the non-conservative solver, so using it here keeps the
    discrete jump conditions mutually consistent.
    """
    ua = np.asarray(ua, dtype=float)
    ub = np.asarray(ub, dtype=float)
    acc = np.zeros((sys.n_vars, sys.n_vars))
    for s, w in zip(_GL3_NODES, _GL3_WEIGHTS):
        u = ua + s * (ub - ua)
        sys.require_admissible(u)
        acc += w * sys.noncons_matrix(u)
    return acc


def hll_state_noncons(sys: SystemDescriptor, ul, ur, speeds: WaveSpeedPair,
                      tol: float = FIXED_POINT_TOL,
                      maxiter: int = FIXED_POINT_MAXITER) -> HllResolution:
    """Resolved state when non-conservative products are present.

    The defining relation is implicit because the path-averaged coupling
    matrices depend on the resolved state itself; it is solved by fixed-point
    iteration seeded with the conservative resolved state.
    """
    sl, sr = speeds.s_left, speeds.s_right
    fl, fr = sys.flux(ul), sys.flux(ur)
    base = sr * ur - sl * ul - (fr - fl)
    u = hll_state_conservative(ul, ur, fl, fr, speeds)
    if not sys.has_nonconservative:
        return HllResolution(u, fixed_point_iterations=1, converged=True)
    for k in range(1, maxiter + 1):
        bt_l = btilde(sys, ul, u)
        bt_r = btilde(sys, u, ur)
        u_new = (base - bt_l @ (u - ul) - bt_r @ (ur - u)) / (sr - sl)
        change = np.abs(u_new - u).max()
        u = u_new
        if change <= tol * (1.0 + np.abs(u).max()):
            return HllResolution(u, fixed_point_iterations=k, converged=True)
    residual = float(change)
    raise FixedPointError(
        f"resolved-state iteration did not converge in {maxiter} steps "
        f"(residual {residual:.3e})", u, residual)


def hll_fluctuations(speeds: WaveSpeedPair, u_star, ul_face, ur_face):
    """Left/right-going fluctuations carried across the extremal waves."""
    d_minus = speeds.s_left * (u_star - ul_face)
    d_plus = speeds.s_right * (ur_face - u_star)
    return d_minus, d_plus


def delta_weight(lam_p: float, speeds: WaveSpeedPair) -> float:
    """Anti-diffusion weight of one intermediate wave.

    Equals 1 for a stationary wave and falls to 0 as the wave approaches
    either extremal speed; callers guarantee a subsonic fan.
    """
    return 1.0 - min(lam_p, 0.0) / speeds.s_left - max(lam_p, 0.0) / speeds.s_right


def flattener(sys: SystemDescriptor, ul, ur,
              eta1: float = FLATTENER_ETA1, eta2: float = FLATTENER_ETA2) -> float:
    """Shock detector in [0, 1]: 1 away from shocks, 0 at strong shocks.

    Uses the system's designated indicator variable (pressure for gas
    dynamics, depth for shallow water).  Non-compressive faces are never
    flattened; for compressive faces the relative indicator jump is ramped
    between eta1 and eta2.
    """
    if sys.shock_indicator is None:
        return 1.0
    ql, unl = sys.shock_indicator(ul)
    qr, unr = sys.shock_indicator(ur)
    if unr >= unl:
        return 1.0
    jump = abs(qr - ql) / max(min(ql, qr), 1e-300)
    x = (jump - eta1) / (eta2 - eta1)
    return 1.0 - min(max(x, 0.0), 1.0)


def hlli_correction(speeds: WaveSpeedPair, phi: float, fields, du) -> np.ndarray:
    """Anti-diffusive contribution projected on the selected wave fields.

    Returns the vector that is subtracted from the face flux (or from the
    left-going fluctuation and added to the right-going one, keeping their
    sum unchanged).  Empty field lists or phi = 0 switch the correction off.
    """
    du = np.asarray(du, dtype=float)
    out = np.zeros_like(du)
    if phi == 0.0 or not fields:
        return out
    for f in fields:
        amp = delta_weight(f.eigenvalue, speeds) * (f.left @ du)
        if amp != 0.0:
            out += amp * f.right
    sl, sr = speeds.s_left, speeds.s_right
    return (phi * sr * sl / (sr - sl)) * out
