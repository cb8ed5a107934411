"""One-step second-order finite-volume driver.

Zones carry means and limited gradients; faces are solved by the two-wave
machinery with gradient recovery for second order in time.  Four update
paths are provided:

* flux form, for conservative systems;
* fluctuation form, for systems with non-conservative products;
* stiff variants of both, which run the space-time predictor inside every
  zone and inside every Riemann fan so stiff sources are handled with
  implicit stability.

The face loops are pure and independent; the time loop is sequential.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import ader, grp, riemann
from .systems.base import (
    AdmissibilityError,
    SystemDescriptor,
    char_matrix,
    eigensystem,
)
from .linalg import HyperbolicityError

# Scheme-level positivity floor (density / pressure / depth).
POSITIVITY_FLOOR = 1e-12
ZERO_SPEED_TOL = 1e-30

BOUNDARY_KINDS = ("transmissive", "periodic", "reflective")
SOLVERS = ("hll-grp", "hlli-grp", "hll", "hlli")


@dataclass
class SolverOptions:
    """Knobs of the face solver and the update paths.

    solver: 'hlli-grp' (default) or 'hll-grp' for second order in time;
        'hll'/'hlli' drop the gradient term (first order in time, kept for
        dissipation comparisons).
    wave_subset: which intermediate waves receive anti-diffusion.
    phi_override: force the flattener to a constant (1.0 disables
        flattening, 0.0 disables the anti-diffusive correction entirely).
    eigen_state: evaluate correction eigenfields at the arithmetic mean of
        the half-time traces ('mean', default) or at the time-centered
        resolved state ('resolved').
    limiter_vars: reconstruct in 'primitive' (default) or 'conserved'
        variables.
    center_smooth_term: in the stiff fluctuation path, evaluate the smooth
        derivative term at the predictor half-time values instead of t^n.
    """

    solver: str = "hlli-grp"
    wave_subset: object = "linearly-degenerate"
    phi_override: float = None
    eigen_state: str = "mean"
    limiter_vars: str = "primitive"
    center_smooth_term: bool = False

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.eigen_state not in ("mean", "resolved"):
            raise ValueError(f"unknown eigen_state {self.eigen_state!r}")
        if self.limiter_vars not in ("primitive", "conserved"):
            raise ValueError(f"unknown limiter_vars {self.limiter_vars!r}")

    @property
    def use_grp(self):
        return self.solver.endswith("-grp")

    @property
    def use_correction(self):
        return self.solver.startswith("hlli")


@dataclass
class CellGrid:
    """Uniform 1D mesh of zone means with limited gradients.

    gradients are per unit length and refreshed from the means at the start
    of every step; ghost zones are synthesized on the fly from boundary_kind.
    """

    n_zones: int
    dx: float
    x_origin: float
    means: np.ndarray
    gradients: np.ndarray
    boundary_kind: str = "transmissive"
    ghost_depth: int = 2

    def __post_init__(self):
        if self.boundary_kind not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary kind {self.boundary_kind!r}")

    @property
    def x_centers(self):
        return self.x_origin + self.dx * (np.arange(self.n_zones) + 0.5)

    def copy(self):
        return replace(self, means=self.means.copy(), gradients=self.gradients.copy())


@dataclass
class StepReport:
    dt_used: float
    max_signal_speed: float = 0.0
    floors_applied: int = 0
    faces_degraded: int = 0
    picard_failures: int = 0


@dataclass
class RunSummary:
    steps: int = 0
    t_final: float = 0.0
    dt_min: float = np.inf
    dt_max: float = 0.0
    floors_applied: int = 0
    faces_degraded: int = 0
    picard_failures: int = 0

    def absorb(self, rep: StepReport):
        self.steps += 1
        self.dt_min = min(self.dt_min, rep.dt_used)
        self.dt_max = max(self.dt_max, rep.dt_used)
        self.floors_applied += rep.floors_applied
        self.faces_degraded += rep.faces_degraded
        self.picard_failures += rep.picard_failures


def make_grid(sys: SystemDescriptor, n_zones, x_left, x_right, init_prim,
              boundary_kind="transmissive") -> CellGrid:
    """Initialize a grid by cell-center sampling of a primitive profile."""
    dx = (x_right - x_left) / n_zones
    means = np.empty((n_zones, sys.n_vars))
    for j in range(n_zones):
        x = x_left + (j + 0.5) * dx
        means[j] = sys.prim_to_cons(np.asarray(init_prim(x), dtype=float))
    return CellGrid(n_zones, dx, x_left, means,
                    np.zeros_like(means), boundary_kind)


def minmod3(a, b, c):
    """Three-argument minmod: 0 on any sign disagreement, else the smallest
    magnitude.  Operates elementwise on arrays."""
    pos = (a > 0) & (b > 0) & (c > 0)
    neg = (a < 0) & (b < 0) & (c < 0)
    out = np.where(pos, np.minimum(np.minimum(a, b), c), 0.0)
    return np.where(neg, np.maximum(np.maximum(a, b), c), out)


def mc_reconstruct(window, dx: float) -> np.ndarray:
    """Monotonized-central limited slope from three consecutive zone means.

    Returns the per-unit-length slope for the middle zone: linear data is
    reproduced exactly, local extrema are clipped to zero slope.
    """
    window = np.asarray(window, dtype=float)
    dm = window[1] - window[0]
    dp = window[2] - window[1]
    return minmod3(2.0 * dm, 2.0 * dp, 0.5 * (dm + dp)) / dx


def compute_dt(sys: SystemDescriptor, grid: CellGrid, cfl: float) -> float:
    """CFL timestep from the fastest signal speed over all zone means."""
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must be in (0, 1], got {cfl}")
    smax = _max_signal_speed(sys, grid)
    if smax < ZERO_SPEED_TOL:
        raise ValueError("no signal: maximum characteristic speed is zero")
    return cfl * grid.dx / smax


def _max_signal_speed(sys, grid):
    smax = 0.0
    for j in range(grid.n_zones):
        lam = sys.eigenvalues(grid.means[j])
        smax = max(smax, abs(lam[0]), abs(lam[-1]))
    return smax


def _extend(sys, grid):
    """Ghost-augmented means: 2 ghost zones per side by boundary policy."""
    n, m = grid.n_zones, sys.n_vars
    ext = np.empty((n + 4, m))
    ext[2:n + 2] = grid.means
    kind = grid.boundary_kind
    if kind == "periodic":
        ext[0:2] = grid.means[n - 2:n]
        ext[n + 2:n + 4] = grid.means[0:2]
    elif kind == "transmissive":
        ext[0] = ext[1] = grid.means[0]
        ext[n + 2] = ext[n + 3] = grid.means[n - 1]
    else:  # reflective: mirror and flip the normal-velocity components
        for k, src in ((1, 0), (0, 1)):
            ext[k] = grid.means[src]
            for idx in sys.reflect_indices:
                ext[k, idx] = -ext[k, idx]
        for k, src in ((n + 2, n - 1), (n + 3, n - 2)):
            ext[k] = grid.means[src]
            for idx in sys.reflect_indices:
                ext[k, idx] = -ext[k, idx]
    return ext


def _slopes(sys, grid, ext, opts):
    """Limited conserved-variable slopes for extended zones 1..n+2.

    With primitive limiting the slope is limited in primitive variables and
    mapped back through the local Jacobian dU/dW, which keeps traces
    monotone in the variables that matter for positivity.
    """
    n, m = grid.n_zones, sys.n_vars
    slopes = np.zeros_like(ext)
    if opts.limiter_vars == "primitive":
        w = np.empty_like(ext)
        for j in range(ext.shape[0]):
            w[j] = sys.cons_to_prim(ext[j])
        dm = w[1:-1] - w[:-2]
        dp = w[2:] - w[1:-1]
        dw = minmod3(2.0 * dm, 2.0 * dp, 0.5 * (dm + dp)) / grid.dx
        for j in range(1, n + 3):
            slopes[j] = _du_dw_times(sys, ext[j], w[j], dw[j - 1])
    else:
        dm = ext[1:-1] - ext[:-2]
        dp = ext[2:] - ext[1:-1]
        slopes[1:-1] = minmod3(2.0 * dm, 2.0 * dp, 0.5 * (dm + dp)) / grid.dx
    if grid.boundary_kind == "transmissive":
        slopes[0] = slopes[1] = 0.0
        slopes[n + 2] = slopes[n + 3] = 0.0
    return slopes


def _du_dw_times(sys, u, w, dw, eps=1e-7):
    """Apply the conserved/primitive Jacobian dU/dW to a primitive slope.

    Directional finite difference of prim_to_cons; exact for the linear test
    systems and second-order accurate in eps otherwise (eps is relative to
    the primitive state scale).
    """
    scale = np.abs(w).max() + 1.0
    h = eps * scale
    norm = np.abs(dw).max()
    if norm == 0.0:
        return np.zeros_like(u)
    step = dw / norm * h
    return (sys.prim_to_cons(w + 0.5 * step) - sys.prim_to_cons(w - 0.5 * step)) / h * norm


class _FaceInputs:
    """Everything a face solver needs from the two flanking zones.

    ul/ur are the face-extrapolated states (falling back to the zone mean if
    an extrapolated state leaves the admissible set), gl/gr the matching
    gradients, and uhl/uhr the inputs advanced to the half-time level with
    the per-zone transport drift.
    """

    __slots__ = ("ul", "ur", "gl", "gr", "uhl", "uhr")

    def __init__(self, sys, ext, slopes, drifts, jl, dx, dt):
        ul = ext[jl] + 0.5 * dx * slopes[jl]
        ur = ext[jl + 1] - 0.5 * dx * slopes[jl + 1]
        if sys.is_admissible(ul):
            self.gl = slopes[jl]
            self.uhl = ul - 0.5 * dt * drifts[jl]
        else:
            ul = ext[jl].copy()
            self.gl = np.zeros(sys.n_vars)
            self.uhl = ul
        if sys.is_admissible(ur):
            self.gr = slopes[jl + 1]
            self.uhr = ur - 0.5 * dt * drifts[jl + 1]
        else:
            ur = ext[jl + 1].copy()
            self.gr = np.zeros(sys.n_vars)
            self.uhr = ur
        self.ul, self.ur = ul, ur


def _advective_drifts(sys, ext, slopes):
    """Per-zone transport drift A(U_j) g_j, shared by all faces of a step."""
    drifts = np.zeros_like(ext)
    for j in range(1, ext.shape[0] - 1):
        drifts[j] = char_matrix(sys, ext[j]) @ slopes[j]
    return drifts


def _phi(sys, ul, ur, opts):
    if opts.phi_override is not None:
        return opts.phi_override
    return riemann.flattener(sys, ul, ur)


def _correction(sys, speeds, phi, uhl, uhr, resolved_state, opts, report):
    """Anti-diffusive correction vector for one subsonic face."""
    if phi == 0.0:
        return 0.0
    du = uhr - uhl
    # A vanishing jump needs no eigenvectors at all; this also dodges the
    # stagnation points where some systems are numerically defective.
    if np.abs(du).max() <= 1e-300:
        return 0.0
    state = 0.5 * (uhl + uhr) if opts.eigen_state == "mean" else resolved_state
    try:
        fields = eigensystem(sys, state, opts.wave_subset)
    except (AdmissibilityError, HyperbolicityError):
        report.faces_degraded += 1
        return 0.0
    return riemann.hlli_correction(speeds, phi, fields, du)


# ----------------------------------------------------------------------
# flux form (conservative systems)
# ----------------------------------------------------------------------

def step_flux_form(sys: SystemDescriptor, grid: CellGrid, dt: float,
                   opts: SolverOptions = None):
    """One conservative-difference update with time-centered face fluxes."""
    if sys.has_nonconservative:
        raise ValueError("flux form requires a conservative system")
    opts = opts or SolverOptions()
    report = StepReport(dt_used=dt)
    n, dx = grid.n_zones, grid.dx
    ext = _extend(sys, grid)
    slopes = _slopes(sys, grid, ext, opts)
    drifts = _advective_drifts(sys, ext, slopes)

    fluxes = np.empty((n + 1, sys.n_vars))
    for f in range(n + 1):
        jl = f + 1
        fluxes[f] = _face_flux(sys, ext, slopes, drifts, jl, dx, dt, opts, report)

    new_means = grid.means - (dt / dx) * (fluxes[1:] - fluxes[:-1])
    return _finalize(sys, grid, slopes, new_means, report)


def _face_flux(sys, ext, slopes, drifts, jl, dx, dt, opts, report):
    fi = _FaceInputs(sys, ext, slopes, drifts, jl, dx, dt)
    speeds = riemann.wave_speed_estimates(sys, fi.ul, fi.ur)
    report.max_signal_speed = max(report.max_signal_speed,
                                  abs(speeds.s_left), abs(speeds.s_right))
    half = 0.5 * dt if opts.use_grp else 0.0

    if speeds.s_left >= 0.0:
        return sys.flux(grp.evolve_state(sys, fi.ul, fi.gl, 0.0, half))
    if speeds.s_right <= 0.0:
        return sys.flux(grp.evolve_state(sys, fi.ur, fi.gr, 0.0, half))

    fl, fr = sys.flux(fi.ul), sys.flux(fi.ur)
    u_star = riemann.hll_state_conservative(fi.ul, fi.ur, fl, fr, speeds)
    f_star = riemann.hll_flux(fi.ul, fi.ur, fl, fr, speeds)
    resolved_half = u_star
    flux = f_star

    if opts.use_grp:
        try:
            sys.require_admissible(u_star)
            a_star = sys.cons_jacobian(u_star)
            sol = grp.grp_gradient_conservative(
                sys, grp.GrpFaceInput(fi.ul, fi.ur, fi.gl, fi.gr, speeds, u_star),
                a_star)
        except AdmissibilityError:
            sol = grp.GrpFaceSolution(np.zeros(sys.n_vars), degraded=True)
        if sol.degraded:
            report.faces_degraded += 1
        else:
            flux = f_star - 0.5 * dt * (a_star @ (a_star @ sol.grad_star))
            resolved_half = u_star - 0.5 * dt * (a_star @ sol.grad_star)

    if opts.use_correction:
        phi = _phi(sys, fi.ul, fi.ur, opts)
        flux = flux - _correction(sys, speeds, phi, fi.uhl, fi.uhr,
                                  resolved_half, opts, report)
    return flux


# ----------------------------------------------------------------------
# fluctuation form (conservative or non-conservative systems)
# ----------------------------------------------------------------------

def step_fluctuation_form(sys: SystemDescriptor, grid: CellGrid, dt: float,
                          opts: SolverOptions = None):
    """One fluctuation-form update; handles non-conservative products."""
    opts = opts or SolverOptions()
    report = StepReport(dt_used=dt)
    n, dx = grid.n_zones, grid.dx
    ext = _extend(sys, grid)
    slopes = _slopes(sys, grid, ext, opts)
    drifts = _advective_drifts(sys, ext, slopes)

    d_minus = np.empty((n + 1, sys.n_vars))
    d_plus = np.empty((n + 1, sys.n_vars))
    for f in range(n + 1):
        jl = f + 1
        d_minus[f], d_plus[f] = _face_fluctuations(
            sys, ext, slopes, drifts, jl, dx, dt, opts, report)

    new_means = grid.means.copy()
    for j in range(n):
        je = j + 2
        new_means[j] -= dt * drifts[je] + (dt / dx) * (d_minus[j + 1] + d_plus[j])
    return _finalize(sys, grid, slopes, new_means, report)


def _downwind_jump(sys, uhl, uhr):
    """Total half-time jump across a supersonic face (all waves one-sided)."""
    jump = sys.flux(uhr) - sys.flux(uhl)
    if sys.has_nonconservative:
        jump = jump + riemann.btilde(sys, uhl, uhr) @ (uhr - uhl)
    return jump


def _face_fluctuations(sys, ext, slopes, drifts, jl, dx, dt, opts, report):
    fi = _FaceInputs(sys, ext, slopes, drifts, jl, dx, dt)
    speeds = riemann.wave_speed_estimates(sys, fi.ul, fi.ur)
    report.max_signal_speed = max(report.max_signal_speed,
                                  abs(speeds.s_left), abs(speeds.s_right))
    zero = np.zeros(sys.n_vars)

    if speeds.s_left >= 0.0:
        return zero, _downwind_jump(sys, fi.uhl, fi.uhr)
    if speeds.s_right <= 0.0:
        return _downwind_jump(sys, fi.uhl, fi.uhr), zero

    try:
        res = riemann.hll_state_noncons(sys, fi.ul, fi.ur, speeds)
        u_star = res.u_star
    except (riemann.FixedPointError, AdmissibilityError):
        report.faces_degraded += 1
        u_star = riemann.hll_state_conservative(
            fi.ul, fi.ur, sys.flux(fi.ul), sys.flux(fi.ur), speeds)
    dmin, dplus = riemann.hll_fluctuations(speeds, u_star, fi.ul, fi.ur)
    resolved_half = u_star

    if opts.use_grp:
        try:
            sol = grp.grp_gradient_noncons(
                sys, grp.GrpFaceInput(fi.ul, fi.ur, fi.gl, fi.gr, speeds, u_star))
        except AdmissibilityError:
            sol = grp.GrpFaceSolution(np.zeros(sys.n_vars), degraded=True)
        if sol.degraded:
            report.faces_degraded += 1
        else:
            dmin, dplus = grp.grp_fluctuations(dmin, dplus, sys, u_star,
                                               sol.grad_star, dt)
            resolved_half = u_star - 0.5 * dt * (char_matrix(sys, u_star)
                                                 @ sol.grad_star)

    if opts.use_correction:
        phi = _phi(sys, fi.ul, fi.ur, opts)
        corr = _correction(sys, speeds, phi, fi.uhl, fi.uhr, resolved_half,
                           opts, report)
        dmin = dmin - corr
        dplus = dplus + corr
    return dmin, dplus


# ----------------------------------------------------------------------
# stiff-source variants (space-time predictor in zones and fans)
# ----------------------------------------------------------------------

def _zone_predictors(sys, ext, slopes, dt, report):
    # Predictors are needed for the zones flanking real faces only
    # (extended indices 1 .. n+2); the outermost ghosts stay None.
    preds = [None] * ext.shape[0]
    for j in range(1, ext.shape[0] - 1):
        try:
            preds[j] = ader.ader_predict(sys, ext[j], slopes[j], dt)
        except (ader.PicardError, AdmissibilityError) as err:
            report.picard_failures += 1
            last = getattr(err, "last_state", None)
            preds[j] = (last if last is not None
                        else ader.AderState(ext[j].copy(), slopes[j].copy(),
                                            ext[j].copy(), slopes[j].copy(),
                                            converged=False))
    return preds


def _fan_predict(sys, u_star, grad_star, dt, report):
    try:
        return ader.ader_predict(sys, u_star, grad_star, dt)
    except (ader.PicardError, AdmissibilityError) as err:
        report.picard_failures += 1
        last = getattr(err, "last_state", None)
        if last is not None:
            return last
        return ader.AderState(u_star.copy(), grad_star.copy(),
                              u_star.copy(), grad_star.copy(), converged=False)


def step_flux_form_stiff(sys: SystemDescriptor, grid: CellGrid, dt: float,
                         opts: SolverOptions = None):
    """Flux-form update for conservative systems with (possibly) stiff sources.

    The predictor runs once per zone for the source-aware half-time means
    and traces, and once inside every subsonic Riemann fan to advance the
    resolved state; the face flux is re-centered with the fan evolution.
    """
    if sys.has_nonconservative:
        raise ValueError("flux form requires a conservative system")
    opts = opts or SolverOptions()
    report = StepReport(dt_used=dt)
    n, dx = grid.n_zones, grid.dx
    ext = _extend(sys, grid)
    slopes = _slopes(sys, grid, ext, opts)
    drifts = _advective_drifts(sys, ext, slopes)
    preds = _zone_predictors(sys, ext, slopes, dt, report)

    fluxes = np.empty((n + 1, sys.n_vars))
    for f in range(n + 1):
        jl = f + 1
        fluxes[f] = _face_flux_stiff(sys, ext, slopes, drifts, preds, jl, dx, dt,
                                     opts, report)

    new_means = grid.means - (dt / dx) * (fluxes[1:] - fluxes[:-1])
    for j in range(n):
        new_means[j] += dt * sys.source_term(preds[j + 2].u_half)
    return _finalize(sys, grid, slopes, new_means, report)


def _face_flux_stiff(sys, ext, slopes, drifts, preds, jl, dx, dt, opts, report):
    fi = _FaceInputs(sys, ext, slopes, drifts, jl, dx, dt)
    speeds = riemann.wave_speed_estimates(sys, fi.ul, fi.ur)
    report.max_signal_speed = max(report.max_signal_speed,
                                  abs(speeds.s_left), abs(speeds.s_right))

    if speeds.s_left >= 0.0:
        return sys.flux(ader.cell_face_trace(preds[jl], "right", dx))
    if speeds.s_right <= 0.0:
        return sys.flux(ader.cell_face_trace(preds[jl + 1], "left", dx))

    fl, fr = sys.flux(fi.ul), sys.flux(fi.ur)
    u_star = riemann.hll_state_conservative(fi.ul, fi.ur, fl, fr, speeds)
    f_star = riemann.hll_flux(fi.ul, fi.ur, fl, fr, speeds)

    grad_star = np.zeros(sys.n_vars)
    if opts.use_grp:
        try:
            sol = grp.grp_gradient_conservative(
                sys, grp.GrpFaceInput(fi.ul, fi.ur, fi.gl, fi.gr, speeds, u_star))
            if sol.degraded:
                report.faces_degraded += 1
            else:
                grad_star = sol.grad_star
        except AdmissibilityError:
            report.faces_degraded += 1

    fan = _fan_predict(sys, u_star, grad_star, dt, report)
    try:
        a_half = char_matrix(sys, fan.u_half)
        flux = f_star + a_half @ (fan.u_one - fan.u_half)
    except AdmissibilityError:
        report.faces_degraded += 1
        flux = f_star

    if opts.use_correction:
        uhl = ader.cell_face_trace(preds[jl], "right", dx)
        uhr = ader.cell_face_trace(preds[jl + 1], "left", dx)
        phi = _phi(sys, fi.ul, fi.ur, opts)
        flux = flux - _correction(sys, speeds, phi, uhl, uhr, fan.u_half,
                                  opts, report)
    return flux


def step_fluctuation_form_stiff(sys: SystemDescriptor, grid: CellGrid, dt: float,
                                opts: SolverOptions = None):
    """Fluctuation-form update with non-conservative products and stiff sources."""
    opts = opts or SolverOptions()
    report = StepReport(dt_used=dt)
    n, dx = grid.n_zones, grid.dx
    ext = _extend(sys, grid)
    slopes = _slopes(sys, grid, ext, opts)
    preds = _zone_predictors(sys, ext, slopes, dt, report)

    d_minus = np.empty((n + 1, sys.n_vars))
    d_plus = np.empty((n + 1, sys.n_vars))
    for f in range(n + 1):
        jl = f + 1
        d_minus[f], d_plus[f] = _face_fluctuations_stiff(
            sys, ext, slopes, preds, jl, dx, dt, opts, report)

    new_means = grid.means.copy()
    for j in range(n):
        je = j + 2
        if opts.center_smooth_term:
            smooth = char_matrix(sys, preds[je].u_half) @ preds[je].g_half
        else:
            smooth = char_matrix(sys, ext[je]) @ slopes[je]
        new_means[j] -= dt * smooth + (dt / dx) * (d_minus[j + 1] + d_plus[j])
        new_means[j] += dt * sys.source_term(preds[je].u_half)
    return _finalize(sys, grid, slopes, new_means, report)


def _face_fluctuations_stiff(sys, ext, slopes, preds, jl, dx, dt, opts, report):
    ul, ur, gl, gr = _trace_pair(sys, ext, slopes, jl, dx)
    speeds = riemann.wave_speed_estimates(sys, ul, ur)
    report.max_signal_speed = max(report.max_signal_speed,
                                  abs(speeds.s_left), abs(speeds.s_right))
    zero = np.zeros(sys.n_vars)
    uhl = ader.cell_face_trace(preds[jl], "right", dx)
    uhr = ader.cell_face_trace(preds[jl + 1], "left", dx)

    if speeds.s_left >= 0.0:
        return zero, _downwind_jump(sys, uhl, uhr)
    if speeds.s_right <= 0.0:
        return _downwind_jump(sys, uhl, uhr), zero

    try:
        res = riemann.hll_state_noncons(sys, ul, ur, speeds)
        u_star = res.u_star
    except (riemann.FixedPointError, AdmissibilityError):
        report.faces_degraded += 1
        u_star = riemann.hll_state_conservative(ul, ur, sys.flux(ul), sys.flux(ur),
                                                speeds)
    dmin, dplus = riemann.hll_fluctuations(speeds, u_star, ul, ur)

    grad_star = np.zeros(sys.n_vars)
    if opts.use_grp:
        try:
            sol = grp.grp_gradient_noncons(
                sys, grp.GrpFaceInput(ul, ur, gl, gr, speeds, u_star))
            if sol.degraded:
                report.faces_degraded += 1
            else:
                grad_star = sol.grad_star
        except AdmissibilityError:
            report.faces_degraded += 1

    fan = _fan_predict(sys, u_star, grad_star, dt, report)
    try:
        fc = char_matrix(sys, fan.u_half) @ (fan.u_one - fan.u_half)
        dmin = dmin + fc
        dplus = dplus - fc
    except AdmissibilityError:
        report.faces_degraded += 1

    if opts.use_correction:
        phi = _phi(sys, ul, ur, opts)
        corr = _correction(sys, speeds, phi, uhl, uhr, fan.u_half, opts, report)
        dmin = dmin - corr
        dplus = dplus + corr
    return dmin, dplus


# ----------------------------------------------------------------------
# finalization and time loop
# ----------------------------------------------------------------------

def _finalize(sys, grid, slopes, new_means, report):
    n = grid.n_zones
    if sys.apply_floors is not None:
        for j in range(n):
            if not sys.is_admissible(new_means[j]):
                new_means[j], count = sys.apply_floors(new_means[j])
                report.floors_applied += count
    for j in range(n):
        if not sys.is_admissible(new_means[j]):
            raise AdmissibilityError(
                f"zone {j} left the admissible set after flooring: {new_means[j]}")
    new_grid = replace(grid, means=new_means,
                       gradients=slopes[2:n + 2].copy())
    return new_grid, report


def pick_step(sys: SystemDescriptor, stiff: bool):
    """Choose the update path for a system and stiffness flag."""
    if sys.has_nonconservative:
        return step_fluctuation_form_stiff if stiff else step_fluctuation_form
    return step_flux_form_stiff if stiff else step_flux_form


def run_to_time(sys: SystemDescriptor, grid: CellGrid, t_end: float, cfl: float,
                opts: SolverOptions = None, stiff: bool = None,
                max_steps: int = 1_000_000):
    """March the grid to t_end; the last step is clamped to land exactly.

    stiff defaults to the system's has_stiff_source flag.
    """
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    opts = opts or SolverOptions()
    if stiff is None:
        stiff = sys.has_stiff_source
    step = pick_step(sys, stiff)
    summary = RunSummary()
    t = 0.0
    while t < t_end:
        if summary.steps >= max_steps:
            raise RuntimeError(f"exceeded {max_steps} steps at t = {t:g}")
        dt = min(compute_dt(sys, grid, cfl), t_end - t)
        grid, rep = step(sys, grid, dt, opts)
        summary.absorb(rep)
        t += dt
    summary.t_final = t
    return grid, summary
