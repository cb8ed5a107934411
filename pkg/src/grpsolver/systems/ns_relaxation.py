"""Compressible Navier-Stokes as a hyperbolic relaxation system.

The parabolic stress and heat-flux terms are replaced by two auxiliary
variables psi1, psi2 that relax on a time scale epsilon toward du/dx and
dT/dx.  This yields a first-order system U = (rho, rho*u, E, psi1, psi2)
in conservation form with the stiff source S = (0, 0, 0, -psi1/eps,
-psi2/eps); the gradients enter through the flux rows -u/eps and -T/eps.

No closed-form eigendecomposition exists, so the eigensystem is evaluated
numerically; real-spectrum failures surface as hyperbolicity errors.  The
experiments of interest run with a constant viscosity and no heat
conduction; Sutherland's temperature-dependent viscosity is implemented but
off by default.
"""

import math
from dataclasses import dataclass

import numpy as np

from .base import SystemDescriptor, numerical_eigensystem
from ..linalg import HyperbolicityError

DENSITY_FLOOR = 1e-12
PRESSURE_FLOOR = 1e-12
EIG_IMAG_RTOL = 1e-8


@dataclass
class NsRelaxParams:
    gamma: float = 1.4
    R: float = 1.0
    epsilon: float = 1e-4
    Pr: float = 0.75
    mu0: float = 2.0
    T0: float = 273.15
    beta: float = 1.5
    s: float = 110.4
    kappa_enabled: bool = False
    use_sutherland: bool = False

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("relaxation time must be positive")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.Pr <= 0.0:
            raise ValueError("Prandtl number must be positive")


def sutherland_viscosity(params: NsRelaxParams, temperature: float) -> float:
    """Temperature-dependent viscosity mu0 (T/T0)^beta (T+s)/(T0+s)."""
    t = temperature
    return params.mu0 * (t / params.T0) ** params.beta * (t + params.s) / (params.T0 + params.s)


def _sutherland_dmu_dT(params: NsRelaxParams, t: float) -> float:
    return sutherland_viscosity(params, t) * (params.beta / t + 1.0 / (t + params.s))


def nsrelax_descriptor(params: NsRelaxParams = None) -> SystemDescriptor:
    if params is None:
        params = NsRelaxParams()
    gamma, rgas, eps = params.gamma, params.R, params.epsilon
    g1 = gamma - 1.0
    cv = rgas / g1

    def mu_kappa(t):
        mu = sutherland_viscosity(params, t) if params.use_sutherland else params.mu0
        kappa = mu * gamma * cv / params.Pr if params.kappa_enabled else 0.0
        return mu, kappa

    def cons_to_prim(u):
        rho, m, e, psi1, psi2 = u
        vel = m / rho
        p = g1 * (e - 0.5 * m * vel)
        return np.array([rho, vel, p, psi1, psi2])

    def prim_to_cons(w):
        rho, vel, p, psi1, psi2 = w
        return np.array([rho, rho * vel, p / g1 + 0.5 * rho * vel * vel, psi1, psi2])

    def flux(u):
        rho, m, e, psi1, psi2 = u
        vel = m / rho
        p = g1 * (e - 0.5 * m * vel)
        t = p / (rgas * rho)
        mu, kappa = mu_kappa(t)
        stress = 4.0 * mu * psi1 / 3.0
        return np.array([
            m,
            m * vel + p - stress,
            vel * (e + p - stress) + kappa * psi2,
            -vel / eps,
            -t / eps,
        ])

    def cons_jacobian(u):
        rho, m, e, psi1, psi2 = u
        vel = m / rho
        p = g1 * (e - 0.5 * m * vel)
        t = p / (rgas * rho)
        mu, kappa = mu_kappa(t)
        htot = e + p - 4.0 * mu * psi1 / 3.0

        jac = np.zeros((5, 5))
        jac[0, 1] = 1.0
        jac[1, 0] = -vel * vel + 0.5 * g1 * vel * vel
        jac[1, 1] = (3.0 - gamma) * vel
        jac[1, 2] = g1
        jac[1, 3] = -4.0 * mu / 3.0
        jac[2, 0] = -vel * htot / rho + 0.5 * g1 * vel ** 3
        jac[2, 1] = htot / rho - g1 * vel * vel
        jac[2, 2] = gamma * vel
        jac[2, 3] = -4.0 * mu * vel / 3.0
        jac[2, 4] = kappa
        jac[3, 0] = vel / (rho * eps)
        jac[3, 1] = -1.0 / (rho * eps)
        # dT/dU rows feed the relaxation flux -T/eps.
        dt_drho = (0.5 * g1 * vel * vel - p / rho) / (rgas * rho)
        dt_dm = -g1 * vel / (rgas * rho)
        dt_de = g1 / (rgas * rho)
        jac[4, 0] = -dt_drho / eps
        jac[4, 1] = -dt_dm / eps
        jac[4, 2] = -dt_de / eps

        if params.use_sutherland:
            dmu = _sutherland_dmu_dT(params, t)
            dmu_du = dmu * np.array([dt_drho, dt_dm, dt_de, 0.0, 0.0])
            jac[1] -= (4.0 * psi1 / 3.0) * dmu_du
            jac[2] -= (4.0 * psi1 / 3.0) * vel * dmu_du
            if params.kappa_enabled:
                jac[2] += psi2 * (gamma * cv / params.Pr) * dmu_du
        return jac

    def eigenvalues(u):
        w = np.linalg.eigvals(cons_jacobian(u))
        radius = max(np.abs(w).max(), 1e-300)
        if np.abs(w.imag).max() > EIG_IMAG_RTOL * radius:
            raise HyperbolicityError(
                f"relaxation system lost hyperbolicity at {u}")
        return np.sort(w.real)

    def is_admissible(u):
        if not np.all(np.isfinite(u)):
            return False
        rho = u[0]
        if rho <= 0.0:
            return False
        p = g1 * (u[2] - 0.5 * u[1] * u[1] / rho)
        return p > 0.0

    def apply_floors(u):
        count = 0
        u = u.copy()
        if u[0] < DENSITY_FLOOR:
            u[0] = DENSITY_FLOOR
            count += 1
        ke = 0.5 * u[1] * u[1] / u[0]
        p = g1 * (u[2] - ke)
        if p < PRESSURE_FLOOR:
            u[2] = PRESSURE_FLOOR / g1 + ke
            count += 1
        return u, count

    desc = SystemDescriptor(
        name="nsrelax",
        n_vars=5,
        flux=flux,
        cons_jacobian=cons_jacobian,
        eigensystem_cb=None,
        eigenvalues=eigenvalues,
        prim_to_cons=lambda w: prim_to_cons(np.asarray(w, dtype=float)),
        cons_to_prim=lambda u: cons_to_prim(np.asarray(u, dtype=float)),
        is_admissible=is_admissible,
        source=lambda u: np.array([0.0, 0.0, 0.0, -u[3] / eps, -u[4] / eps]),
        source_jacobian=lambda u: np.diag([0.0, 0.0, 0.0, -1.0 / eps, -1.0 / eps]),
        has_stiff_source=True,
        parameters={
            "gamma": gamma, "R": rgas, "epsilon": eps, "Pr": params.Pr,
            "mu0": params.mu0, "T0": params.T0, "beta": params.beta,
            "s": params.s, "kappa_enabled": params.kappa_enabled,
            "use_sutherland": params.use_sutherland,
        },
        shock_indicator=lambda u: (cons_to_prim(u)[2], u[1] / u[0]),
        prim_names=("rho", "u", "p", "psi1", "psi2"),
        reflect_indices=(1, 4),
        apply_floors=apply_floors,
    )
    # Entropy-like waves (moving with the fluid) are the degenerate family.
    desc.eigensystem_cb = lambda u: numerical_eigensystem(
        desc, u, ld_speed=lambda x: x[1] / x[0])
    return desc
