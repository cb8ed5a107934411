"""Compressible Euler equations in one dimension.

Conserved state U = (rho, rho*vx, rho*vy, rho*vz, E) with
E = p/(gamma-1) + rho*v^2/2.  The y/z velocities are passively advected
shear components.  Wave family: {vx-c, vx, vx, vx, vx+c} with the contact
and the two shears linearly degenerate.
"""

import math
from dataclasses import dataclass

import numpy as np

from .base import (
    GENUINELY_NONLINEAR,
    LINEARLY_DEGENERATE,
    EigenField,
    SystemDescriptor,
)

DENSITY_FLOOR = 1e-12
PRESSURE_FLOOR = 1e-12


@dataclass
class EulerParams:
    gamma: float = 1.4

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")


def _cons_to_prim(u, gamma):
    rho = u[0]
    vx, vy, vz = u[1] / rho, u[2] / rho, u[3] / rho
    p = (gamma - 1.0) * (u[4] - 0.5 * rho * (vx * vx + vy * vy + vz * vz))
    return np.array([rho, vx, vy, vz, p])


def _prim_to_cons(w, gamma):
    rho, vx, vy, vz, p = w
    e = p / (gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy + vz * vz)
    return np.array([rho, rho * vx, rho * vy, rho * vz, e])


def euler_descriptor(params: EulerParams = None) -> SystemDescriptor:
    """Build the Euler system descriptor."""
    if params is None:
        params = EulerParams()
    gamma = params.gamma

    def flux(u):
        rho, mx, my, mz, e = u
        vx = mx / rho
        p = (gamma - 1.0) * (e - 0.5 * (mx * mx + my * my + mz * mz) / rho)
        return np.array([mx, mx * vx + p, my * vx, mz * vx, (e + p) * vx])

    def cons_jacobian(u):
        rho = u[0]
        vx, vy, vz = u[1] / rho, u[2] / rho, u[3] / rho
        v2 = vx * vx + vy * vy + vz * vz
        g1 = gamma - 1.0
        p = g1 * (u[4] - 0.5 * rho * v2)
        h = (u[4] + p) / rho
        return np.array([
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [0.5 * g1 * v2 - vx * vx, (3.0 - gamma) * vx, -g1 * vy, -g1 * vz, g1],
            [-vx * vy, vy, vx, 0.0, 0.0],
            [-vx * vz, vz, 0.0, vx, 0.0],
            [vx * (0.5 * g1 * v2 - h), h - g1 * vx * vx, -g1 * vx * vy,
             -g1 * vx * vz, gamma * vx],
        ])

    def eigenvalues(u):
        rho = u[0]
        vx = u[1] / rho
        p = (gamma - 1.0) * (u[4] - 0.5 * (u[1] ** 2 + u[2] ** 2 + u[3] ** 2) / rho)
        c = math.sqrt(gamma * p / rho)
        return np.array([vx - c, vx, vx, vx, vx + c])

    def eigensystem_cb(u):
        rho = u[0]
        vx, vy, vz = u[1] / rho, u[2] / rho, u[3] / rho
        v2 = vx * vx + vy * vy + vz * vz
        g1 = gamma - 1.0
        p = g1 * (u[4] - 0.5 * rho * v2)
        c = math.sqrt(gamma * p / rho)
        c2 = c * c
        h = (u[4] + p) / rho

        # Conserved-variable eigenvectors, unit density jump in the acoustic
        # and entropy fields, unit transverse-momentum jump in the shears.
        return [
            EigenField(
                vx - c,
                np.array([0.5 * g1 * v2 + vx * c, -g1 * vx - c, -g1 * vy,
                          -g1 * vz, g1]) / (2.0 * c2),
                np.array([1.0, vx - c, vy, vz, h - vx * c]),
                GENUINELY_NONLINEAR),
            EigenField(
                vx,
                np.array([1.0 - 0.5 * g1 * v2 / c2, g1 * vx / c2, g1 * vy / c2,
                          g1 * vz / c2, -g1 / c2]),
                np.array([1.0, vx, vy, vz, 0.5 * v2]),
                LINEARLY_DEGENERATE),
            EigenField(
                vx,
                np.array([-vy, 0.0, 1.0, 0.0, 0.0]),
                np.array([0.0, 0.0, 1.0, 0.0, vy]),
                LINEARLY_DEGENERATE),
            EigenField(
                vx,
                np.array([-vz, 0.0, 0.0, 1.0, 0.0]),
                np.array([0.0, 0.0, 0.0, 1.0, vz]),
                LINEARLY_DEGENERATE),
            EigenField(
                vx + c,
                np.array([0.5 * g1 * v2 - vx * c, -g1 * vx + c, -g1 * vy,
                          -g1 * vz, g1]) / (2.0 * c2),
                np.array([1.0, vx + c, vy, vz, h + vx * c]),
                GENUINELY_NONLINEAR),
        ]

    def is_admissible(u):
        rho = u[0]
        if not 0.0 < rho < 1e300:
            return False
        p = (gamma - 1.0) * (u[4] - 0.5 * (u[1] ** 2 + u[2] ** 2 + u[3] ** 2) / rho)
        # NaN anywhere poisons p and fails the comparison; bounds reject inf.
        return 0.0 < p < 1e300

    def apply_floors(u):
        count = 0
        u = u.copy()
        if u[0] < DENSITY_FLOOR:
            u[0] = DENSITY_FLOOR
            count += 1
        ke = 0.5 * (u[1] ** 2 + u[2] ** 2 + u[3] ** 2) / u[0]
        p = (gamma - 1.0) * (u[4] - ke)
        if p < PRESSURE_FLOOR:
            u[4] = PRESSURE_FLOOR / (gamma - 1.0) + ke
            count += 1
        return u, count

    return SystemDescriptor(
        name="euler",
        n_vars=5,
        flux=flux,
        cons_jacobian=cons_jacobian,
        eigensystem_cb=eigensystem_cb,
        eigenvalues=eigenvalues,
        prim_to_cons=lambda w: _prim_to_cons(np.asarray(w, dtype=float), gamma),
        cons_to_prim=lambda u: _cons_to_prim(np.asarray(u, dtype=float), gamma),
        is_admissible=is_admissible,
        parameters={"gamma": gamma},
        shock_indicator=lambda u: (_cons_to_prim(u, gamma)[4], u[1] / u[0]),
        prim_names=("rho", "vx", "vy", "vz", "p"),
        reflect_indices=(1,),
        apply_floors=apply_floors,
    )


