"""Augmented single-layer shallow water with bathymetry and Manning friction.

State U = (h, hu, hv, b): depth, normal and transverse discharge, and the
time-independent bottom height carried as a conserved component.  The
bathymetry coupling gh db/dx cannot be written as a flux divergence, so the
system is genuinely non-conservative; Manning friction adds a source that
becomes stiff in shallow water.

Wave family: {u-c, 0, u, u+c} with c = sqrt(g h).  The stationary bottom
wave and the shear wave are linearly degenerate.  The analytic eigenvector
pairs are mutually orthogonal as written; each left vector is rescaled
numerically so l.r = 1.  At the resonance u = +-c the bottom-wave vectors
become singular and that field is simply omitted from the returned set.
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

DEPTH_FLOOR = 1e-12
# Below this depth, velocities are desingularized to zero.
DRY_DEPTH = 1e-10
# Relative closeness of u^2 to c^2 at which the bottom wave is dropped.
RESONANCE_TOL = 1e-8
# Below this speed the friction Jacobian limit is zero.
SPEED_EPS = 1e-14


@dataclass
class SweParams:
    g: float = 9.81
    n_manning: float = 0.0

    def __post_init__(self):
        if self.g <= 0.0:
            raise ValueError("gravity must be positive")
        if self.n_manning < 0.0:
            raise ValueError("Manning coefficient must be non-negative")


def swe_descriptor(params: SweParams = None) -> SystemDescriptor:
    if params is None:
        params = SweParams()
    g, n = params.g, params.n_manning
    frict = g * n * n

    def velocities(u):
        h = u[0]
        if h < DRY_DEPTH:
            return 0.0, 0.0
        return u[1] / h, u[2] / h

    def cons_to_prim(u):
        vx, vy = velocities(u)
        return np.array([u[0], vx, vy, u[3]])

    def prim_to_cons(w):
        h, vx, vy, b = w
        return np.array([h, h * vx, h * vy, b])

    def flux(u):
        h = u[0]
        vx, vy = velocities(u)
        return np.array([u[1], u[1] * vx + 0.5 * g * h * h, u[1] * vy, 0.0])

    def cons_jacobian(u):
        h = u[0]
        vx, vy = velocities(u)
        return np.array([
            [0.0, 1.0, 0.0, 0.0],
            [g * h - vx * vx, 2.0 * vx, 0.0, 0.0],
            [-vx * vy, vy, vx, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])

    def noncons_matrix(u):
        b = np.zeros((4, 4))
        b[1, 3] = g * u[0]
        return b

    def source(u):
        if n == 0.0:
            return np.zeros(4)
        h = u[0]
        vx, vy = velocities(u)
        speed = math.hypot(vx, vy)
        fac = -frict * speed / h ** (1.0 / 3.0) if h >= DRY_DEPTH else 0.0
        return np.array([0.0, fac * vx, fac * vy, 0.0])

    def source_jacobian(u):
        j = np.zeros((4, 4))
        if n == 0.0:
            return j
        h = u[0]
        vx, vy = velocities(u)
        speed = math.hypot(vx, vy)
        if h < DRY_DEPTH or speed < SPEED_EPS:
            return j
        h43 = h ** (4.0 / 3.0)
        j[1, 0] = (7.0 / 3.0) * frict * vx * speed / h43
        j[1, 1] = -frict * (2.0 * vx * vx + vy * vy) / (h43 * speed)
        j[1, 2] = -frict * vx * vy / (h43 * speed)
        j[2, 0] = (7.0 / 3.0) * frict * vy * speed / h43
        j[2, 1] = -frict * vx * vy / (h43 * speed)
        j[2, 2] = -frict * (vx * vx + 2.0 * vy * vy) / (h43 * speed)
        return j

    def eigenvalues(u):
        h = u[0]
        vx, _ = velocities(u)
        c = math.sqrt(g * h)
        return np.sort(np.array([vx - c, 0.0, vx, vx + c]))

    def eigensystem_cb(u):
        h = u[0]
        vx, vy = velocities(u)
        c = math.sqrt(g * h)
        c2 = c * c

        pairs = [
            (vx - c, GENUINELY_NONLINEAR,
             np.array([1.0, vx - c, vy, 0.0]),
             np.array([(c + vx) / (2 * c), -1.0 / (2 * c), 0.0,
                       -c / (2.0 * (vx - c)) if abs(vx - c) > 0 else 0.0])),
            (vx, LINEARLY_DEGENERATE,
             np.array([0.0, 0.0, 1.0, 0.0]),
             np.array([-vy, 0.0, 1.0, 0.0])),
            (vx + c, GENUINELY_NONLINEAR,
             np.array([1.0, vx + c, vy, 0.0]),
             np.array([(c - vx) / (2 * c), 1.0 / (2 * c), 0.0,
                       c / (2.0 * (vx + c)) if abs(vx + c) > 0 else 0.0])),
        ]
        resonant = abs(vx * vx - c2) < RESONANCE_TOL * c2
        if not resonant:
            pairs.insert(1, (
                0.0, LINEARLY_DEGENERATE,
                np.array([1.0, 0.0, vy, (vx * vx - c2) / c2]),
                np.array([0.0, 0.0, 0.0, c2 / (vx * vx + c2)])))
        fields = []
        for lam, tag, r, l in pairs:
            l = l / (l @ r)
            fields.append(EigenField(lam, l, r, tag))
        return fields

    def is_admissible(u):
        return bool(np.all(np.isfinite(u))) and u[0] > 0.0

    def apply_floors(u):
        count = 0
        u = u.copy()
        if u[0] < DEPTH_FLOOR:
            u[0] = DEPTH_FLOOR
            count += 1
        if u[0] < DRY_DEPTH and (u[1] != 0.0 or u[2] != 0.0):
            u[1] = u[2] = 0.0
            count += 1
        return u, count

    def shock_indicator(u):
        vx, _ = velocities(u)
        return u[0], vx

    return SystemDescriptor(
        name="swe",
        n_vars=4,
        flux=flux,
        cons_jacobian=cons_jacobian,
        eigensystem_cb=eigensystem_cb,
        eigenvalues=eigenvalues,
        prim_to_cons=lambda w: prim_to_cons(np.asarray(w, dtype=float)),
        cons_to_prim=lambda u: cons_to_prim(np.asarray(u, dtype=float)),
        is_admissible=is_admissible,
        noncons_matrix=noncons_matrix,
        source=source if n > 0.0 else None,
        source_jacobian=source_jacobian if n > 0.0 else None,
        has_nonconservative=True,
        has_stiff_source=n > 0.0,
        parameters={"g": g, "n_manning": n},
        shock_indicator=shock_indicator,
        prim_names=("h", "u", "v", "b"),
        extra_outputs=(("eta", lambda prim: prim[0] + prim[3]),),
        reflect_indices=(1,),
        apply_floors=apply_floors,
    )
