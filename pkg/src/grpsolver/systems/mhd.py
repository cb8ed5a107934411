"""Ideal MHD in one dimension (Gaussian units, explicit 4*pi factors).

Evolved state U = (rho, rho*vx, rho*vy, rho*vz, E, By, Bz) with
E = p/(gamma-1) + rho*v^2/2 + B^2/(8*pi).  The longitudinal field Bx is a
constant parameter: its flux row is identically zero in 1D, so evolving it
would only contribute a spurious zero eigenvalue.

The seven-wave eigensystem (fast/slow magnetosonic pairs, Alfven pair,
entropy) uses renormalized fast/slow vectors that stay linearly independent
through all the degeneracies (vanishing transverse field, vanishing Bx,
coinciding wave speeds).  Right eigenvectors are analytic in primitive
variables; the left set is obtained by inverting the right-vector matrix,
which enforces exact biorthonormality.
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

FOUR_PI = 4.0 * math.pi
DENSITY_FLOOR = 1e-12
PRESSURE_FLOOR = 1e-12
# Below this fraction of the total field, the transverse direction is
# arbitrary and a fixed unit vector is substituted.
PERP_FIELD_TOL = 1e-14


@dataclass
class MhdParams:
    gamma: float = 5.0 / 3.0
    bx: float = 0.0

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if not math.isfinite(self.bx):
            raise ValueError("bx must be finite")


def _speeds(rho, p, by, bz, bx, gamma):
    """Sound, Alfven and fast/slow magnetosonic speeds (squared where noted)."""
    a2 = gamma * p / rho
    bx2 = bx * bx / (FOUR_PI * rho)
    bp2 = (by * by + bz * bz) / (FOUR_PI * rho)
    tot = a2 + bx2 + bp2
    disc = math.sqrt(max(tot * tot - 4.0 * a2 * bx2, 0.0))
    cf2 = 0.5 * (tot + disc)
    cs2 = max(0.5 * (tot - disc), 0.0)
    return a2, bx2, bp2, cf2, cs2


def mhd_descriptor(params: MhdParams = None) -> SystemDescriptor:
    if params is None:
        params = MhdParams()
    gamma, bx = params.gamma, params.bx

    def cons_to_prim(u):
        rho = u[0]
        vx, vy, vz = u[1] / rho, u[2] / rho, u[3] / rho
        bsq = bx * bx + u[5] * u[5] + u[6] * u[6]
        p = (gamma - 1.0) * (u[4] - 0.5 * rho * (vx * vx + vy * vy + vz * vz)
                             - bsq / (8.0 * math.pi))
        return np.array([rho, vx, vy, vz, p, u[5], u[6]])

    def prim_to_cons(w):
        rho, vx, vy, vz, p, by, bz = w
        bsq = bx * bx + by * by + bz * bz
        e = p / (gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy + vz * vz) \
            + bsq / (8.0 * math.pi)
        return np.array([rho, rho * vx, rho * vy, rho * vz, e, by, bz])

    def flux(u):
        rho, mx, my, mz, e, by, bz = u
        vx, vy, vz = mx / rho, my / rho, mz / rho
        bsq = bx * bx + by * by + bz * bz
        p = (gamma - 1.0) * (e - 0.5 * (mx * vx + my * vy + mz * vz)
                             - bsq / (8.0 * math.pi))
        ptot = p + bsq / (8.0 * math.pi)
        vdotb = vx * bx + vy * by + vz * bz
        return np.array([
            mx,
            mx * vx + ptot - bx * bx / FOUR_PI,
            my * vx - bx * by / FOUR_PI,
            mz * vx - bx * bz / FOUR_PI,
            (e + ptot) * vx - bx * vdotb / FOUR_PI,
            vx * by - vy * bx,
            vx * bz - vz * bx,
        ])

    def prim_matrix(w):
        rho, vx, vy, vz, p, by, bz = w
        a = np.zeros((7, 7))
        np.fill_diagonal(a, vx)
        a[0, 1] = rho
        a[1, 4] = 1.0 / rho
        a[1, 5] = by / (FOUR_PI * rho)
        a[1, 6] = bz / (FOUR_PI * rho)
        a[2, 5] = -bx / (FOUR_PI * rho)
        a[3, 6] = -bx / (FOUR_PI * rho)
        a[4, 1] = gamma * p
        a[5, 1] = by
        a[5, 2] = -bx
        a[6, 1] = bz
        a[6, 3] = -bx
        return a

    def du_dw(w):
        rho, vx, vy, vz, p, by, bz = w
        j = np.zeros((7, 7))
        j[0, 0] = 1.0
        j[1, 0], j[1, 1] = vx, rho
        j[2, 0], j[2, 2] = vy, rho
        j[3, 0], j[3, 3] = vz, rho
        j[4, 0] = 0.5 * (vx * vx + vy * vy + vz * vz)
        j[4, 1], j[4, 2], j[4, 3] = rho * vx, rho * vy, rho * vz
        j[4, 4] = 1.0 / (gamma - 1.0)
        j[4, 5] = by / FOUR_PI
        j[4, 6] = bz / FOUR_PI
        j[5, 5] = 1.0
        j[6, 6] = 1.0
        return j

    def dw_du(w):
        rho, vx, vy, vz, p, by, bz = w
        j = np.zeros((7, 7))
        g1 = gamma - 1.0
        j[0, 0] = 1.0
        j[1, 0], j[1, 1] = -vx / rho, 1.0 / rho
        j[2, 0], j[2, 2] = -vy / rho, 1.0 / rho
        j[3, 0], j[3, 3] = -vz / rho, 1.0 / rho
        j[4, 0] = 0.5 * g1 * (vx * vx + vy * vy + vz * vz)
        j[4, 1], j[4, 2], j[4, 3] = -g1 * vx, -g1 * vy, -g1 * vz
        j[4, 4] = g1
        j[4, 5] = -g1 * by / FOUR_PI
        j[4, 6] = -g1 * bz / FOUR_PI
        j[5, 5] = 1.0
        j[6, 6] = 1.0
        return j

    def cons_jacobian(u):
        w = cons_to_prim(u)
        return du_dw(w) @ prim_matrix(w) @ dw_du(w)

    def eigenvalues(u):
        rho = u[0]
        vx = u[1] / rho
        w = cons_to_prim(u)
        _, bx2, _, cf2, cs2 = _speeds(rho, w[4], w[5], w[6], bx, gamma)
        cf, ca, cs = math.sqrt(cf2), math.sqrt(bx2), math.sqrt(cs2)
        return np.array([vx - cf, vx - ca, vx - cs, vx, vx + cs, vx + ca, vx + cf])

    def eigensystem_cb(u):
        w = cons_to_prim(u)
        rho, vx, vy, vz, p, by, bz = w
        a2, bx2, bp2, cf2, cs2 = _speeds(rho, p, by, bz, bx, gamma)
        a = math.sqrt(a2)
        cf, ca, cs = math.sqrt(cf2), math.sqrt(bx2), math.sqrt(cs2)
        sgn = 1.0 if bx >= 0.0 else -1.0
        sq4pr = math.sqrt(FOUR_PI * rho)

        bperp = math.hypot(by, bz)
        if bperp > PERP_FIELD_TOL * max(1.0, abs(bx)):
            bey, bez = by / bperp, bz / bperp
        else:
            bey = bez = 1.0 / math.sqrt(2.0)
        denom = cf2 - cs2
        if denom > 1e-30 * max(cf2, 1.0):
            af = math.sqrt(min(max((a2 - cs2) / denom, 0.0), 1.0))
            as_ = math.sqrt(min(max((cf2 - a2) / denom, 0.0), 1.0))
        else:
            af = as_ = 1.0 / math.sqrt(2.0)

        def fast(sign):
            return np.array([
                rho * af, sign * af * cf,
                -sign * as_ * cs * bey * sgn, -sign * as_ * cs * bez * sgn,
                af * gamma * p, as_ * sq4pr * a * bey, as_ * sq4pr * a * bez])

        def slow(sign):
            return np.array([
                rho * as_, sign * as_ * cs,
                sign * af * cf * bey * sgn, sign * af * cf * bez * sgn,
                as_ * gamma * p, -af * sq4pr * a * bey, -af * sq4pr * a * bez])

        def alfven(sign):
            # sign = +1 for the wave at vx + ca, -1 at vx - ca.
            return np.array([
                0.0, 0.0, sign * sgn * bez, -sign * sgn * bey, 0.0,
                -bez * sq4pr, bey * sq4pr])

        entropy = np.zeros(7)
        entropy[0] = 1.0

        order = [
            (vx - cf, fast(-1.0), GENUINELY_NONLINEAR),
            (vx - ca, alfven(-1.0), LINEARLY_DEGENERATE),
            (vx - cs, slow(-1.0), GENUINELY_NONLINEAR),
            (vx, entropy, LINEARLY_DEGENERATE),
            (vx + cs, slow(1.0), GENUINELY_NONLINEAR),
            (vx + ca, alfven(1.0), LINEARLY_DEGENERATE),
            (vx + cf, fast(1.0), GENUINELY_NONLINEAR),
        ]
        r_prim = np.column_stack([r for _, r, _ in order])
        l_prim = np.linalg.inv(r_prim)
        duw = du_dw(w)
        dwu = dw_du(w)
        r_cons = duw @ r_prim
        l_cons = l_prim @ dwu
        return [EigenField(lam, l_cons[i], r_cons[:, i], tag)
                for i, (lam, _, tag) in enumerate(order)]

    def is_admissible(u):
        if not np.all(np.isfinite(u)):
            return False
        if u[0] <= 0.0:
            return False
        w = cons_to_prim(u)
        return w[4] > 0.0

    def apply_floors(u):
        count = 0
        u = u.copy()
        if u[0] < DENSITY_FLOOR:
            u[0] = DENSITY_FLOOR
            count += 1
        w = cons_to_prim(u)
        if w[4] < PRESSURE_FLOOR:
            w[4] = PRESSURE_FLOOR
            u = prim_to_cons(w)
            count += 1
        return u, count

    return SystemDescriptor(
        name="mhd",
        n_vars=7,
        flux=flux,
        cons_jacobian=cons_jacobian,
        eigensystem_cb=eigensystem_cb,
        eigenvalues=eigenvalues,
        prim_to_cons=lambda w: prim_to_cons(np.asarray(w, dtype=float)),
        cons_to_prim=lambda u: cons_to_prim(np.asarray(u, dtype=float)),
        is_admissible=is_admissible,
        parameters={"gamma": gamma, "bx": bx},
        shock_indicator=lambda u: (cons_to_prim(u)[4], u[1] / u[0]),
        prim_names=("rho", "vx", "vy", "vz", "p", "By", "Bz"),
        reflect_indices=(1,),
        apply_floors=apply_floors,
    )
