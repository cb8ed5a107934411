"""Constant-coefficient linear systems.

Handy for verification: every formula in the face-local solvers has a closed
form when F(U) = F0 U and B(U) = B0, so these descriptors back most of the
exactness tests (and make nice demo material).  All characteristic fields of
a constant-coefficient system are linearly degenerate.
"""

import numpy as np

from .. import linalg
from .base import (
    LINEARLY_DEGENERATE,
    EigenField,
    SystemDescriptor,
    fields_from_matrices,
)


def linear_system(f0, b0=None, source_matrix=None, name="linear") -> SystemDescriptor:
    """System with flux F0 @ U, optional constant coupling B0 and source S0 @ U."""
    f0 = np.asarray(f0, dtype=float)
    m = f0.shape[0]
    b0_arr = None if b0 is None else np.asarray(b0, dtype=float)
    s0 = None if source_matrix is None else np.asarray(source_matrix, dtype=float)
    a0 = f0 if b0_arr is None else f0 + b0_arr

    lam, right, left = linalg.eigen_general(a0)
    tags = [LINEARLY_DEGENERATE] * m

    def eigensystem_cb(u):
        return fields_from_matrices(lam, right, left, tags)

    return SystemDescriptor(
        name=name,
        n_vars=m,
        flux=lambda u: f0 @ u,
        cons_jacobian=lambda u: f0.copy(),
        eigensystem_cb=eigensystem_cb,
        eigenvalues=lambda u: lam.copy(),
        prim_to_cons=lambda w: np.asarray(w, dtype=float).copy(),
        cons_to_prim=lambda u: np.asarray(u, dtype=float).copy(),
        is_admissible=lambda u: bool(np.all(np.isfinite(u))),
        noncons_matrix=None if b0_arr is None else (lambda u: b0_arr.copy()),
        source=None if s0 is None else (lambda u: s0 @ u),
        source_jacobian=None if s0 is None else (lambda u: s0.copy()),
        has_nonconservative=b0_arr is not None,
        has_stiff_source=s0 is not None,
        shock_indicator=lambda u: (1.0, 0.0),
        prim_names=tuple(f"u{i}" for i in range(m)),
    )


def varying_b_system(f0, b_of_u, name="varying-b") -> SystemDescriptor:
    """Linear flux with a state-dependent coupling matrix B(U).

    Used to exercise the path-averaged coupling quadrature with non-constant
    integrands; the eigensystem is evaluated numerically at each state.
    """
    f0 = np.asarray(f0, dtype=float)
    m = f0.shape[0]

    def eigensystem_cb(u):
        lam, right, left = linalg.eigen_general(f0 + b_of_u(u))
        return fields_from_matrices(lam, right, left)

    def eigenvalues(u):
        lam, _, _ = linalg.eigen_general(f0 + b_of_u(u))
        return lam

    return SystemDescriptor(
        name=name,
        n_vars=m,
        flux=lambda u: f0 @ u,
        cons_jacobian=lambda u: f0.copy(),
        eigensystem_cb=eigensystem_cb,
        eigenvalues=eigenvalues,
        prim_to_cons=lambda w: np.asarray(w, dtype=float).copy(),
        cons_to_prim=lambda u: np.asarray(u, dtype=float).copy(),
        is_admissible=lambda u: bool(np.all(np.isfinite(u))),
        noncons_matrix=b_of_u,
        has_nonconservative=True,
        shock_indicator=lambda u: (1.0, 0.0),
        prim_names=tuple(f"u{i}" for i in range(m)),
    )
