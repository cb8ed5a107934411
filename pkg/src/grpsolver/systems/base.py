"""The pluggable contract every hyperbolic system implements.

A system is described by a set of pure callbacks bundled in a
SystemDescriptor: flux, Jacobians, the non-conservative coupling matrix, the
source term, the eigensystem, and the primitive/conserved conversions.  The
face-local solvers and the finite-volume driver never see anything but this
contract, which is what makes them applicable to any 1D hyperbolic system.

State vectors are plain 1D numpy arrays of length M in conserved variables.
Eigenvectors handed out by a descriptor are always expressed in conserved
variables, even when they are derived analytically in primitive variables,
because the face solvers project conserved-state jumps onto them.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .. import linalg

GENUINELY_NONLINEAR = "genuinely-nonlinear"
LINEARLY_DEGENERATE = "linearly-degenerate"

# Orthonormalization contract for provided eigenfields.
BIORTHO_TOL = 1e-9

WaveSubset = Union[str, Sequence[int]]  # "all" | "linearly-degenerate" | "none" | indices


class AdmissibilityError(ValueError):
    """A state violates the system's physical admissibility constraints."""


@dataclass
class EigenField:
    """One characteristic field: eigenvalue plus its left/right eigenvectors.

    Vectors are in the conserved-variable basis and satisfy left @ right = 1
    to within BIORTHO_TOL.
    """

    eigenvalue: float
    left: np.ndarray
    right: np.ndarray
    degeneracy_class: str = GENUINELY_NONLINEAR


@dataclass
class SystemDescriptor:
    """Bundle of callbacks defining one hyperbolic system.

    The quasi-linear form is  dU/dt + dF(U)/dx + B(U) dU/dx = S(U)  with
    characteristic matrix A(U) = dF/dU + B(U).  Conservative systems have
    B identically zero; non-stiff systems have S identically zero.
    """

    name: str
    n_vars: int
    flux: Callable[[np.ndarray], np.ndarray]
    cons_jacobian: Callable[[np.ndarray], np.ndarray]
    eigensystem_cb: Callable[[np.ndarray], list]
    eigenvalues: Callable[[np.ndarray], np.ndarray]
    prim_to_cons: Callable[[np.ndarray], np.ndarray]
    cons_to_prim: Callable[[np.ndarray], np.ndarray]
    is_admissible: Callable[[np.ndarray], bool]
    noncons_matrix: Optional[Callable[[np.ndarray], np.ndarray]] = None
    source: Optional[Callable[[np.ndarray], np.ndarray]] = None
    source_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    has_nonconservative: bool = False
    has_stiff_source: bool = False
    parameters: dict = field(default_factory=dict)
    # (indicator variable, normal velocity) used by the shock flattener.
    shock_indicator: Optional[Callable[[np.ndarray], tuple]] = None
    # Primitive variable names, for output and config parsing.
    prim_names: tuple = ()
    # Extra derived output columns: name -> fn(prim) appended to CSV output.
    extra_outputs: tuple = ()
    # Indices of components whose sign flips at a reflecting wall.
    reflect_indices: tuple = ()
    # Scheme-level positivity repair; returns (state, n_floors_applied).
    apply_floors: Optional[Callable[[np.ndarray], tuple]] = None

    def b_matrix(self, u: np.ndarray) -> np.ndarray:
        if self.noncons_matrix is None:
            return np.zeros((self.n_vars, self.n_vars))
        return self.noncons_matrix(u)

    def source_term(self, u: np.ndarray) -> np.ndarray:
        if self.source is None:
            return np.zeros(self.n_vars)
        return self.source(u)

    def source_jac(self, u: np.ndarray) -> np.ndarray:
        if self.source_jacobian is None:
            return np.zeros((self.n_vars, self.n_vars))
        return self.source_jacobian(u)

    def require_admissible(self, u: np.ndarray) -> None:
        if not self.is_admissible(u):
            raise AdmissibilityError(f"inadmissible {self.name} state: {u}")


def char_matrix(sys: SystemDescriptor, u: np.ndarray) -> np.ndarray:
    """Characteristic matrix A(U): flux Jacobian plus non-conservative part."""
    sys.require_admissible(u)
    a = sys.cons_jacobian(u)
    if sys.has_nonconservative:
        a = a + sys.noncons_matrix(u)
    return a


def check_jacobian(sys: SystemDescriptor, u: np.ndarray, h: float = 1e-6) -> float:
    """Max discrepancy between the coded flux Jacobian and central differences.

    A cheap validation tool for new system implementations; the step h is in
    absolute units of each conserved component.
    """
    sys.require_admissible(u)
    u = np.asarray(u, dtype=float)
    m = sys.n_vars
    jac = sys.cons_jacobian(u)
    fd = np.empty((m, m))
    for j in range(m):
        up = u.copy()
        um = u.copy()
        up[j] += h
        um[j] -= h
        fd[:, j] = (sys.flux(up) - sys.flux(um)) / (2.0 * h)
    return float(np.abs(jac - fd).max())


def eigensystem(sys: SystemDescriptor, u: np.ndarray, subset: WaveSubset = "all"):
    """Characteristic fields of the system at state u, filtered by subset.

    subset may be "all", "linearly-degenerate", "none", or an explicit list
    of indices into the ascending-eigenvalue ordering.  An empty selection is
    legitimate: downstream anti-diffusive corrections then vanish and the
    two-wave solver is recovered.
    """
    sys.require_admissible(u)
    if isinstance(subset, str) and subset == "none":
        return []
    fields = sys.eigensystem_cb(u)
    fields.sort(key=lambda f: f.eigenvalue)
    if isinstance(subset, str):
        if subset == "all":
            return fields
        if subset == "linearly-degenerate":
            return [f for f in fields if f.degeneracy_class == LINEARLY_DEGENERATE]
        raise ValueError(f"unknown wave subset {subset!r}")
    return [fields[i] for i in subset]


def fields_from_matrices(lam, right, left, degeneracy=None) -> list:
    """Package eigendecomposition matrices into EigenField records."""
    out = []
    for p in range(len(lam)):
        tag = GENUINELY_NONLINEAR if degeneracy is None else degeneracy[p]
        out.append(EigenField(float(lam[p]), left[p, :].copy(), right[:, p].copy(), tag))
    return out


def numerical_eigensystem(sys: SystemDescriptor, u: np.ndarray, ld_speed=None) -> list:
    """Fallback eigensystem via the general dense eigensolver.

    Fields whose eigenvalue coincides with ld_speed(u) (when given) are
    tagged linearly degenerate; everything else is treated as genuinely
    nonlinear.
    """
    a = char_matrix(sys, u)
    lam, right, left = linalg.eigen_general(a)
    radius = max(np.abs(lam).max(), 1e-300)
    tags = []
    for lp in lam:
        if ld_speed is not None and abs(lp - ld_speed(u)) <= 1e-9 * radius:
            tags.append(LINEARLY_DEGENERATE)
        else:
            tags.append(GENUINELY_NONLINEAR)
    return fields_from_matrices(lam, right, left, tags)


def biorthonormalize(rights: np.ndarray, lefts: np.ndarray) -> np.ndarray:
    """Rescale left eigenvectors (rows) so that lefts @ rights = identity.

    Assumes the vectors already pair up field by field; only the mutual
    normalization is repaired (analytic eigenvector sets from the literature
    are frequently printed with inconsistent normalizations).
    """
    gram = lefts @ rights
    return linalg.linear_solve_matrix(gram, lefts)
