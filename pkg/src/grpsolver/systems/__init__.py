"""Concrete hyperbolic-system descriptors and the registry used by the CLI."""

from .base import (
    AdmissibilityError,
    EigenField,
    SystemDescriptor,
    char_matrix,
    check_jacobian,
    eigensystem,
)
from .euler import EulerParams, euler_descriptor
from .linear import linear_system, varying_b_system
from .mhd import MhdParams, mhd_descriptor
from .shallow_water import SweParams, swe_descriptor
from .ns_relaxation import NsRelaxParams, nsrelax_descriptor, sutherland_viscosity

#: Factories addressable by name from configuration files.
REGISTRY = {
    "euler": euler_descriptor,
    "mhd": mhd_descriptor,
    "swe": swe_descriptor,
    "nsrelax": nsrelax_descriptor,
}
