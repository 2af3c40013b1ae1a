"""Isotropic material data and symmetric-tensor algebra in Voigt storage.

A symmetric 2x2 tensor is stored as the triple ``(t11, t22, t12)``.  The
tensor dot product counts the off-diagonal entry twice:

    s : t = s11 t11 + s22 t22 + 2 s12 t12.

The stiffness map is ``C e = 2 mu e + lam tr(e) I`` and its inverse is

    Cinv s = (1 / (2 mu)) * (s - lam / (2 mu + 2 lam) tr(s) I),

with spectral bounds M0 = 1/(2 mu + 2 lam) and M1 = 1/(2 mu) on the
compliance, so M0 ||t||^2 <= Cinv t : t <= M1 ||t||^2 pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "VoigtTensor",
    "IsotropicMaterial",
    "voigt_inner",
    "apply_stiffness",
    "apply_compliance",
    "compliance_bounds",
]


class VoigtTensor(NamedTuple):
    """Symmetric 2x2 tensor stored as (t11, t22, t12)."""

    t11: float
    t22: float
    t12: float


@dataclass(frozen=True)
class IsotropicMaterial:
    """Density and Lame parameters of a homogeneous isotropic solid."""

    rho: float = 1.0
    mu: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0.0):
            raise ValueError(f"density must be positive, got {self.rho}")
        if not (self.mu > 0.0):
            raise ValueError(f"shear modulus must be positive, got {self.mu}")
        if self.lam < 0.0:
            raise ValueError(f"first Lame parameter must be nonnegative, got {self.lam}")

    def stiffness_matrix(self) -> np.ndarray:
        """Matrix of the stiffness map acting on (t11, t22, t12)."""
        two_mu, lam = 2.0 * self.mu, self.lam
        return np.array(
            [
                [two_mu + lam, lam, 0.0],
                [lam, two_mu + lam, 0.0],
                [0.0, 0.0, two_mu],
            ]
        )

    def compliance_matrix(self) -> np.ndarray:
        """Matrix of the inverse stiffness map acting on (t11, t22, t12)."""
        inv_two_mu = 1.0 / (2.0 * self.mu)
        c = self.lam / (2.0 * self.mu + 2.0 * self.lam)
        return inv_two_mu * np.array(
            [
                [1.0 - c, -c, 0.0],
                [-c, 1.0 - c, 0.0],
                [0.0, 0.0, 1.0],
            ]
        )


def _apply(matrix: np.ndarray, tensor):
    arr = np.asarray(tensor, dtype=float)
    if arr.shape[-1] != 3:
        raise ValueError(f"expected Voigt triples in the last axis, got shape {arr.shape}")
    out = arr @ matrix.T
    if isinstance(tensor, VoigtTensor):
        return VoigtTensor(*out)
    return out


def voigt_inner(a, b):
    """Tensor dot product of Voigt triples; broadcasts over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + 2.0 * a[..., 2] * b[..., 2]


def apply_stiffness(material: IsotropicMaterial, strain):
    """Stress produced by a strain; accepts a VoigtTensor or an (..., 3) array."""
    return _apply(material.stiffness_matrix(), strain)


def apply_compliance(material: IsotropicMaterial, stress):
    """Strain produced by a stress; accepts a VoigtTensor or an (..., 3) array."""
    return _apply(material.compliance_matrix(), stress)


def compliance_bounds(material: IsotropicMaterial) -> tuple[float, float]:
    """Spectral bounds (M0, M1) of the compliance under the tensor dot product."""
    return (
        1.0 / (2.0 * material.mu + 2.0 * material.lam),
        1.0 / (2.0 * material.mu),
    )
