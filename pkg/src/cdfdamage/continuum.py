"""Small-strain kinematics: spectral tensile/compressive split and effective stress.

Works on symmetric strain tensors (2x2 in plane strain, 3x3 in 3D). The
split is by eigenprojection: positive/negative parts of the principal
strains reassembled in the principal basis. In plane strain the
out-of-plane strain is identically zero, so the 2x2 eigenproblem is the
whole story for the split; the out-of-plane stress is reported
separately and never enters the in-plane blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .damage_laws import DamageLaw, degradation
from .errors import ConfigurationError, DomainError

PLANE_STRAIN = "plane_strain"
THREE_D = "3d"


@dataclass(frozen=True)
class Elasticity:
    """Isotropic elasticity: Young's modulus E, Poisson ratio nu, and regime."""

    E: float
    nu: float
    regime: str = PLANE_STRAIN

    def __post_init__(self):
        if not self.E > 0.0:
            raise ConfigurationError(f"E must be positive, got {self.E}")
        if not (-1.0 < self.nu < 0.5):
            raise ConfigurationError(f"nu must lie in (-1, 0.5), got {self.nu}")
        if self.regime not in (PLANE_STRAIN, THREE_D):
            raise ConfigurationError(f"unknown regime '{self.regime}'")

    @property
    def lam(self) -> float:
        """First Lame constant."""
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def mu(self) -> float:
        """Shear modulus."""
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def dim(self) -> int:
        return 2 if self.regime == PLANE_STRAIN else 3


@dataclass(frozen=True)
class SpectralSplit:
    """Tensile/compressive strain parts with their energies and base stresses."""

    eps_plus: np.ndarray
    eps_minus: np.ndarray
    phi_plus: float
    phi_minus: float
    sigma0_plus: np.ndarray
    sigma0_minus: np.ndarray
    # out-of-plane normal stress components (plane strain only, else 0)
    szz_plus: float = 0.0
    szz_minus: float = 0.0


def elasticity_tensor(elast: Elasticity) -> np.ndarray:
    """Isotropic stiffness in Voigt form: 3x3 (plane strain) or 6x6 (3D)."""
    lam, mu = elast.lam, elast.mu
    if elast.regime == PLANE_STRAIN:
        return np.array(
            [
                [lam + 2.0 * mu, lam, 0.0],
                [lam, lam + 2.0 * mu, 0.0],
                [0.0, 0.0, mu],
            ]
        )
    D = np.zeros((6, 6))
    D[:3, :3] = lam
    D[np.diag_indices(3)] += 2.0 * mu
    D[3:, 3:] = np.eye(3) * mu
    return D


def _validate_strain(eps: np.ndarray, dim: int) -> np.ndarray:
    arr = np.asarray(eps, dtype=float)
    if arr.shape != (dim, dim):
        raise DomainError(f"expected a {dim}x{dim} strain tensor, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("strain tensor has non-finite entries")
    if not np.allclose(arr, arr.T, atol=1e-12, rtol=0.0):
        raise DomainError("strain tensor must be symmetric")
    return 0.5 * (arr + arr.T)


def spectral_split(eps: np.ndarray, elast: Elasticity) -> SpectralSplit:
    """Eigenvalue split of the strain with energies phi+- and stresses sigma0+-.

    phi+- = 0.5 * lam * tr(eps+-)^2 + mu * (eps+- : eps+-); in plane strain
    the zero out-of-plane strain contributes to neither part.
    """
    e = _validate_strain(eps, elast.dim)
    lam, mu = elast.lam, elast.mu
    w, v = np.linalg.eigh(e)
    pos = (v * np.maximum(w, 0.0)) @ v.T
    neg = (v * np.minimum(w, 0.0)) @ v.T
    trp, trn = np.trace(pos), np.trace(neg)
    phi_p = 0.5 * lam * trp * trp + mu * float(np.sum(pos * pos))
    phi_n = 0.5 * lam * trn * trn + mu * float(np.sum(neg * neg))
    eye = np.eye(elast.dim)
    sig_p = lam * trp * eye + 2.0 * mu * pos
    sig_n = lam * trn * eye + 2.0 * mu * neg
    szz_p = lam * trp if elast.regime == PLANE_STRAIN else 0.0
    szz_n = lam * trn if elast.regime == PLANE_STRAIN else 0.0
    return SpectralSplit(pos, neg, phi_p, phi_n, sig_p, sig_n, szz_p, szz_n)


def base_energy(eps: np.ndarray, elast: Elasticity) -> float:
    """Undamaged energy density 0.5 * eps : D : eps."""
    e = _validate_strain(eps, elast.dim)
    tr = np.trace(e)
    return 0.5 * elast.lam * tr * tr + elast.mu * float(np.sum(e * e))


def effective_stress(law: DamageLaw, split: SpectralSplit, eta: float) -> np.ndarray:
    """Degraded stress g(eta) * sigma0+ + sigma0-; compression carries full stiffness.

    eta is the history value of phi+ maintained by the caller; passing the
    current phi+ reproduces the monotone-loading response.
    """
    if eta < 0.0:
        raise DomainError("history energy must be >= 0")
    g = degradation(law, eta)
    return g * split.sigma0_plus + split.sigma0_minus
