"""Cartesian coupling-tensor decomposition, enantiomer reflection, and
electric-field orientational averaging.

The 3x3 coupling tensor J (Hz) lives in molecule-fixed axes with z along the
molecular electric dipole. It splits into a scalar part j0 = Tr(J)/3, an
antisymmetric (rank-1) part stored as the axial vector (J_yz, J_zx, J_xy),
and a symmetric traceless rank-2 part.

Reflection through the xz plane (the plane containing the dipole) maps a
molecule to its mirror image: J_xy and J_yz change sign, J_xz does not. Rapid
rotation about the dipole axis averages the antisymmetric part down to its
z-axial component J_xy, scaled by the orientational order parameter
s = mu E_loc / (3 k T), with the local field E_loc = ((eps_r + 2)/3) E_applied.
The unavoidable byproduct is a residual dipolar coupling, quadratic in s:
dbar = -(1/30) (3 s)^2 * b, with b the full dipolar coupling constant.

Convention note: the rank-1 zero component is identified with J_xy itself
(not the spherical-harmonic normalization, which would carry a factor
-i*sqrt(2)); every downstream coupling value in this package uses that
identification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DEBYE, HBAR, K_BOLTZMANN, MU0_OVER_4PI


@dataclass(frozen=True)
class CartesianJ:
    """3x3 coupling tensor in Hz, molecule-fixed axes, z along the dipole."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"coupling tensor must be 3x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("coupling tensor entries must be finite")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class IrreducibleJ:
    """Scalar, antisymmetric-vector and symmetric-traceless parts, all Hz.

    ``j1`` is the axial vector (J_yz, J_zx, J_xy) of the antisymmetric part.
    """

    j0: float
    j1: np.ndarray
    j2: np.ndarray


@dataclass(frozen=True)
class OrientationConditions:
    """Sample conditions for electric-field orientation.

    mu_debye: molecular electric dipole (debye); e_applied: applied field
    (V/m); eps_r: static relative permittivity; temperature: K; bond_length:
    internuclear distance (m); gamma1, gamma2: gyromagnetic ratios (MHz/T).
    """

    mu_debye: float
    e_applied: float
    eps_r: float
    temperature: float
    bond_length: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.eps_r < 1:
            raise ValueError("relative permittivity must be >= 1")
        if self.mu_debye < 0:
            raise ValueError("dipole moment must be nonnegative")
        if self.bond_length <= 0:
            raise ValueError("bond length must be positive")


@dataclass(frozen=True)
class ZFParams:
    """Effective zero-field couplings feeding the simulation Hamiltonian (Hz).

    j0: scalar coupling; j1bar: time-averaged antisymmetric coupling, signed
    (sign encodes handedness); dbar: time-averaged dipolar coupling, signed.
    """

    j0: float
    j1bar: float
    dbar: float


def antisymmetric_from_vector(v) -> np.ndarray:
    """Antisymmetric matrix with axial vector v = (a_x, a_y, a_z)."""
    ax, ay, az = v
    return np.array([[0.0, az, -ay], [-az, 0.0, ax], [ay, -ax, 0.0]])


def decompose(j: CartesianJ) -> IrreducibleJ:
    """Split a Cartesian tensor into rank-0, rank-1 and rank-2 parts."""
    m = j.matrix
    j0 = float(np.trace(m)) / 3.0
    anti = (m - m.T) / 2.0
    j1 = np.array([anti[1, 2], anti[2, 0], anti[0, 1]])
    j2 = (m + m.T) / 2.0 - j0 * np.eye(3)
    return IrreducibleJ(j0=j0, j1=j1, j2=j2)


def recompose(d: IrreducibleJ) -> CartesianJ:
    """Inverse of :func:`decompose`."""
    m = d.j0 * np.eye(3) + antisymmetric_from_vector(d.j1) + np.asarray(d.j2, dtype=float)
    return CartesianJ(matrix=m)


def reflect_enantiomer(j: CartesianJ) -> CartesianJ:
    """Mirror-image tensor: conjugation by diag(1, -1, 1), i.e. reflection
    through the xz plane. J_xy and J_yz flip sign; symmetric entries involving
    y flip in pairs; the operation is an involution."""
    mirror = np.diag([1.0, -1.0, 1.0])
    return CartesianJ(matrix=mirror @ j.matrix @ mirror)


def rank1_zero_component(d: IrreducibleJ) -> float:
    """The chirality-carrying component J_xy (the package's rank-1 zero
    component convention; see module docstring)."""
    return float(d.j1[2])


def wigner_small_d(q: int, mprime: int, m: int, beta: float) -> float:
    """Wigner small-d matrix element d^q_{m', m}(beta) for integer q."""
    if q not in (0, 1, 2):
        raise ValueError(f"rank q must be 0, 1 or 2, got {q}")
    if abs(mprime) > q or abs(m) > q:
        raise ValueError(f"|m'|, |m| must be <= q = {q}")
    total = 0.0
    k_min = max(0, m - mprime)
    k_max = min(q + m, q - mprime)
    for k in range(k_min, k_max + 1):
        num = (-1) ** (k + mprime - m) * math.sqrt(
            math.factorial(q + m) * math.factorial(q - m)
            * math.factorial(q + mprime) * math.factorial(q - mprime)
        )
        den = (
            math.factorial(k) * math.factorial(q + m - k)
            * math.factorial(q - mprime - k) * math.factorial(mprime - m + k)
        )
        total += (num / den) * (
            math.cos(beta / 2) ** (2 * q + m - mprime - 2 * k)
            * math.sin(beta / 2) ** (2 * k + mprime - m)
        )
    return total


def local_field(e_applied: float, eps_r: float) -> float:
    """Reaction-field estimate of the field at the molecule in a polar liquid."""
    return (eps_r + 2.0) / 3.0 * e_applied


def order_parameter(c: OrientationConditions) -> float:
    """Weak-field orientational order parameter s = mu E_loc / (3 k T)."""
    mu = c.mu_debye * DEBYE
    return mu * local_field(c.e_applied, c.eps_r) / (3.0 * K_BOLTZMANN * c.temperature)


def required_field(s_target: float, mu_debye: float, eps_r: float, temperature: float) -> float:
    """Applied field (V/m) that produces a given order parameter; inverse of
    :func:`order_parameter`."""
    if s_target <= 0:
        raise ValueError("target order parameter must be positive")
    if mu_debye <= 0:
        raise ValueError("molecule has no electric dipole and cannot be oriented")
    mu = mu_debye * DEBYE
    return s_target * 3.0 * K_BOLTZMANN * temperature / (mu * (eps_r + 2.0) / 3.0)


def average_rank1(j1_0: float, s: float) -> float:
    """Time-averaged antisymmetric coupling: s * J_xy, signed."""
    if abs(s) > 1:
        raise ValueError(f"|s| = {abs(s)} exceeds 1; averaging cannot amplify")
    return s * j1_0


def dipolar_constant(c: OrientationConditions) -> float:
    """Full dipolar coupling constant b/2pi in Hz for the bonded pair."""
    g1 = 2 * math.pi * c.gamma1 * 1e6  # rad/s/T
    g2 = 2 * math.pi * c.gamma2 * 1e6
    return MU0_OVER_4PI * g1 * g2 * HBAR / (2 * math.pi * c.bond_length ** 3)


def residual_dipolar(c: OrientationConditions, s: float) -> float:
    """Orientation-scaled dipolar coupling, -(1/30) (3 s)^2 b, in Hz.

    Quadratic (even) in s, so it survives electric-field reversal, unlike the
    rank-1 average which is odd in s. The formula's sign is negative; callers
    that want the opposite sign in a simulation set it explicitly.
    """
    return -(1.0 / 30.0) * (3.0 * s) ** 2 * dipolar_constant(c)
