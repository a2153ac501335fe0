"""Two-spin operator algebra: Cartesian and spherical components, Clebsch-Gordan
coefficients, bilinear irreducible tensor operators, and pulse rotations.

Basis and layout
----------------
The four-dimensional product basis is ordered (uu, du, ud, dd) where the first
letter is spin 1 and the second is spin 2, i.e. spin 1 varies fastest:

    I1a = kron(E2, s_a),   I2a = kron(s_a, E2)

with s_a the single spin-1/2 operator. With this ordering I1z = diag(1,-1,1,-1)/2
and I2z = diag(1,1,-1,-1)/2.

Spherical components follow the Condon-Shortley convention by default:

    I(+1) = -(Ix + i Iy)/sqrt(2),   I(0) = Iz,   I(-1) = +(Ix - i Iy)/sqrt(2)

so that I(+1) - I(-1) = -sqrt(2) Ix and I(+1) + I(-1) = -i sqrt(2) Iy. The
"additive" convention (both signs positive, so the components sum to
sqrt(2) Ix) is available through the ``convention`` argument for callers who
want transverse observables expressed as a plain sum of components.

Rank-q bilinear tensor operators are

    T(q, k) = sum_{k1,k2} <1 k1; 1 k2 | q k>  I1(k1) I2(k2)

Under Condon-Shortley this gives T(0,0) = -(1/sqrt(3)) I1.I2 and
T(1,0) = -(1/(2 sqrt(2))) (I1+ I2- - I1- I2+).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .qmatrix import as_cmatrix

CONVENTIONS = ("condon-shortley", "additive")


@dataclass(frozen=True, eq=False)
class SpinOperatorSet:
    """All single-spin and total angular momentum operators for the pair."""

    i1x: np.ndarray
    i1y: np.ndarray
    i1z: np.ndarray
    i1p: np.ndarray
    i1m: np.ndarray
    i2x: np.ndarray
    i2y: np.ndarray
    i2z: np.ndarray
    i2p: np.ndarray
    i2m: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray
    identity: np.ndarray
    i_dot_i: np.ndarray

    dim = 4

    def cartesian(self, spin: int, axis: str) -> np.ndarray:
        """Single-spin Cartesian operator, spin in {1, 2}, axis in {x, y, z}."""
        if spin not in (1, 2):
            raise ValueError(f"spin index must be 1 or 2, got {spin}")
        if axis not in ("x", "y", "z"):
            raise ValueError(f"axis must be x, y or z, got {axis!r}")
        return getattr(self, f"i{spin}{axis}")


@lru_cache(maxsize=1)
def spin_operator_set() -> SpinOperatorSet:
    """Construct the two-spin operator set (cached; treat as read-only)."""
    sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    sy = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
    e2 = np.eye(2, dtype=complex)

    i1x, i1y, i1z = (np.kron(e2, s) for s in (sx, sy, sz))
    i2x, i2y, i2z = (np.kron(s, e2) for s in (sx, sy, sz))
    return SpinOperatorSet(
        i1x=i1x, i1y=i1y, i1z=i1z, i1p=i1x + 1j * i1y, i1m=i1x - 1j * i1y,
        i2x=i2x, i2y=i2y, i2z=i2z, i2p=i2x + 1j * i2y, i2m=i2x - 1j * i2y,
        fx=i1x + i2x, fy=i1y + i2y, fz=i1z + i2z,
        identity=np.eye(4, dtype=complex),
        i_dot_i=i1x @ i2x + i1y @ i2y + i1z @ i2z,
    )


def spherical_single(spin: int, k: int, convention: str = "condon-shortley") -> np.ndarray:
    """Rank-1 spherical component I(k) of one spin, k in {-1, 0, +1}."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    ops = spin_operator_set()
    ix = ops.cartesian(spin, "x")
    iy = ops.cartesian(spin, "y")
    iz = ops.cartesian(spin, "z")
    if k == 0:
        return iz.copy()
    if k == 1:
        sign = -1.0 if convention == "condon-shortley" else 1.0
        return sign * (ix + 1j * iy) / math.sqrt(2)
    if k == -1:
        return (ix - 1j * iy) / math.sqrt(2)
    raise ValueError(f"k must be -1, 0 or +1, got {k}")


def _half_int(x, name: str) -> int:
    """Return 2*x as an exact integer, rejecting non-half-integer input."""
    doubled = 2 * x
    rounded = round(doubled)
    if abs(doubled - rounded) > 1e-9:
        raise ValueError(f"{name} = {x} is not integer or half-integer")
    return int(rounded)


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """<j1 m1; j2 m2 | j m> in the Condon-Shortley convention.

    Evaluated with Racah's closed-form sum over exact integer factorials
    (rational arithmetic under the square roots), so results are accurate to
    machine precision for the small angular momenta used here. Returns 0 when
    m != m1 + m2 or the triangle rule fails; raises on malformed quantum
    numbers.
    """
    tj1, tm1 = _half_int(j1, "j1"), _half_int(m1, "m1")
    tj2, tm2 = _half_int(j2, "j2"), _half_int(m2, "m2")
    tj, tm = _half_int(j, "j"), _half_int(m, "m")
    for tjj, tmm, label in ((tj1, tm1, "1"), (tj2, tm2, "2"), (tj, tm, "")):
        if tjj < 0:
            raise ValueError(f"j{label} must be nonnegative")
        if abs(tmm) > tjj:
            raise ValueError(f"|m{label}| exceeds j{label}")
        if (tjj - tmm) % 2 != 0:
            raise ValueError(f"m{label} must differ from j{label} by an integer")

    if tm1 + tm2 != tm:
        return 0.0
    if tj < abs(tj1 - tj2) or tj > tj1 + tj2 or (tj1 + tj2 - tj) % 2 != 0:
        return 0.0

    def fact(twice: int) -> int:
        if twice % 2 != 0:
            raise ValueError("non-integer factorial argument")
        return math.factorial(twice // 2)

    # Prefactor^2 as an exact rational.
    pref2 = Fraction(
        (tj + 1)
        * fact(tj + tj1 - tj2) * fact(tj - tj1 + tj2) * fact(tj1 + tj2 - tj)
        * fact(tj + tm) * fact(tj - tm)
        * fact(tj1 - tm1) * fact(tj1 + tm1)
        * fact(tj2 - tm2) * fact(tj2 + tm2),
        fact(tj1 + tj2 + tj + 2),
    )

    k_min = max(0, (tj2 - tj - tm1) // 2, (tj1 + tm2 - tj) // 2)
    k_max = min((tj1 + tj2 - tj) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            math.factorial(k)
            * fact(tj1 + tj2 - tj - 2 * k)
            * fact(tj1 - tm1 - 2 * k)
            * fact(tj2 + tm2 - 2 * k)
            * fact(tj - tj2 + tm1 + 2 * k)
            * fact(tj - tj1 - tm2 + 2 * k)
        )
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref2 * total * total))


@dataclass(frozen=True, eq=False)
class TensorOperator:
    """Bilinear spherical tensor operator of rank q, component k."""

    q: int
    k: int
    matrix: np.ndarray


def bilinear_tensor_op(q: int, k: int) -> TensorOperator:
    """T(q, k) built from the Clebsch-Gordan contraction of rank-1 components."""
    if q not in (0, 1, 2):
        raise ValueError(f"rank q must be 0, 1 or 2, got {q}")
    if abs(k) > q:
        raise ValueError(f"component k = {k} outside [-q, q] for q = {q}")
    mat = np.zeros((4, 4), dtype=complex)
    for k1 in (-1, 0, 1):
        k2 = k - k1
        if abs(k2) > 1:
            continue
        c = clebsch_gordan(1, k1, 1, k2, q, k)
        if c != 0.0:
            mat += c * _spherical_cached(1, k1) @ _spherical_cached(2, k2)
    return TensorOperator(q=q, k=k, matrix=mat)


@lru_cache(maxsize=None)
def _spherical_cached(spin: int, k: int) -> np.ndarray:
    return spherical_single(spin, k)


def rotation_about_axis(axis: str, theta1: float, theta2: float) -> np.ndarray:
    """Pulse propagator exp(-i theta1 I1a) exp(-i theta2 I2a) about axis a.

    Uses the closed form for spin-1/2 rotations, exp(-i theta I) =
    cos(theta/2) - 2i sin(theta/2) I, which is exactly unitary.
    """
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    if not (np.isfinite(theta1) and np.isfinite(theta2)):
        raise ValueError("rotation angles must be finite")
    ops = spin_operator_set()
    eye = ops.identity

    def single(spin: int, theta: float) -> np.ndarray:
        op = ops.cartesian(spin, axis)
        return math.cos(theta / 2) * eye - 2j * math.sin(theta / 2) * op

    return single(1, theta1) @ single(2, theta2)


def singlet_triplet_states() -> dict[str, np.ndarray]:
    """Normalized singlet and triplet basis vectors in the product basis."""
    s = np.zeros(4, dtype=complex)
    t0 = np.zeros(4, dtype=complex)
    # basis order (uu, du, ud, dd); |S> = (|ud> - |du>)/sqrt(2)
    s[2], s[1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    t0[2], t0[1] = 1 / math.sqrt(2), 1 / math.sqrt(2)
    plus = np.array([1, 0, 0, 0], dtype=complex)
    minus = np.array([0, 0, 0, 1], dtype=complex)
    return {"S": s, "0": t0, "+1": plus, "-1": minus}


def project_bilinear(op) -> dict[tuple[int, int], complex]:
    """Coefficients of an operator on the nine T(q, k), via Tr{T^dag op}/Tr{T^dag T}."""
    a = as_cmatrix(op)
    coeffs: dict[tuple[int, int], complex] = {}
    for q in (0, 1, 2):
        for k in range(-q, q + 1):
            t = bilinear_tensor_op(q, k).matrix
            norm = np.sum(t.conj() * t)
            coeffs[(q, k)] = complex(np.sum(t.conj() * a) / norm)
    return coeffs
