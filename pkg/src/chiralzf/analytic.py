"""Closed-form first-order model of the chiral zero-field experiment.

The antisymmetric coupling mixes the singlet with the central triplet state.
To first order the mixed eigenstates are

    |alpha> = (|S> - i (j1bar / 2 j0) |0>) / N
    |beta>  = (|0> - i (j1bar / 2 j0) |S>) / N,      N^2 = 1 + (j1bar / 2 j0)^2

and the predicted transverse signals, in the unit-spin-order convention and
with r = j1bar / j0, are

    Mx(t) =  (4 g1 g2 r / N^2) [cos(w_alpha t) - cos(w_beta t)]
    My(t) = -((g1^2 - g2^2)(1 + r^2) / N^2) [cos(w_alpha t) + cos(w_beta t)]

where w_alpha, w_beta are the |alpha>, |beta> to |+-1> spacings. Their
amplitude ratio,

    |Mx / My| = 4 g1 g2 |r| / ((g1^2 - g2^2)(1 + r^2)),

is the headline chiral-to-achiral figure (0.0107 for the default couplings).

Caveats, verified by the test suite: these formulas are quoted in a
normalization that is exactly -2 times the direct evaluation
sum V_nm rho_mn exp(-i w_nm t) over the first-order states (the coherence
table below IS the direct evaluation and matches brute-force matrix elements).
The ratio is unaffected and agrees with the kappa = 1 simulation; the
signed formulas match the kappa = 1 dynamics only after dividing by -2.
Second-order energy shifts are excluded by default; request
``energies="exact"`` to use the closed-form two-level eigenvalues instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_KAPPA, SpinPair, observables
from .spinops import singlet_triplet_states, spin_operator_set

STATE_KEYS = ("alpha", "beta", "plus", "minus")


@dataclass(frozen=True)
class PerturbedEigensystem:
    """First-order mixed eigenstates and their energies.

    mixing: the complex coefficient of the admixed basis state,
    -i j1bar / (2 j0) for both |alpha> and |beta>. n_factor: the common
    normalization N. energies: Hz, keyed by STATE_KEYS. states: 4-vectors in
    the product basis. overlaps: <basis|state> table keyed (state, basis).
    """

    j0: float
    j1bar: float
    dbar: float
    mixing: complex
    n_factor: float
    energies: dict
    states: dict
    overlaps: dict


def perturbed_states(j0: float, j1bar: float, dbar: float = 0.0,
                     energies: str = "first-order",
                     kappa: float = DEFAULT_KAPPA) -> PerturbedEigensystem:
    """Build the perturbed singlet/triplet eigensystem.

    ``energies="first-order"`` applies only the first-order dipolar shifts
    (-dbar/2 on |+-1>, +dbar on |beta>, none on |alpha>).
    ``energies="exact"`` diagonalizes the singlet/central-triplet block of the
    kappa-normalized Hamiltonian in closed form, which adds the level
    repulsion of order (kappa j1bar)^2 / j0.
    """
    if j0 == 0:
        raise ValueError("perturbation theory requires j0 != 0")
    ratio = j1bar / j0
    if abs(ratio) >= 1:
        raise ValueError(f"|j1bar/j0| = {abs(ratio):.3g} >= 1 is outside the perturbative model")
    if abs(ratio) > 0.1:
        warnings.warn(f"|j1bar/j0| = {abs(ratio):.3g} > 0.1; first-order states are rough",
                      stacklevel=2)

    basis = singlet_triplet_states()
    mixing = -1j * ratio / 2
    n_factor = math.sqrt(1 + abs(mixing) ** 2)
    alpha = (basis["S"] + mixing * basis["0"]) / n_factor
    beta = (basis["0"] + mixing * basis["S"]) / n_factor

    e_plus = j0 / 4 - dbar / 2
    e_minus = e_plus
    if energies == "first-order":
        e_alpha = -3 * j0 / 4
        e_beta = j0 / 4 + dbar
    elif energies == "exact":
        # 2x2 block [[-3 j0/4, i kappa j1bar], [-i kappa j1bar, j0/4 + dbar]]
        mean = (-3 * j0 / 4 + j0 / 4 + dbar) / 2
        half_gap = math.hypot((j0 + dbar) / 2, kappa * j1bar)
        e_alpha = mean - half_gap if j0 > 0 else mean + half_gap
        e_beta = mean + half_gap if j0 > 0 else mean - half_gap
    else:
        raise ValueError(f"energies must be 'first-order' or 'exact', got {energies!r}")

    states = {"alpha": alpha, "beta": beta, "plus": basis["+1"], "minus": basis["-1"]}
    overlaps = {
        (key, name): complex(np.vdot(vec, states[key]))
        for key in ("alpha", "beta")
        for name, vec in basis.items()
    }
    return PerturbedEigensystem(
        j0=j0, j1bar=j1bar, dbar=dbar, mixing=mixing, n_factor=n_factor,
        energies={"alpha": e_alpha, "beta": e_beta, "plus": e_plus, "minus": e_minus},
        states=states, overlaps=overlaps,
    )


@dataclass(frozen=True)
class CoherenceTable:
    """Observable matrix elements and initial coherence amplitudes.

    All entries are literal inner products over the perturbed states: v_x and
    v_y hold <m|Mx|s> and <m|My|s>, rho holds <m|rho(0)|s> for the inverted
    initial state, keyed (m, s) with m in {"plus", "minus"} and s in
    {"alpha", "beta"}. Operators use the unit-spin-order gamma weights.
    """

    v_x: dict
    v_y: dict
    rho: dict


def coherence_table(sp: SpinPair, sys: PerturbedEigensystem) -> CoherenceTable:
    """Evaluate every transition matrix element and coherence amplitude."""
    ops = spin_operator_set()
    g1, g2 = sp.scaled_gammas
    mx, my, _ = observables(sp)
    rho0 = -g1 * ops.i1y + g2 * ops.i2y  # traceless part; identity drops out

    v_x, v_y, rho = {}, {}, {}
    for m in ("plus", "minus"):
        bra = sys.states[m]
        for s in ("alpha", "beta"):
            ket = sys.states[s]
            v_x[(m, s)] = complex(np.vdot(bra, mx @ ket))
            v_y[(m, s)] = complex(np.vdot(bra, my @ ket))
            rho[(m, s)] = complex(np.vdot(bra, rho0 @ ket))
    return CoherenceTable(v_x=v_x, v_y=v_y, rho=rho)


def _angular(sys: PerturbedEigensystem) -> tuple[float, float]:
    w_alpha = 2 * math.pi * (sys.energies["alpha"] - sys.energies["plus"])
    w_beta = 2 * math.pi * (sys.energies["beta"] - sys.energies["plus"])
    return w_alpha, w_beta


def mx_signal(t, sp: SpinPair, sys: PerturbedEigensystem):
    """Predicted x-magnetization, (4 g1 g2 r / N^2)(cos w_a t - cos w_b t).

    Odd in j1bar: the two enantiomers give sign-flipped traces. Gammas are
    unit-convention weights (gamma / gamma_ref).
    """
    tt = np.asarray(t, dtype=float)
    g1, g2 = sp.scaled_gammas
    r = sys.j1bar / sys.j0
    w_alpha, w_beta = _angular(sys)
    amp = 4 * g1 * g2 * r / sys.n_factor ** 2
    out = amp * (np.cos(w_alpha * tt) - np.cos(w_beta * tt))
    return float(out) if np.isscalar(t) else out


def my_signal(t, sp: SpinPair, sys: PerturbedEigensystem):
    """Predicted y-magnetization (the usual achiral zero-field signal).

    -((g1^2 - g2^2)(1 + r^2) / N^2)(cos w_a t + cos w_b t); even in j1bar.
    """
    tt = np.asarray(t, dtype=float)
    g1, g2 = sp.scaled_gammas
    r = sys.j1bar / sys.j0
    w_alpha, w_beta = _angular(sys)
    amp = -(g1 ** 2 - g2 ** 2) * (1 + r ** 2) / sys.n_factor ** 2
    out = amp * (np.cos(w_alpha * tt) + np.cos(w_beta * tt))
    return float(out) if np.isscalar(t) else out


class AmplitudeRatio(tuple):
    """(magnitude, sign) of the chiral-to-achiral amplitude ratio."""

    __slots__ = ()

    def __new__(cls, magnitude: float, sign: int):
        return super().__new__(cls, (magnitude, sign))

    @property
    def magnitude(self) -> float:
        return self[0]

    @property
    def sign(self) -> int:
        return self[1]


def amplitude_ratio(sp: SpinPair, r: float) -> AmplitudeRatio:
    """Mx/My amplitude ratio, 4 g1 g2 r / ((g1^2 - g2^2)(1 + r^2)).

    Returns the magnitude with the sign reported separately; r = j1bar / j0
    carries the handedness. Scale-free in the gammas, so raw MHz/T values are
    used directly.
    """
    g1, g2 = sp.gamma1, sp.gamma2
    if r == 0:
        return AmplitudeRatio(0.0, 0)
    value = 4 * g1 * g2 * r / ((g1 ** 2 - g2 ** 2) * (1 + r ** 2))
    sign = 1 if value > 0 else -1
    return AmplitudeRatio(abs(value), sign)
