"""Zero-field spin dynamics: Hamiltonian assembly, initial density matrices,
discrete-time propagation, and observable recording.

Hamiltonian (rad/s), for effective couplings j0, j1bar, dbar in Hz:

    H = 2 pi j0 (I1.I2)
      + 2 pi i kappa j1bar (I1+ I2- - I1- I2+)
      + 2 pi dbar (-2 I1z I2z + (I1+ I2- + I1- I2+)/2)

kappa is the normalization of the antisymmetric term. kappa = 1 is this
package's frozen default: the acceptance sweep shows it reproduces the
reference x/y amplitude ratio of 0.0106, while kappa = 1/2 (the value implied
by the first-order mixing coefficient j1bar/(2 j0) of the closed-form model
in :mod:`chiralzf.analytic`) gives half that. See the acceptance suite.

Scale conventions
-----------------
``unit`` (default): density matrices carry unit spin order, rho = 1/4 +
sum_i (gamma_i/gamma_ref) I_iy, and observables are M_a =
sum_i (gamma_i/gamma_ref) I_ia with gamma_ref = max |gamma|. Channel values
are then O(1), which keeps the floating-point noise floor of the exact
enantiomer symmetries below 1e-12 over tens of thousands of steps. Amplitude
ratios, correlations and phases do not depend on this choice.

``absolute``: the traceless part carries the physical Boltzmann prefactor
B_p hbar gamma / (4 k T) with gamma in rad/s/T; such matrices are positive
semidefinite and describe the real prepolarized sample.

Sign symmetries worth knowing: conjugation by the pi rotation about y maps
the Hamiltonian with +j1bar to the one with -j1bar while fixing y-polarized
initial states, negating M_x and fixing M_y. Enantiomer x-signals are
therefore exact mirror images, a racemic average vanishes identically, and
j1bar = 0 forces M_x = 0 regardless of dbar.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .constants import HBAR, K_BOLTZMANN
from .coupling import ZFParams
from .qmatrix import EigenSystem, herm_eigendecompose, require_hermitian
from .spinops import rotation_about_axis, singlet_triplet_states, spin_operator_set

DEFAULT_KAPPA = 1.0


@dataclass(frozen=True)
class SpinPair:
    """Two unlike spin-1/2 nuclei; gammas in MHz/T."""

    gamma1: float
    gamma2: float
    label1: str = "spin1"
    label2: str = "spin2"

    def __post_init__(self):
        if self.gamma1 == 0 or self.gamma2 == 0:
            raise ValueError("gyromagnetic ratios must be nonzero")
        if self.gamma1 == self.gamma2:
            raise ValueError("zero-field coherences require unlike spins (distinct gammas)")

    @property
    def gamma_ref(self) -> float:
        return max(abs(self.gamma1), abs(self.gamma2))

    @property
    def scaled_gammas(self) -> tuple[float, float]:
        """(gamma1, gamma2) / gamma_ref, the unit-convention weights."""
        ref = self.gamma_ref
        return self.gamma1 / ref, self.gamma2 / ref


@dataclass
class DensityMatrix:
    """4x4 density matrix plus the scale convention it was built under."""

    matrix: np.ndarray
    scale: str = "unit"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {m.shape}")
        if self.scale not in ("unit", "absolute"):
            raise ValueError(f"scale must be 'unit' or 'absolute', got {self.scale!r}")
        self.matrix = m

    def validate(self, tol: float = 1e-12) -> None:
        """Check hermiticity and unit trace; positivity only in absolute scale
        (unit-spin-order matrices are bookkeeping objects and may be indefinite)."""
        require_hermitian(self.matrix, tol, name="density matrix")
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density matrix trace {tr} differs from 1 by more than {tol}")
        if self.scale == "absolute":
            lo = float(np.linalg.eigvalsh(self.matrix).min())
            if lo < -tol:
                raise ValueError(f"density matrix has negative eigenvalue {lo}")

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass
class TimeSeries:
    """Sampled (Mx, My, Mz) observables on a uniform time grid.

    ``channels`` has shape (n, 3); sample k sits at t = k * dt, so n * dt is
    the total acquisition time. ``meta`` records how the series was produced.
    """

    dt: float
    channels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[1] != 3:
            raise ValueError(f"channels must have shape (n, 3), got {ch.shape}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(ch)):
            raise ValueError("time series contains non-finite samples")
        self.channels = ch

    @property
    def n(self) -> int:
        return self.channels.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    @property
    def mx(self) -> np.ndarray:
        return self.channels[:, 0]

    @property
    def my(self) -> np.ndarray:
        return self.channels[:, 1]

    @property
    def mz(self) -> np.ndarray:
        return self.channels[:, 2]

    def channel(self, name: str) -> np.ndarray:
        try:
            return self.channels[:, "xyz".index(name)]
        except ValueError:
            raise ValueError(f"channel must be 'x', 'y' or 'z', got {name!r}") from None


def observables(sp: SpinPair) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit-convention magnetization operators (Mx, My, Mz)."""
    ops = spin_operator_set()
    g1, g2 = sp.scaled_gammas
    return (
        g1 * ops.i1x + g2 * ops.i2x,
        g1 * ops.i1y + g2 * ops.i2y,
        g1 * ops.i1z + g2 * ops.i2z,
    )


def build_hamiltonian(p: ZFParams, kappa: float = DEFAULT_KAPPA) -> np.ndarray:
    """Zero-field Hamiltonian in rad/s for the given effective couplings."""
    ops = spin_operator_set()
    flip_diff = ops.i1p @ ops.i2m - ops.i1m @ ops.i2p
    flip_sum = ops.i1p @ ops.i2m + ops.i1m @ ops.i2p
    h = 2 * math.pi * p.j0 * ops.i_dot_i
    h = h + 2 * math.pi * 1j * kappa * p.j1bar * flip_diff
    h = h + 2 * math.pi * p.dbar * (-2 * ops.i1z @ ops.i2z + 0.5 * flip_sum)
    return require_hermitian(h, 1e-13, name="zero-field Hamiltonian")


def thermal_state(sp: SpinPair, bp: float, temperature: float, axis: str = "y",
                  scale: str = "unit") -> DensityMatrix:
    """High-temperature prepolarized state in a field ``bp`` along ``axis``.

    In absolute scale the traceless coefficient is B_p hbar gamma / (4 k T)
    per spin (gamma in rad/s/T). Warns if the first-order expansion of the
    Boltzmann factor is stretched (B_p hbar gamma / k T > 0.01).
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    ops = spin_operator_set()
    op1 = ops.cartesian(1, axis)
    op2 = ops.cartesian(2, axis)
    if scale == "unit":
        g1, g2 = sp.scaled_gammas
        c1 = g1 if bp != 0 else 0.0
        c2 = g2 if bp != 0 else 0.0
    elif scale == "absolute":
        for gamma in (sp.gamma1, sp.gamma2):
            x = abs(bp) * HBAR * abs(2 * math.pi * gamma * 1e6) / (K_BOLTZMANN * temperature)
            if x > 0.01:
                warnings.warn(
                    f"high-temperature expansion marginal: B_p hbar gamma / kT = {x:.3g}",
                    stacklevel=2,
                )
        pref = bp * HBAR / (4 * K_BOLTZMANN * temperature)
        c1 = pref * 2 * math.pi * sp.gamma1 * 1e6
        c2 = pref * 2 * math.pi * sp.gamma2 * 1e6
    else:
        raise ValueError(f"scale must be 'unit' or 'absolute', got {scale!r}")
    rho = ops.identity / 4 + c1 * op1 + c2 * op2
    out = DensityMatrix(matrix=rho, scale=scale)
    out.validate()
    return out


def apply_pulse(rho: DensityMatrix, axis: str, theta1: float, theta2: float) -> DensityMatrix:
    """Rotate the state by a hard pulse, rho -> R rho R^dag."""
    r = rotation_about_axis(axis, theta1, theta2)
    return DensityMatrix(matrix=r @ rho.matrix @ r.conj().T, scale=rho.scale)


def ideal_inverted_state(sp: SpinPair) -> DensityMatrix:
    """Unit-convention state with traceless part exactly -g1 I1y + g2 I2y.

    This is the idealized prepolarize-then-invert-spin-1 initial condition; a
    real pulse (pi on spin 1, (gamma2/gamma1) pi on spin 2) approximates it
    with a small residual along z.
    """
    ops = spin_operator_set()
    g1, g2 = sp.scaled_gammas
    rho = ops.identity / 4 - g1 * ops.i1y + g2 * ops.i2y
    return DensityMatrix(matrix=rho, scale="unit")


def propagate(rho0: DensityMatrix, h: np.ndarray, dt: float, n: int, sp: SpinPair,
              eig=None, meta: dict | None = None) -> TimeSeries:
    """Evolve rho0 under the fixed step propagator U = exp(-i H dt),
    recording (Mx, My, Mz) before every step (the first row is t = 0).

    The stepping runs in the eigenbasis of H, where U is diagonal and the
    step rho -> U rho U^dag is an elementwise multiply by
    exp(-i (lambda_i - lambda_j) dt). Populations are multiplied by exactly
    one, so the trace is conserved bitwise over any number of steps; the
    observables are evaluated with the operators rotated into the same basis.
    ``eig`` overrides the eigensystem of H (the enantiomer-pair driver passes
    conjugated eigenvectors, exact for the mirrored Hamiltonian). Aborts on
    non-finite observables.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    if eig is None:
        eig = herm_eigendecompose(h)
    vectors = eig.vectors
    step_phase = np.exp(-1j * np.subtract.outer(eig.values, eig.values) * dt)
    rho = vectors.conj().T @ rho0.matrix @ vectors
    obs = [vectors.conj().T @ m @ vectors for m in observables(sp)]
    out = np.empty((n, 3))
    for k in range(n):
        for j, op in enumerate(obs):
            out[k, j] = np.sum(op.conj() * rho).real  # Tr{op^dag rho}
        if not (math.isfinite(out[k, 0]) and math.isfinite(out[k, 1]) and math.isfinite(out[k, 2])):
            raise FloatingPointError(f"non-finite observable at step {k} (t = {k * dt:.6g} s)")
        rho = rho * step_phase
    drift = abs(complex(np.trace(rho)) - complex(np.trace(rho0.matrix)))
    if drift > 1e-12:
        raise FloatingPointError(f"trace drift {drift:.3e} exceeds 1e-12 over {n} steps")
    full_meta = {"dt": dt, "n": n, "gammas": (sp.gamma1, sp.gamma2), "scale": rho0.scale}
    if meta:
        full_meta.update(meta)
    return TimeSeries(dt=dt, channels=out, meta=full_meta)


def mirrored_propagator(u: np.ndarray) -> np.ndarray:
    """Step propagator for the opposite enantiomer, given the propagator for
    one of them.

    Flipping the sign of j1bar conjugates the Hamiltonian entrywise, and
    exp(-i conj(H) dt) = exp(-i H dt)^T, so the mirror propagator is the
    exact transpose.
    """
    return u.T.copy()


def propagate_enantiomer_pair(p: ZFParams, sp: SpinPair, dt: float, n: int,
                              rho0: DensityMatrix | None = None,
                              kappa: float = DEFAULT_KAPPA) -> tuple[TimeSeries, TimeSeries]:
    """Propagate +|j1bar| and -|j1bar| runs with identical settings.

    Returns (plus, minus). The initial state defaults to the ideal inverted
    state. Negating j1bar conjugates the Hamiltonian, so the minus run reuses
    the plus run's eigenvalues with conjugated eigenvectors; sharing them
    keeps the two trajectories floating-point mirror images, not just
    mathematically mirrored ones.
    """
    if rho0 is None:
        rho0 = ideal_inverted_state(sp)
    p_plus = ZFParams(j0=p.j0, j1bar=abs(p.j1bar), dbar=p.dbar)
    h_plus = build_hamiltonian(p_plus, kappa)
    eig_plus = herm_eigendecompose(h_plus)
    eig_minus = EigenSystem(values=eig_plus.values, vectors=eig_plus.vectors.conj())
    h_minus = build_hamiltonian(ZFParams(p.j0, -abs(p.j1bar), p.dbar), kappa)
    ts_plus = propagate(rho0, h_plus, dt, n, sp, eig=eig_plus,
                        meta={"zfparams": (p_plus.j0, p_plus.j1bar, p_plus.dbar), "kappa": kappa})
    ts_minus = propagate(rho0, h_minus, dt, n, sp, eig=eig_minus,
                         meta={"zfparams": (p.j0, -abs(p.j1bar), p.dbar), "kappa": kappa})
    return ts_plus, ts_minus


class TransitionFrequency(NamedTuple):
    freq_hz: float
    label: str


def transition_frequencies(h: np.ndarray) -> list[TransitionFrequency]:
    """All six pairwise level spacings in Hz, ascending, with labels.

    Each eigenstate is named after the singlet/triplet basis vector it
    overlaps most; a transition label is e.g. ``"S<->+1"``.
    """
    values, vectors = herm_eigendecompose(h)
    basis = singlet_triplet_states()
    names = []
    for k in range(4):
        overlaps = {name: abs(np.vdot(vec, vectors[:, k])) for name, vec in basis.items()}
        names.append(max(overlaps, key=overlaps.get))
    out = []
    for a in range(4):
        for b in range(a + 1, 4):
            freq = abs(values[b] - values[a]) / (2 * math.pi)
            out.append(TransitionFrequency(freq_hz=float(freq), label=f"{names[a]}<->{names[b]}"))
    out.sort(key=lambda tf: tf.freq_hz)
    return out
