"""chiralzf: zero-field NMR simulation of enantiomer discrimination through
the antisymmetric spin-spin coupling.

A chiral molecule oriented by an electric field retains the z-axial component
of its antisymmetric coupling tensor, whose sign flips between enantiomers.
This package simulates the resulting two-spin zero-field experiment: the
mirror-image x-magnetization signals, the achiral y-channel reference, their
spectra, and the closed-form perturbative predictions.

Modules: qmatrix (small dense complex linear algebra), spinops (operators,
Clebsch-Gordan, tensor operators), coupling (tensor decomposition and
orientational averaging), dynamics (Hamiltonian and propagation), analytic
(first-order model), spectra (transform and Lorentzian fitting), cli
(config-driven scenarios and file emission).
"""

from .coupling import CartesianJ, IrreducibleJ, OrientationConditions, ZFParams
from .dynamics import DensityMatrix, SpinPair, TimeSeries
from .spectra import LorentzianPeak, Spectrum

__version__ = "0.1.0"

__all__ = [
    "CartesianJ",
    "IrreducibleJ",
    "OrientationConditions",
    "ZFParams",
    "DensityMatrix",
    "SpinPair",
    "TimeSeries",
    "LorentzianPeak",
    "Spectrum",
    "__version__",
]
