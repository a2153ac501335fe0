"""Invariant battery behind the ``selftest`` subcommand.

Each check exercises one structural property the package relies on; they are
condensed versions of the pytest suite, runnable without pytest. A check
passes silently and prints one line either way.
"""

from __future__ import annotations

import math

import numpy as np

from . import analytic, coupling, dynamics, qmatrix, spectra, spinops
from .coupling import CartesianJ, OrientationConditions, ZFParams
from .dynamics import SpinPair


def _checks(fast: bool):
    rng = np.random.default_rng(20240317)
    ops = spinops.spin_operator_set()
    sp = SpinPair(gamma1=10.705, gamma2=42.576, label1="13C", label2="1H")

    def random_hermitian(n=4):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return (a + a.conj().T) / 2

    def check_commutators():
        for ix, iy, iz in ((ops.i1x, ops.i1y, ops.i1z), (ops.i2x, ops.i2y, ops.i2z)):
            assert np.abs(ix @ iy - iy @ ix - 1j * iz).max() < 1e-14
        assert np.abs(ops.i1x @ ops.i2y - ops.i2y @ ops.i1x).max() < 1e-14

    def check_eigendecompose():
        m = random_hermitian()
        es = qmatrix.herm_eigendecompose(m)
        recon = (es.vectors * es.values) @ es.vectors.conj().T
        assert np.abs(recon - m).max() < 1e-12
        assert np.abs(es.vectors.conj().T @ es.vectors - np.eye(4)).max() < 1e-12

    def check_propagator_group():
        h = dynamics.build_hamiltonian(ZFParams(100.0, 0.0, 0.0))
        u1 = qmatrix.unitary_propagator(h, 0.0025)
        u4 = qmatrix.unitary_propagator(h, 0.01)
        assert np.abs(np.linalg.matrix_power(u1, 4) - u4).max() < 1e-11
        assert np.abs(u1.conj().T @ u1 - np.eye(4)).max() < 1e-12

    def check_clebsch_gordan():
        assert abs(spinops.clebsch_gordan(1, 1, 1, 1, 2, 2) - 1.0) < 1e-14
        assert abs(spinops.clebsch_gordan(1, 0, 1, 0, 0, 0) + 1 / math.sqrt(3)) < 1e-14
        assert abs(spinops.clebsch_gordan(1, 1, 1, -1, 1, 0) - 1 / math.sqrt(2)) < 1e-14

    def check_tensor_ops():
        t00 = spinops.bilinear_tensor_op(0, 0).matrix
        assert np.abs(t00 + ops.i_dot_i / math.sqrt(3)).max() < 1e-14
        t10 = spinops.bilinear_tensor_op(1, 0).matrix
        ref = -(ops.i1p @ ops.i2m - ops.i1m @ ops.i2p) / (2 * math.sqrt(2))
        assert np.abs(t10 - ref).max() < 1e-14
        for q in (0, 1, 2):
            for k in range(-q, q + 1):
                t = spinops.bilinear_tensor_op(q, k)
                grading = ops.fz @ t.matrix - t.matrix @ ops.fz
                assert np.abs(grading - k * t.matrix).max() < 1e-14

    def check_decompose_roundtrip():
        for _ in range(50):
            j = CartesianJ(matrix=rng.normal(scale=50, size=(3, 3)))
            parts = coupling.decompose(j)
            back = coupling.recompose(parts)
            assert np.abs(back.matrix - j.matrix).max() < 1e-12
            refl = coupling.reflect_enantiomer(j)
            assert np.abs(coupling.reflect_enantiomer(refl).matrix - j.matrix).max() < 1e-14
            assert abs(coupling.rank1_zero_component(coupling.decompose(refl))
                       + coupling.rank1_zero_component(parts)) < 1e-12

    def check_wigner():
        assert abs(coupling.wigner_small_d(1, 0, 0, math.pi / 3) - 0.5) < 1e-14
        for q in (1, 2):
            for beta in (0.1, 0.7, 2.0):
                d_pos = np.array([[coupling.wigner_small_d(q, a, b, beta)
                                   for b in range(-q, q + 1)] for a in range(-q, q + 1)])
                d_neg = np.array([[coupling.wigner_small_d(q, a, b, -beta)
                                   for b in range(-q, q + 1)] for a in range(-q, q + 1)])
                assert np.abs(d_pos @ d_neg - np.eye(2 * q + 1)).max() < 1e-12

    def check_orientation_numbers():
        c = OrientationConditions(mu_debye=2.5, e_applied=5e5, eps_r=30.0,
                                  temperature=298.0, bond_length=1.092e-10,
                                  gamma1=10.705, gamma2=42.576)
        s = coupling.order_parameter(c)
        assert 3.0e-3 < s < 4.5e-3
        e = coupling.required_field(0.01, 2.5, 30.0, 298.0)
        c2 = OrientationConditions(mu_debye=2.5, e_applied=e, eps_r=30.0,
                                   temperature=298.0, bond_length=1.092e-10,
                                   gamma1=10.705, gamma2=42.576)
        assert abs(coupling.order_parameter(c2) - 0.01) < 1e-14
        assert abs(abs(coupling.residual_dipolar(c, 0.01)) - 0.7) < 0.02

    def check_enantiomer_symmetry():
        n = 2048 if fast else 16384
        ts_p, ts_m = dynamics.propagate_enantiomer_pair(
            ZFParams(100.0, 1.0, 0.7), sp, 0.002, n)
        assert np.abs(ts_p.mx + ts_m.mx).max() < 1e-12
        assert np.abs(ts_p.my - ts_m.my).max() < 1e-12

    def check_achiral_null():
        n = 2048 if fast else 16384
        h = dynamics.build_hamiltonian(ZFParams(100.0, 0.0, 0.7))
        ts = dynamics.propagate(dynamics.ideal_inverted_state(sp), h, 0.002, n, sp)
        assert np.abs(ts.mx).max() < 1e-12

    def check_conservation():
        h = dynamics.build_hamiltonian(ZFParams(100.0, 1.0, 0.7))
        u = qmatrix.unitary_propagator(h, 0.002)
        rho0 = dynamics.ideal_inverted_state(sp).matrix
        rho = rho0.copy()
        steps = 2000 if fast else 10000
        for _ in range(steps):
            rho = u @ rho @ u.conj().T
        assert abs(np.trace(rho).real - 1.0) < 1e-12
        drift = np.abs(np.sort(np.linalg.eigvalsh(rho)) - np.sort(np.linalg.eigvalsh(rho0)))
        assert drift.max() < 1e-10

    def check_fit_recovery():
        freq = np.linspace(20, 30, 401)
        truth = spectra.LorentzianPeak(f0=25.02, fwhm=0.35, amp=0.5,
                                       phase=math.atan2(-0.4, 0.3))
        spec = spectra.Spectrum(freq=freq, amp=truth.evaluate(freq), channel="x")
        pk = spectra.fit_lorentzian(spec, (20.0, 30.0))
        assert abs(pk.f0 - truth.f0) < 1e-6 * 25
        assert abs(pk.fwhm - truth.fwhm) < 1e-6
        assert abs(pk.amp - truth.amp) < 1e-6
        assert abs(math.remainder(pk.phase - truth.phase, 2 * math.pi)) < 1e-6

    def check_analytic_ratio():
        ratio = analytic.amplitude_ratio(sp, 0.01)
        expected = 4 * 10.705 * 42.576 * 0.01 / ((42.576 ** 2 - 10.705 ** 2) * 1.0001)
        assert abs(ratio.magnitude - expected) < 1e-12

    def check_end_to_end_ratio():
        n = 8192
        ts_p, _ = dynamics.propagate_enantiomer_pair(ZFParams(100.0, 1.0, 0.7), sp, 0.002, n)
        px, py = [], []
        for channel in ("x", "y"):
            spec = spectra.apodized_spectrum(ts_p, channel, 2.0)
            for lo, hi in ((97.7, 101.7), (0.0, 3.1)):
                (px if channel == "x" else py).append(spectra.fit_lorentzian(spec, (lo, hi)))
        ratio = spectra.channel_ratio(px, py)
        assert abs(ratio.magnitude - 0.0106) < 0.0106 * 0.10

    return [
        ("spin operator commutation", check_commutators),
        ("hermitian eigendecomposition", check_eigendecompose),
        ("propagator group property", check_propagator_group),
        ("clebsch-gordan reference values", check_clebsch_gordan),
        ("bilinear tensor operators", check_tensor_ops),
        ("tensor decompose/reflect roundtrip", check_decompose_roundtrip),
        ("wigner small-d", check_wigner),
        ("orientation numbers", check_orientation_numbers),
        ("enantiomer exact antisymmetry", check_enantiomer_symmetry),
        ("achiral x null", check_achiral_null),
        ("trace/eigenvalue conservation", check_conservation),
        ("lorentzian fit recovery", check_fit_recovery),
        ("closed-form amplitude ratio", check_analytic_ratio),
        ("end-to-end amplitude ratio", check_end_to_end_ratio),
    ]


def run_selftest(fast: bool = True) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, fn in _checks(fast):
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    return failures
