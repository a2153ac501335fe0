"""Acceptance suite: each test pins one exit criterion at its stated tolerance
and prints a PASS line (run with -s to see them inline).

The reference configuration is j0 = 100 Hz, |j1bar| = 1 Hz, dbar = 0.7 Hz,
gammas (10.705, 42.576) MHz/T, dt = 2 ms, n = 16384.
"""

import math
import time

import numpy as np
import pytest
import scipy.linalg

from chiralzf import analytic, cli, coupling, dynamics, qmatrix, spectra, spinops
from chiralzf.coupling import OrientationConditions, ZFParams
from chiralzf.dynamics import SpinPair

WINDOWS = [(0.0, 3.1), (97.7, 101.7)]


def report(number: int, message: str) -> None:
    print(f"CRITERION {number} PASS: {message}")


@pytest.fixture(scope="module")
def sp():
    return SpinPair(gamma1=10.705, gamma2=42.576, label1="13C", label2="1H")


@pytest.fixture(scope="module")
def params():
    return ZFParams(j0=100.0, j1bar=1.0, dbar=0.7)


@pytest.fixture(scope="module")
def pair_full(sp, params):
    return dynamics.propagate_enantiomer_pair(params, sp, 0.002, 16384)


def fitted_ratio(ts, t2eff=2.0):
    px, py = [], []
    for channel in ("x", "y"):
        spec = spectra.apodized_spectrum(ts, channel, t2eff)
        for window in WINDOWS:
            (px if channel == "x" else py).append(spectra.fit_lorentzian(spec, window))
    return spectra.channel_ratio(px, py)


def test_criterion_1_headline_ratio_with_kappa_sweep(tmp_path, sp, params):
    # sweep the antisymmetric-term normalization: kappa = 1 (the simulation
    # Hamiltonian as written) must reproduce |Ax/Ay| = 0.0106 within 10%;
    # kappa = 1/2 (the value implied by the first-order mixing j1bar/(2 j0))
    # gives half the ratio and is rejected. kappa = 1 is the frozen default.
    t0 = time.perf_counter()
    results = {}
    for kappa in (1.0, 0.5):
        cfg = cli.parse_config(f"[run]\nkappa = {kappa}\n[output]\ndir = "
                               f"{tmp_path / str(kappa)}\n")
        run_report, _ = cli.run_scenario(cfg)
        results[kappa] = run_report.ratio.magnitude
    elapsed = time.perf_counter() - t0

    target = 0.0106
    assert abs(results[1.0] - target) <= 0.10 * target, results
    assert abs(results[0.5] - target) > 0.10 * target, results
    assert dynamics.DEFAULT_KAPPA == 1.0
    assert elapsed < 30.0, f"pipeline took {elapsed:.1f} s"
    report(1, f"|Ax/Ay| = {results[1.0]:.5f} at kappa=1 (0.0106 +- 10%); "
              f"kappa=1/2 gives {results[0.5]:.5f} and is rejected; "
              f"runtime {elapsed:.1f} s < 30 s")


def test_criterion_2_analytic_numeric_consistency(pair_full, sp):
    ts_plus, _ = pair_full
    fitted = fitted_ratio(ts_plus).magnitude
    closed = analytic.amplitude_ratio(sp, 0.01).magnitude
    gap = abs(fitted - closed) / closed
    assert gap < 0.03, (fitted, closed)
    report(2, f"fitted {fitted:.5f} vs closed-form {closed:.5f} "
              f"({100 * gap:.2f}% < 3%)")


def test_criterion_3_exact_enantiomer_antisymmetry(sp, pair_full):
    ts_p, ts_m = pair_full
    worst_small = float(np.abs(ts_p.mx + ts_m.mx).max())
    assert worst_small < 1e-12
    ts_p10, ts_m10 = dynamics.propagate_enantiomer_pair(
        ZFParams(100.0, 10.0, 0.7), sp, 0.002, 16384)
    worst_large = float(np.abs(ts_p10.mx + ts_m10.mx).max())
    assert worst_large < 1e-12
    report(3, f"max |Mx(+) + Mx(-)| = {worst_small:.2e} (r=0.01) and "
              f"{worst_large:.2e} (r=0.1), both < 1e-12 over 32.77 s")


def test_criterion_4_racemic_and_achiral_nulls(sp, params, pair_full):
    ts_p, ts_m = pair_full
    my_scale = float(np.abs(ts_p.my).max())
    racemic = float(np.abs((ts_p.mx + ts_m.mx) / 2).max())
    h0 = dynamics.build_hamiltonian(ZFParams(100.0, 0.0, 0.7))
    ts0 = dynamics.propagate(dynamics.ideal_inverted_state(sp), h0, 0.002, 16384, sp)
    achiral = float(np.abs(ts0.mx).max())
    assert racemic < 1e-10 * my_scale
    assert achiral < 1e-10 * my_scale
    report(4, f"racemic x {racemic:.2e}, achiral x {achiral:.2e}, "
              f"both < 1e-10 * max|My| = {1e-10 * my_scale:.2e}")


def test_criterion_5_frequency_structure(params, pair_full):
    h = dynamics.build_hamiltonian(params)
    # independent oracle: direct diagonalization
    exact = np.sort(np.linalg.eigvalsh(h)) / (2 * math.pi)
    oracle_high = exact[1] - exact[0]
    oracle_low = exact[3] - exact[1]
    freqs = sorted({round(tf.freq_hz, 9) for tf in dynamics.transition_frequencies(h)})
    got_low = min(freqs, key=lambda f: abs(f - 1.05))
    got_high = min(freqs, key=lambda f: abs(f - 99.65))
    assert abs(got_high - oracle_high) < 1e-9 and abs(got_low - oracle_low) < 1e-9
    assert abs(got_high - 99.65) < 0.02
    assert abs(got_low - 1.05) < 0.02

    ts_plus, _ = pair_full
    bin_width = 1 / (16384 * 0.002)
    spec = spectra.apodized_spectrum(ts_plus, "y", 2.0)
    for window, oracle in (((0.0, 3.1), oracle_low), ((97.7, 101.7), oracle_high)):
        pk = spectra.fit_lorentzian(spec, window)
        assert abs(pk.f0 - oracle) < bin_width, (pk.f0, oracle)
    report(5, f"gaps {got_high:.4f} / {got_low:.4f} Hz (oracle +-0.02 of "
              f"99.65 / 1.05); fitted centers within one bin ({bin_width:.4f} Hz)")


def test_criterion_6_orientation_numbers():
    c = OrientationConditions(mu_debye=2.5, e_applied=5e5, eps_r=30.0,
                              temperature=298.0, bond_length=1.092e-10,
                              gamma1=10.705, gamma2=42.576)
    d = abs(coupling.residual_dipolar(c, 0.01))
    assert abs(d - 0.7) / 0.7 < 0.03
    e = coupling.required_field(0.01, 2.5, 30.0, 298.0)
    c2 = OrientationConditions(mu_debye=2.5, e_applied=e, eps_r=30.0,
                               temperature=298.0, bond_length=1.092e-10,
                               gamma1=10.705, gamma2=42.576)
    assert abs(coupling.order_parameter(c2) - 0.01) < 1e-12 * 0.01
    text = cli.orient_report(cli.parse_config(""))
    assert "s_from_formula_at_nominal_field" in text
    assert "field_from_formula_for_nominal_s" in text
    assert "mismatch_factor" in text
    report(6, f"|dbar| = {d:.4f} Hz (0.7 +- 3%); order parameter/field exact "
              f"inverses; nominal-point mismatch emitted in orient report")


def test_criterion_7_oracle_equivalences(sp, params):
    # (a) Clebsch-Gordan against the symbolic oracle
    from sympy import Rational
    from sympy.physics.quantum.cg import CG
    worst_cg = 0.0
    for j1 in (Rational(1, 2), 1, Rational(3, 2)):
        for j2 in (Rational(1, 2), 1):
            j = abs(j1 - j2)
            while j <= j1 + j2:
                m1 = -j1
                while m1 <= j1:
                    m2 = -j2
                    while m2 <= j2:
                        m = m1 + m2
                        if abs(m) <= j:
                            mine = spinops.clebsch_gordan(
                                float(j1), float(m1), float(j2), float(m2),
                                float(j), float(m))
                            ref = float(CG(j1, m1, j2, m2, j, m).doit())
                            worst_cg = max(worst_cg, abs(mine - ref))
                        m2 += 1
                    m1 += 1
                j += 1
    assert worst_cg < 1e-12

    # (b) tensor operators against the brute-force contraction
    worst_t = 0.0
    for q in (0, 1, 2):
        for k in range(-q, q + 1):
            expected = np.zeros((4, 4), dtype=complex)
            for k1 in (-1, 0, 1):
                k2 = k - k1
                if abs(k2) > 1:
                    continue
                c = float(CG(1, k1, 1, k2, q, k).doit())
                expected += (c * spinops.spherical_single(1, k1)
                             @ spinops.spherical_single(2, k2))
            got = spinops.bilinear_tensor_op(q, k).matrix
            worst_t = max(worst_t, float(np.abs(got - expected).max()))
    assert worst_t < 1e-12

    # (c) stepwise propagation against the dense matrix exponential
    h = dynamics.build_hamiltonian(params)
    rho0 = dynamics.ideal_inverted_state(sp)
    ts = dynamics.propagate(rho0, h, 0.002, 600, sp)
    mx, my, mz = dynamics.observables(sp)
    worst_prop = 0.0
    for k in (0, 50, 300, 599):
        u = scipy.linalg.expm(-1j * h * (k * 0.002))
        rho_k = u @ rho0.matrix @ u.conj().T
        direct = [qmatrix.trace_expectation(op, rho_k).real for op in (mx, my, mz)]
        worst_prop = max(worst_prop, float(np.abs(ts.channels[k] - direct).max()))
    assert worst_prop < 1e-10

    # (d) coherence table against literal inner products
    sys_fo = analytic.perturbed_states(100.0, 1.0, dbar=0.7)
    table = analytic.coherence_table(sp, sys_fo)
    ops = spinops.spin_operator_set()
    g1, g2 = sp.scaled_gammas
    rho_op = -g1 * ops.i1y + g2 * ops.i2y
    worst_tab = 0.0
    for m in ("plus", "minus"):
        for s in ("alpha", "beta"):
            bra, ket = sys_fo.states[m], sys_fo.states[s]
            for op, store in ((mx, table.v_x), (my, table.v_y), (rho_op, table.rho)):
                ref = complex(np.vdot(bra, op @ ket))
                worst_tab = max(worst_tab, abs(store[(m, s)] - ref))
    assert worst_tab < 1e-12
    report(7, f"oracle gaps: CG {worst_cg:.1e}, tensors {worst_t:.1e}, "
              f"propagation {worst_prop:.1e}, coherence table {worst_tab:.1e}")


def test_criterion_8_conservation_suite(sp, params):
    h = dynamics.build_hamiltonian(params)
    u = qmatrix.unitary_propagator(h, 0.002)
    unitarity = float(np.abs(u.conj().T @ u - np.eye(4)).max())
    assert unitarity < 1e-12
    rho0 = dynamics.ideal_inverted_state(sp).matrix
    rho = rho0.copy()
    for _ in range(10000):
        rho = u @ rho @ u.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    trace_drift = abs(float(np.trace(rho).real) - 1.0)
    eig_drift = float(np.abs(np.sort(np.linalg.eigvalsh(rho))
                             - np.sort(np.linalg.eigvalsh(rho0))).max())
    assert trace_drift < 1e-12
    assert eig_drift < 1e-10
    report(8, f"over 1e4 steps: trace drift {trace_drift:.2e} < 1e-12, "
              f"eigenvalue drift {eig_drift:.2e} < 1e-10, "
              f"U unitarity {unitarity:.2e} < 1e-12")


def test_criterion_9_fit_fidelity(pair_full):
    freq = np.linspace(40, 60, 801)
    truth = spectra.LorentzianPeak(f0=50.3, fwhm=0.8, amp=2.2, phase=1.9)
    spec = spectra.Spectrum(freq=freq, amp=truth.evaluate(freq), channel="x")
    pk = spectra.fit_lorentzian(spec, (40.0, 60.0))
    worst = max(abs(pk.f0 - truth.f0) / truth.f0,
                abs(pk.fwhm - truth.fwhm) / truth.fwhm,
                abs(pk.amp - truth.amp) / truth.amp,
                abs(math.remainder(pk.phase - truth.phase, 2 * math.pi)))
    assert worst < 1e-6

    ts_plus, _ = pair_full
    ratios = [fitted_ratio(ts_plus, t2eff).magnitude for t2eff in (1.0, 2.0, 4.0)]
    spread = max(ratios) / min(ratios) - 1
    assert spread < 0.005
    report(9, f"synthetic recovery {worst:.1e} < 1e-6; ratio spread over "
              f"t2eff in (1,2,4) s is {100 * spread:.3f}% < 0.5%")
