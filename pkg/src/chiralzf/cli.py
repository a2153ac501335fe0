"""Configuration, scenario orchestration, and file emission.

Config files are INI-style (sections of ``key = value`` lines, ``#``
comments). Every key has a default, so an empty file runs the reference
parameter set (j0 = 100 Hz, j1bar = 1 Hz, dbar = 0.7 Hz, dt = 2 ms,
n = 16384, pi / 3.977 pi pulse). Angle values accept a ``pi`` suffix
("3.977pi"). Unknown sections or keys are rejected.

Subcommands: ``simulate`` (run the configured scenario), ``analytic``
(closed-form predictions), ``fit`` (refit an emitted series CSV),
``compare`` (enantiomer-pair comparison), ``orient`` (order-parameter /
field calculator), ``selftest`` (invariant battery). Exit codes: 0 success,
1 validation error, 2 runtime or numerical error, 3 selftest failure.

All emitted artifacts are plain text, written atomically (temp file then
rename) with shortest-round-trip float formatting, so identical configs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, coupling, dynamics, spectra
from .constants import GAMMA_13C, GAMMA_1H
from .coupling import CartesianJ, OrientationConditions, ZFParams
from .dynamics import DensityMatrix, SpinPair, TimeSeries
from .spectra import FitError, LorentzianPeak, Spectrum

SCENARIOS = (
    "enantiomer-pair", "enantiomer-R", "enantiomer-L",
    "racemic", "field-reversal", "achiral-control",
)

# Nominal electric-field design point quoted for this experiment: an order
# parameter of 0.01 at 5 kV/cm (mu = 2.5 D, eps_r = 30, 298 K). Direct
# evaluation of s = mu E_loc / (3 k T) disagrees with it by roughly 2.8x;
# the orient report emits both numbers rather than deciding.
NOMINAL_ORDER_PARAMETER = 0.01
NOMINAL_APPLIED_FIELD = 5e5  # V/m

_AXES = ("x", "y", "z")
_CARTESIAN_KEYS = tuple(f"j{a}{b}_hz" for a in _AXES for b in _AXES)

_SCHEMA = {
    "spin_system": ("gamma1_mhz_per_t", "gamma2_mhz_per_t", "label1", "label2"),
    "coupling": ("j0_hz", "j1bar_hz", "dbar_hz", "dbar_sign") + _CARTESIAN_KEYS,
    "orientation": ("mu_debye", "e_applied_v_per_m", "eps_r", "temperature_k", "bond_length_m"),
    "acquisition": ("dt_s", "n", "t2eff_s"),
    "pulse": ("axis", "theta1", "theta2", "ideal"),
    "run": ("scenario", "kappa", "seed"),
    "output": ("dir",),
}


class ConfigError(ValueError):
    """Invalid configuration text or field value."""


@dataclass
class ExperimentConfig:
    """Fully resolved run configuration; see module docstring for defaults."""

    spin_pair: SpinPair
    coupling_route: str  # "direct" or "cartesian"
    zfparams: ZFParams | None
    cartesian: CartesianJ | None
    dbar_sign: int
    orientation: OrientationConditions
    dt: float
    n: int
    t2eff: float
    pulse_axis: str
    theta1: float
    theta2: float
    ideal_pulse: bool
    scenario: str
    kappa: float
    seed: int  # reserved; no stochastic component uses it yet
    output_dir: Path


@dataclass
class RunReport:
    """Everything a scenario run produced, ready for emission."""

    scenario: str
    params: dict
    transition_frequencies: list
    peaks: dict = field(default_factory=dict)  # peaks[channel][run] -> [LorentzianPeak]
    ratio: spectra.ChannelRatio | None = None
    comparison: dict | None = None
    extras: dict = field(default_factory=dict)
    duration_s: float = 0.0


def _angle(text: str, where: str) -> float:
    t = text.strip().lower()
    try:
        if t.endswith("pi"):
            head = t[:-2].strip()
            return (float(head) if head else 1.0) * math.pi
        return float(t)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse angle {text!r}") from None


def _float(parser, section, key, default, where) -> float:
    raw = parser.get(section, key, fallback=None)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse number {raw!r}") from None


def _bool(parser, section, key, default, where) -> bool:
    raw = parser.get(section, key, fallback=None)
    if raw is None:
        return default
    if raw.strip().lower() in ("1", "true", "yes", "on"):
        return True
    if raw.strip().lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: cannot parse boolean {raw!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text, applying defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")

    sp = SpinPair(
        gamma1=_float(parser, "spin_system", "gamma1_mhz_per_t", GAMMA_13C, "spin_system.gamma1_mhz_per_t"),
        gamma2=_float(parser, "spin_system", "gamma2_mhz_per_t", GAMMA_1H, "spin_system.gamma2_mhz_per_t"),
        label1=parser.get("spin_system", "label1", fallback="13C"),
        label2=parser.get("spin_system", "label2", fallback="1H"),
    )

    # default orientation produces s = 0.01 under this package's formula
    default_field = coupling.required_field(NOMINAL_ORDER_PARAMETER, 2.5, 30.0, 298.0)
    try:
        orientation = OrientationConditions(
            mu_debye=_float(parser, "orientation", "mu_debye", 2.5, "orientation.mu_debye"),
            e_applied=_float(parser, "orientation", "e_applied_v_per_m", default_field,
                             "orientation.e_applied_v_per_m"),
            eps_r=_float(parser, "orientation", "eps_r", 30.0, "orientation.eps_r"),
            temperature=_float(parser, "orientation", "temperature_k", 298.0,
                               "orientation.temperature_k"),
            bond_length=_float(parser, "orientation", "bond_length_m", 1.092e-10,
                               "orientation.bond_length_m"),
            gamma1=sp.gamma1, gamma2=sp.gamma2,
        )
    except ValueError as exc:
        raise ConfigError(f"orientation: {exc}") from None

    has_cartesian = parser.has_section("coupling") and any(
        k in parser["coupling"] for k in _CARTESIAN_KEYS)
    has_direct = parser.has_section("coupling") and any(
        k in parser["coupling"] for k in ("j0_hz", "j1bar_hz", "dbar_hz"))
    if has_cartesian and has_direct:
        raise ConfigError(
            "coupling: give either the Cartesian tensor (jxy_hz, ...) or the "
            "effective couplings (j0_hz, j1bar_hz, dbar_hz), not both")

    dbar_sign_f = _float(parser, "coupling", "dbar_sign", 1.0, "coupling.dbar_sign")
    if dbar_sign_f not in (1.0, -1.0):
        raise ConfigError("coupling.dbar_sign must be +1 or -1")
    dbar_sign = int(dbar_sign_f)

    if has_cartesian:
        m = np.zeros((3, 3))
        for i, a in enumerate(_AXES):
            for j, b in enumerate(_AXES):
                m[i, j] = _float(parser, "coupling", f"j{a}{b}_hz", 0.0,
                                 f"coupling.j{a}{b}_hz")
        cart: CartesianJ | None = CartesianJ(matrix=m)
        zf: ZFParams | None = None
        route = "cartesian"
    else:
        cart = None
        zf = ZFParams(
            j0=_float(parser, "coupling", "j0_hz", 100.0, "coupling.j0_hz"),
            j1bar=_float(parser, "coupling", "j1bar_hz", 1.0, "coupling.j1bar_hz"),
            dbar=_float(parser, "coupling", "dbar_hz", 0.7, "coupling.dbar_hz"),
        )
        route = "direct"

    dt = _float(parser, "acquisition", "dt_s", 0.002, "acquisition.dt_s")
    if dt <= 0:
        raise ConfigError("acquisition.dt_s must be positive")
    n_f = _float(parser, "acquisition", "n", 16384, "acquisition.n")
    n = int(n_f)
    if n != n_f or n < 2:
        raise ConfigError("acquisition.n must be an integer >= 2")
    t2eff = _float(parser, "acquisition", "t2eff_s", 2.0, "acquisition.t2eff_s")
    if t2eff <= 0:
        raise ConfigError("acquisition.t2eff_s must be positive")

    axis = parser.get("pulse", "axis", fallback="x")
    if axis not in _AXES:
        raise ConfigError(f"pulse.axis must be one of {_AXES}, got {axis!r}")
    theta1 = _angle(parser.get("pulse", "theta1", fallback="pi"), "pulse.theta1")
    theta2 = _angle(parser.get("pulse", "theta2", fallback="3.977pi"), "pulse.theta2")
    ideal = _bool(parser, "pulse", "ideal", False, "pulse.ideal")

    scenario = parser.get("run", "scenario", fallback="enantiomer-pair")
    if scenario not in SCENARIOS:
        raise ConfigError(f"run.scenario must be one of {SCENARIOS}, got {scenario!r}")
    kappa = _float(parser, "run", "kappa", dynamics.DEFAULT_KAPPA, "run.kappa")
    seed_f = _float(parser, "run", "seed", 0, "run.seed")
    if seed_f != int(seed_f):
        raise ConfigError("run.seed must be an integer")

    return ExperimentConfig(
        spin_pair=sp, coupling_route=route, zfparams=zf, cartesian=cart,
        dbar_sign=dbar_sign, orientation=orientation, dt=dt, n=n, t2eff=t2eff,
        pulse_axis=axis, theta1=theta1, theta2=theta2, ideal_pulse=ideal,
        scenario=scenario, kappa=kappa, seed=int(seed_f),
        output_dir=Path(parser.get("output", "dir", fallback="out")),
    )


def resolve_zfparams(cfg: ExperimentConfig) -> ZFParams:
    """Effective couplings, deriving them from the Cartesian tensor if needed."""
    if cfg.coupling_route == "direct":
        assert cfg.zfparams is not None
        return cfg.zfparams
    assert cfg.cartesian is not None
    parts = coupling.decompose(cfg.cartesian)
    s = coupling.order_parameter(cfg.orientation)
    j1bar = coupling.average_rank1(coupling.rank1_zero_component(parts), s)
    dbar = cfg.dbar_sign * abs(coupling.residual_dipolar(cfg.orientation, s))
    return ZFParams(j0=parts.j0, j1bar=j1bar, dbar=dbar)


def initial_state(cfg: ExperimentConfig) -> DensityMatrix:
    if cfg.ideal_pulse:
        return dynamics.ideal_inverted_state(cfg.spin_pair)
    rho = dynamics.thermal_state(cfg.spin_pair, bp=1.0, temperature=300.0, axis="y", scale="unit")
    return dynamics.apply_pulse(rho, cfg.pulse_axis, cfg.theta1, cfg.theta2)


def fit_windows(p: ZFParams, kappa: float, half_width: float = 2.0) -> list[tuple[float, float]]:
    """Windows around the observable coherence frequencies.

    The transverse operators connect |+-1> with the singlet-like and
    central-triplet-like eigenstates, so those four transitions (two distinct
    frequencies) are where the lines sit.
    """
    h = dynamics.build_hamiltonian(p, kappa)
    centers = set()
    for tf in dynamics.transition_frequencies(h):
        a, b = tf.label.split("<->")
        if {a, b} & {"S", "0"} and {a, b} & {"+1", "-1"}:
            centers.add(round(tf.freq_hz, 6))
    return [(max(c - half_width, 0.0), c + half_width) for c in sorted(centers)]


def _fit_channels(ts: TimeSeries, t2eff: float, windows: list[tuple[float, float]]):
    """Fit both transverse channels in every window; returns peaks + spectra."""
    peaks: dict[str, list[LorentzianPeak]] = {}
    specs: dict[str, Spectrum] = {}
    for channel in ("x", "y"):
        spec = spectra.apodized_spectrum(ts, channel, t2eff)
        specs[channel] = spec
        peaks[channel] = [spectra.fit_lorentzian(spec, w) for w in windows]
    return peaks, specs


def run_scenario(cfg: ExperimentConfig):
    """Execute the configured scenario and write its artifacts.

    Returns (RunReport, files). The enantiomer-R run uses +|j1bar| and the
    L run uses -|j1bar|; field reversal flips j1bar only, since the dipolar
    term is even in the orienting field.
    """
    t_start = time.perf_counter()
    sp = cfg.spin_pair
    p = resolve_zfparams(cfg)
    rho0 = initial_state(cfg)
    windows = fit_windows(p, cfg.kappa)
    h_plus = dynamics.build_hamiltonian(ZFParams(p.j0, abs(p.j1bar), p.dbar), cfg.kappa)

    report = RunReport(
        scenario=cfg.scenario,
        params={
            "scenario": cfg.scenario, "kappa": cfg.kappa,
            "j0_hz": p.j0, "j1bar_hz": p.j1bar, "dbar_hz": p.dbar,
            "dt_s": cfg.dt, "n": cfg.n, "t2eff_s": cfg.t2eff,
            "gamma1_mhz_per_t": sp.gamma1, "gamma2_mhz_per_t": sp.gamma2,
            "labels": f"{sp.label1},{sp.label2}",
            "pulse": "ideal" if cfg.ideal_pulse else
                     f"{cfg.pulse_axis},{cfg.theta1!r},{cfg.theta2!r}",
            "coupling_route": cfg.coupling_route,
        },
        transition_frequencies=dynamics.transition_frequencies(h_plus),
    )

    series: dict[str, TimeSeries] = {}
    spec_out: dict[str, Spectrum] = {}
    pulse_meta = ("ideal" if cfg.ideal_pulse
                  else (cfg.pulse_axis, cfg.theta1, cfg.theta2))

    needs_pair = cfg.scenario in ("enantiomer-pair", "racemic", "field-reversal")
    if needs_pair:
        ts_plus, ts_minus = dynamics.propagate_enantiomer_pair(
            p, sp, cfg.dt, cfg.n, rho0=rho0, kappa=cfg.kappa)
        ts_plus.meta["pulse"] = ts_minus.meta["pulse"] = pulse_meta
        series["plus"], series["minus"] = ts_plus, ts_minus
        for run_name, ts in (("plus", ts_plus), ("minus", ts_minus)):
            peaks, specs = _fit_channels(ts, cfg.t2eff, windows)
            for channel in ("x", "y"):
                report.peaks.setdefault(channel, {})[run_name] = peaks[channel]
                spec_out[f"{channel}_{run_name}"] = specs[channel]
        report.ratio = spectra.channel_ratio(report.peaks["x"]["plus"],
                                             report.peaks["y"]["plus"])
        report.comparison = spectra.compare_enantiomers(
            ts_plus, ts_minus, t2eff=cfg.t2eff, windows=windows)

        if cfg.scenario == "racemic":
            avg = TimeSeries(dt=cfg.dt,
                             channels=(ts_plus.channels + ts_minus.channels) / 2,
                             meta=dict(ts_plus.meta))
            series["racemic"] = avg
            report.extras["racemic_max_abs_x"] = float(np.abs(avg.mx).max())
            report.extras["racemic_max_abs_y"] = float(np.abs(avg.my).max())
        if cfg.scenario == "field-reversal":
            for channel in ("x", "y"):
                sub = spectra.field_reversal_subtract(
                    spec_out[f"{channel}_plus"], spec_out[f"{channel}_minus"])
                spec_out[f"{channel}_reversal"] = sub
            report.extras["reversal_x_max"] = float(np.abs(spec_out["x_reversal"].amp).max())
    else:
        if cfg.scenario == "enantiomer-R":
            run_p = ZFParams(p.j0, abs(p.j1bar), p.dbar)
        elif cfg.scenario == "enantiomer-L":
            run_p = ZFParams(p.j0, -abs(p.j1bar), p.dbar)
        else:  # achiral-control
            run_p = ZFParams(p.j0, 0.0, p.dbar)
        h = dynamics.build_hamiltonian(run_p, cfg.kappa)
        ts = dynamics.propagate(rho0, h, cfg.dt, cfg.n, sp,
                                meta={"zfparams": (run_p.j0, run_p.j1bar, run_p.dbar),
                                      "kappa": cfg.kappa, "pulse": pulse_meta})
        series["single"] = ts
        peaks, specs = _fit_channels(ts, cfg.t2eff, windows)
        for channel in ("x", "y"):
            report.peaks[channel] = {"single": peaks[channel]}
            spec_out[f"{channel}_single"] = specs[channel]
        if cfg.scenario != "achiral-control":
            report.ratio = spectra.channel_ratio(peaks["x"], peaks["y"])
        else:
            report.extras["achiral_x_amps"] = [pk.amp for pk in peaks["x"]]

    files = emit_outputs(report, series, spec_out, cfg.output_dir)
    report.duration_s = time.perf_counter() - t_start
    return report, files


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return str(value)


def _atomic_write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _series_csv(ts: TimeSeries) -> str:
    buf = io.StringIO()
    buf.write("t_s,Mx,My,Mz\n")
    dt = ts.dt
    for k in range(ts.n):
        row = ts.channels[k]
        buf.write(f"{_fmt(k * dt)},{_fmt(row[0])},{_fmt(row[1])},{_fmt(row[2])}\n")
    return buf.getvalue()


def _spectrum_txt(name: str, s: Spectrum) -> str:
    buf = io.StringIO()
    buf.write(f"# spectrum {name}\n")
    buf.write(f"# channel = {s.channel}\n")
    for key in ("n", "dt", "t2eff", "n_pad"):
        if key in s.meta:
            buf.write(f"# {key} = {_fmt(s.meta[key])}\n")
    buf.write("freq_hz,re,im\n")
    for f, a in zip(s.freq, s.amp):
        buf.write(f"{_fmt(f)},{_fmt(a.real)},{_fmt(a.imag)}\n")
    return buf.getvalue()


def _report_txt(report: RunReport) -> str:
    buf = io.StringIO()
    buf.write("[run]\n")
    for key, value in report.params.items():
        buf.write(f"{key} = {_fmt(value)}\n")
    buf.write("\n[transition_frequencies]\n")
    for i, tf in enumerate(report.transition_frequencies):
        buf.write(f"f{i} = {_fmt(tf.freq_hz)}  # {tf.label}\n")
    for channel, runs in sorted(report.peaks.items()):
        for run_name, peaks in sorted(runs.items()):
            for i, pk in enumerate(peaks):
                buf.write(f"\n[peak.{channel}.{run_name}.{i}]\n")
                buf.write(f"f0_hz = {_fmt(pk.f0)}\n")
                buf.write(f"fwhm_hz = {_fmt(pk.fwhm)}\n")
                buf.write(f"amp = {_fmt(pk.amp)}\n")
                buf.write(f"phase_rad = {_fmt(pk.phase)}\n")
                buf.write(f"low_confidence = {pk.low_confidence}\n")
    buf.write("\n[summary]\n")
    if report.ratio is not None:
        buf.write(f"ratio_ax_ay = {_fmt(report.ratio.magnitude)}\n")
        buf.write(f"ratio_sign = {report.ratio.sign}\n")
        for f0, rr, dphi in report.ratio.per_peak:
            buf.write(f"peak_ratio_at_{f0:.3f}_hz = {_fmt(rr)}  # phase diff {_fmt(dphi)}\n")
    if report.comparison is not None:
        buf.write(f"x_correlation = {_fmt(report.comparison['x_correlation'])}\n")
        buf.write(f"max_abs_x_sum = {_fmt(report.comparison['max_abs_x_sum'])}\n")
        buf.write(f"max_abs_y_diff = {_fmt(report.comparison['max_abs_y_diff'])}\n")
        for item in report.comparison["phase_diffs"]:
            buf.write(f"x_phase_diff_at_{item['f0_hz']:.3f}_hz = "
                      f"{_fmt(item['phase_diff_rad'])}\n")
    for key, value in sorted(report.extras.items()):
        if isinstance(value, list):
            buf.write(f"{key} = {','.join(_fmt(v) for v in value)}\n")
        else:
            buf.write(f"{key} = {_fmt(value)}\n")
    # wall-clock duration deliberately not written: files must be byte-stable
    return buf.getvalue()


def emit_outputs(report: RunReport, series: dict, spec_out: dict, outdir: Path) -> list[Path]:
    """Write time series (CSV), spectra and the run report (structured text)."""
    outdir = Path(outdir)
    written: list[Path] = []
    for name, ts in series.items():
        path = outdir / f"series_{name}.csv"
        _atomic_write(path, _series_csv(ts))
        written.append(path)
    for name, s in spec_out.items():
        path = outdir / f"spectrum_{name}.txt"
        _atomic_write(path, _spectrum_txt(name, s))
        written.append(path)
    path = outdir / "report.txt"
    _atomic_write(path, _report_txt(report))
    written.append(path)
    return written


def read_series_csv(path: Path) -> TimeSeries:
    """Read back a series CSV produced by :func:`emit_outputs`."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t_s,Mx,My,Mz":
            raise ConfigError(f"{path}: unexpected header {header!r}")
        rows = [line.split(",") for line in fh if line.strip()]
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least two samples")
    t = np.array([float(r[0]) for r in rows])
    ch = np.array([[float(r[1]), float(r[2]), float(r[3])] for r in rows])
    dt = float(t[1] - t[0])
    return TimeSeries(dt=dt, channels=ch, meta={"source": str(path)})


def orient_report(cfg: ExperimentConfig) -> str:
    """Order-parameter / field report, including the nominal-point mismatch."""
    c = cfg.orientation
    s_configured = coupling.order_parameter(c)
    nominal = OrientationConditions(
        mu_debye=c.mu_debye, e_applied=NOMINAL_APPLIED_FIELD, eps_r=c.eps_r,
        temperature=c.temperature, bond_length=c.bond_length,
        gamma1=c.gamma1, gamma2=c.gamma2)
    s_nominal_field = coupling.order_parameter(nominal)
    field_for_nominal_s = coupling.required_field(
        NOMINAL_ORDER_PARAMETER, c.mu_debye, c.eps_r, c.temperature)
    b = coupling.dipolar_constant(c)
    dres = coupling.residual_dipolar(c, NOMINAL_ORDER_PARAMETER)

    buf = io.StringIO()
    buf.write("[conditions]\n")
    for key, value in (("mu_debye", c.mu_debye), ("eps_r", c.eps_r),
                       ("temperature_k", c.temperature), ("bond_length_m", c.bond_length),
                       ("e_applied_v_per_m", c.e_applied)):
        buf.write(f"{key} = {_fmt(value)}\n")
    buf.write("\n[order_parameter]\n")
    buf.write(f"s_at_configured_field = {_fmt(s_configured)}\n")
    buf.write(f"j1bar_scaling = {_fmt(s_configured)}  # multiplies the molecular J_xy\n")
    buf.write("\n[nominal_design_point]\n")
    buf.write(f"nominal_s = {_fmt(NOMINAL_ORDER_PARAMETER)}\n")
    buf.write(f"nominal_field_v_per_m = {_fmt(NOMINAL_APPLIED_FIELD)}\n")
    buf.write(f"s_from_formula_at_nominal_field = {_fmt(s_nominal_field)}\n")
    buf.write(f"field_from_formula_for_nominal_s = {_fmt(field_for_nominal_s)}\n")
    buf.write(f"mismatch_factor = {_fmt(field_for_nominal_s / NOMINAL_APPLIED_FIELD)}\n")
    buf.write("note = the formula and the nominal design point disagree; both are "
              "reported unmodified\n")
    buf.write("\n[dipolar]\n")
    buf.write(f"full_constant_hz = {_fmt(b)}\n")
    buf.write(f"residual_at_nominal_s_hz = {_fmt(dres)}\n")
    buf.write(f"residual_magnitude_hz = {_fmt(abs(dres))}\n")
    buf.write(f"simulation_default_sign = {cfg.dbar_sign}\n")
    return buf.getvalue()


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config PATH is required for this subcommand")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    cfg = parse_config(text)
    return _apply_overrides(cfg, args)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "scenario", None):
        if args.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        cfg.scenario = args.scenario
    if getattr(args, "output_dir", None):
        cfg.output_dir = Path(args.output_dir)
    for attr, name in (("kappa", "kappa"), ("dt", "dt"), ("t2eff", "t2eff")):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "n", None) is not None:
        cfg.n = args.n
    for name in ("j0", "j1bar", "dbar"):
        value = getattr(args, name, None)
        if value is not None:
            if cfg.coupling_route != "direct":
                raise ConfigError(f"--{name} cannot override a Cartesian coupling config")
            zf = cfg.zfparams
            cfg.zfparams = ZFParams(
                j0=value if name == "j0" else zf.j0,
                j1bar=value if name == "j1bar" else zf.j1bar,
                dbar=value if name == "dbar" else zf.dbar,
            )
    if cfg.dt <= 0:
        raise ConfigError("acquisition.dt_s must be positive")
    if cfg.n < 2:
        raise ConfigError("acquisition.n must be >= 2")
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    report, files = run_scenario(cfg)
    print(f"scenario {report.scenario} finished in {report.duration_s:.2f} s")
    if report.ratio is not None:
        print(f"|Ax/Ay| = {report.ratio.magnitude:.6f} (sign {report.ratio.sign:+d})")
    if report.comparison is not None:
        print(f"x-channel correlation between enantiomers: "
              f"{report.comparison['x_correlation']:+.9f}")
    for path in files:
        print(f"wrote {path}")
    return 0


def _cmd_analytic(args) -> int:
    cfg = _load_config(args)
    p = resolve_zfparams(cfg)
    sys_fo = analytic.perturbed_states(p.j0, p.j1bar, dbar=p.dbar)
    ratio = analytic.amplitude_ratio(cfg.spin_pair, p.j1bar / p.j0)
    t = np.arange(cfg.n) * cfg.dt
    mx = analytic.mx_signal(t, cfg.spin_pair, sys_fo)
    my = analytic.my_signal(t, cfg.spin_pair, sys_fo)
    ts = TimeSeries(dt=cfg.dt, channels=np.column_stack([mx, my, np.zeros_like(mx)]),
                    meta={"model": "first-order"})
    out = cfg.output_dir / "analytic_series.csv"
    _atomic_write(out, _series_csv(ts))
    print(f"closed-form |Mx/My| amplitude ratio = {ratio.magnitude:.6f} "
          f"(sign {ratio.sign:+d})")
    print(f"mixing coefficient = {sys_fo.mixing!r}, N^2 = {sys_fo.n_factor**2!r}")
    print(f"coherence frequencies: alpha {abs(sys_fo.energies['alpha'] - sys_fo.energies['plus']):.4f} Hz, "
          f"beta {abs(sys_fo.energies['beta'] - sys_fo.energies['plus']):.4f} Hz")
    print(f"wrote {out}")
    return 0


def _cmd_fit(args) -> int:
    cfg = _load_config(args)
    ts = read_series_csv(Path(args.series))
    p = resolve_zfparams(cfg)
    windows = fit_windows(p, cfg.kappa)
    for channel in (args.channel,) if args.channel else ("x", "y"):
        spec = spectra.apodized_spectrum(ts, channel, cfg.t2eff)
        for w in windows:
            pk = spectra.fit_lorentzian(spec, w)
            flag = " low-confidence" if pk.low_confidence else ""
            print(f"{channel}: f0 = {pk.f0:.4f} Hz, fwhm = {pk.fwhm:.4f} Hz, "
                  f"amp = {pk.amp:.6e}, phase = {pk.phase:+.4f} rad{flag}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _load_config(args)
    if bool(args.series_plus) != bool(args.series_minus):
        raise ConfigError("--series-plus and --series-minus must be given together")
    if args.series_plus and args.series_minus:
        ts_plus = read_series_csv(Path(args.series_plus))
        ts_minus = read_series_csv(Path(args.series_minus))
        result = spectra.compare_enantiomers(ts_plus, ts_minus, t2eff=cfg.t2eff)
    else:
        p = resolve_zfparams(cfg)
        ts_plus, ts_minus = dynamics.propagate_enantiomer_pair(
            p, cfg.spin_pair, cfg.dt, cfg.n, rho0=initial_state(cfg), kappa=cfg.kappa)
        result = spectra.compare_enantiomers(
            ts_plus, ts_minus, t2eff=cfg.t2eff, windows=fit_windows(p, cfg.kappa))
    print(f"x_correlation = {result['x_correlation']:+.9f}")
    print(f"max_abs_x_sum = {result['max_abs_x_sum']:.3e}")
    print(f"max_abs_y_diff = {result['max_abs_y_diff']:.3e}")
    for item in result["phase_diffs"]:
        print(f"x phase difference at {item['f0_hz']:.3f} Hz: "
              f"{item['phase_diff_rad']:+.4f} rad")
    return 0


def _cmd_orient(args) -> int:
    cfg = _load_config(args)
    text = orient_report(cfg)
    out = cfg.output_dir / "orient_report.txt"
    _atomic_write(out, text)
    print(text, end="")
    print(f"wrote {out}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest
    failures = run_selftest(fast=not getattr(args, "full", False))
    if failures:
        print(f"SELFTEST FAILED: {failures} check(s) failed")
        return 3
    print("SELFTEST PASSED")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chiralzf",
                                 description="Zero-field NMR chirality simulation")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="config file path")
        p.add_argument("--scenario", help="override run.scenario")
        p.add_argument("--output-dir", help="override output.dir")
        p.add_argument("--kappa", type=float, help="override run.kappa")
        p.add_argument("--j0", type=float, help="override coupling.j0_hz")
        p.add_argument("--j1bar", type=float, help="override coupling.j1bar_hz")
        p.add_argument("--dbar", type=float, help="override coupling.dbar_hz")
        p.add_argument("--dt", type=float, help="override acquisition.dt_s")
        p.add_argument("--n", type=int, help="override acquisition.n")
        p.add_argument("--t2eff", type=float, help="override acquisition.t2eff_s")

    p = sub.add_parser("simulate", help="run the configured scenario")
    add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analytic", help="closed-form model predictions")
    add_common(p)
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("fit", help="fit Lorentzians to an emitted series CSV")
    add_common(p)
    p.add_argument("--series", required=True, help="series CSV to fit")
    p.add_argument("--channel", choices=("x", "y", "z"), help="single channel")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("compare", help="enantiomer comparison metrics")
    add_common(p)
    p.add_argument("--series-plus", help="emitted CSV for the + enantiomer")
    p.add_argument("--series-minus", help="emitted CSV for the - enantiomer")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("orient", help="order parameter / field report")
    add_common(p)
    p.set_defaults(func=_cmd_orient)

    p = sub.add_parser("selftest", help="run the module invariant battery")
    p.add_argument("--full", action="store_true", help="include the slow checks")
    p.set_defaults(func=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FitError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
