"""Acceptance suite: one test per headline criterion, each printing a
PASS/FAIL line.  Tolerances are fixed here, not tuned at runtime."""

import math
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from ptcavity import (
    BracketMode,
    CoupledModeSystem,
    HBAR,
    MechanicalMode,
    OracleConfig,
    RunConfig,
    SensitivityParams,
    amplification_factor,
    background_spectrum,
    composite_spectrum,
    cross_validate,
    decompose,
    heisenberg_product,
    peak_analysis,
    pt_ep_amplification_ratio,
    sensitivity_ratio_sweep,
    sideband_ladder,
    suggested_dt,
)
from ptcavity.model import BalancedGainError
from ptcavity.sweeps import FIG1C_GRID, FIG1C_Z0, FIG2C_GRID, validation_matrix


def report(name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"{tag}: {name}{suffix}")
    assert ok, f"{name}: {detail}"


PT = CoupledModeSystem(delta=0.0, d1=20.0, d2=-16.0, g1=19.8, g=5.0)
MECH = MechanicalMode(omega_m=6.0, gamma_m=0.2, z0=0.2)


def test_c1_eigenstructure_oracle():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10_000):
        sys_ = CoupledModeSystem(
            delta=rng.uniform(-50, 50),
            d1=rng.uniform(0.1, 50),
            d2=rng.uniform(-50, 50),
            g1=rng.uniform(0, 50),
            g=rng.uniform(0, 10),
        )
        dec = decompose(sys_)
        ref = np.linalg.eigvals(sys_.matrix())
        ours = (dec.omega_plus, dec.omega_minus)
        direct = max(abs(ours[0] - ref[0]), abs(ours[1] - ref[1]))
        swapped = max(abs(ours[0] - ref[1]), abs(ours[1] - ref[0]))
        scale = max(abs(ref[0]), abs(ref[1]), 1e-30)
        worst = max(worst, min(direct, swapped) / scale)
    exact = True
    for _ in range(2_000):
        sys_ = CoupledModeSystem(
            delta=rng.uniform(-50, 50),
            d1=rng.uniform(0.1, 50),
            d2=rng.uniform(-50, 50),
            g1=0.0,
            g=rng.uniform(0, 10),
        )
        dec = decompose(sys_)
        if {dec.Gamma_plus, dec.Gamma_minus} != {sys_.d1, sys_.d2}:
            exact = False
            break
    report(
        "eigenstructure oracle (1e4 draws, 1e-10 relative; uncoupled exact)",
        worst <= 1e-10 and exact,
        f"worst rel dev {worst:.3e}",
    )


def test_c2_amplification_peak_location_and_growth():
    xs = np.linspace(*FIG1C_GRID)
    probe = replace(MECH, z0=FIG1C_Z0)
    vals = np.array(
        [
            amplification_factor(replace(PT, g1=float(x) * 18.0), probe, allow_unstable=True)
            for x in xs
        ]
    )
    peak_x = float(xs[int(np.argmax(vals))])
    growth = float(vals.max() / vals[0])
    report(
        "amplification peaks within 5% of the transition and grows >= 100x from g1/Gamma = 0.5",
        abs(peak_x - 1.0) < 0.05 and growth >= 100.0,
        f"peak at {peak_x:.4f}, growth {growth:.1f}x",
    )


def test_c3_background_narrowing_and_splitting():
    dec = decompose(PT)
    split = background_spectrum(PT)
    peaks = sorted(peak_analysis(split), key=lambda p: p.position)
    ok = len(peaks) == 2
    details = []
    if ok:
        for peak, target in zip(peaks, (dec.Omega_minus, dec.Omega_plus)):
            ok = ok and abs(peak.position - target) <= 0.02 * abs(target)
            ok = ok and abs(peak.fwhm - 4.0) <= 0.4
        details.append(f"peaks at {peaks[0].position:.3f}/{peaks[1].position:.3f} MHz")
        details.append(f"FWHM {peaks[0].fwhm:.3f}/{peaks[1].fwhm:.3f} MHz")

    single = background_spectrum(CoupledModeSystem(delta=0.0, d1=20.0, d2=20.0, g1=0.0, g=5.0))
    broken = background_spectrum(replace(PT, g1=17.0), allow_unstable=True)
    fw_single = peak_analysis(single)[0].fwhm
    fw_broken = peak_analysis(broken)[0].fwhm
    ok = ok and fw_broken < fw_single
    details.append(f"broken FWHM {fw_broken:.2f} < single {fw_single:.2f} MHz")
    report("background splitting at +-8.25 MHz (2%), FWHM 4 MHz (10%), broken narrower", ok, "; ".join(details))


def test_c4_sideband_visibility():
    ladder_pt = sideband_ladder(PT, MECH)
    single_sys = CoupledModeSystem(delta=0.0, d1=20.0, d2=20.0, g1=0.0, g=5.0)
    ladder_single = sideband_ladder(single_sys, MECH)
    contrast_ratio = ladder_pt.contrast(1) / ladder_single.contrast(1)

    spec = composite_spectrum(ladder_pt)
    peaks = peak_analysis(spec)
    heights = {}
    for n in (1, 2):
        near = [p for p in peaks if abs(p.position - n * MECH.omega_m) < 0.25 * MECH.omega_m]
        heights[n] = max((p.height for p in near), default=math.nan)
    ok = (
        not math.isnan(heights[1])
        and not math.isnan(heights[2])
        and heights[1] > heights[2]
        and contrast_ratio >= 10.0
    )
    report(
        "composite spectrum shows first and second sidebands, decreasing; contrast >= 10x single cavity",
        ok,
        f"heights {heights[1]:.3g} > {heights[2]:.3g}; contrast ratio {contrast_ratio:.1f}x",
    )


def test_c5_sensitivity_enhancement():
    ep = CoupledModeSystem(delta=0.0, d1=20.0, d2=16.0, g1=1.0, g=5.0)
    sp = SensitivityParams()
    xs = np.linspace(*FIG2C_GRID)
    curve = sensitivity_ratio_sweep(PT, ep, MECH, sp, xs)
    window = [
        rp
        for x, rp, st in zip(curve.sweep_values, curve.ratio_pt, curve.status)
        if 1.0 < x <= 1.01 and st == "ok"
    ]
    near = [
        (rp, re)
        for x, rp, re, st in zip(curve.sweep_values, curve.ratio_pt, curve.ratio_ep, curve.status)
        if st == "ok" and 0.99 <= x <= 1.2
    ]
    ok = bool(window) and min(window) < 1e-2 and bool(near) and all(rp < re for rp, re in near)
    report(
        "S_xx ratio < 1e-2 inside (1, 1.01]; gain-loss beats loss-loss at stable near-transition points",
        ok,
        f"min window ratio {min(window):.3e}; {len(near)} near points checked",
    )


def test_c6_heisenberg_saturation():
    rng = np.random.default_rng(7)
    target = HBAR**2 / 4.0
    checked = 0
    worst = 0.0
    while checked < 1000:
        sys_ = CoupledModeSystem(
            delta=rng.uniform(-10, 10),
            d1=rng.uniform(0.5, 40),
            d2=rng.uniform(-35, 40),
            g1=rng.uniform(0, 40),
            g=rng.uniform(0.1, 10),
        )
        dec = decompose(sys_)
        if not dec.stable or math.isinf(dec.g_eff):
            continue
        mode = BracketMode.DIMENSIONAL if checked % 2 == 0 else BracketMode.AS_PRINTED
        sp = SensitivityParams(p_in=10.0 ** rng.uniform(-4, -1), bracket_mode=mode)
        prod = heisenberg_product(dec, sp, rng.uniform(0.0, 30.0))
        worst = max(worst, abs(prod - target) / target)
        checked += 1
    report(
        "S_xx * S_FF = hbar^2/4 to 1e-12 for 1000 stable draws, both bracket modes",
        worst <= 1e-12,
        f"worst rel dev {worst:.3e}",
    )


def test_c7_amplification_ratio_closed_form():
    exact = pt_ep_amplification_ratio(20.0, 16.0, 16.0) == 576.0
    gammas = np.linspace(0.5, 19.95, 100)
    vals = [pt_ep_amplification_ratio(20.0, g, 16.0) for g in gammas]
    monotone = all(b > a for a, b in zip(vals, vals[1:]))
    try:
        pt_ep_amplification_ratio(20.0, 20.0, 16.0)
        flagged = False
    except BalancedGainError:
        flagged = True
    report(
        "closed-form amplification ratio = 576 exactly; monotone in gain; divergence flagged",
        exact and monotone and flagged,
    )


def test_c8_oracle_equivalence():
    entries = validation_matrix(RunConfig())
    assert len(entries) >= 20
    worst = 0.0
    worst_label = ""
    for entry in entries:
        rep = cross_validate(entry.sys, entry.mech)
        dev = max(rep.deviations.values())
        if dev > worst:
            worst, worst_label = dev, entry.label
        assert rep.passed, f"{entry.label}: {dev:.3e}"

    halving_shift = 0.0
    for label in ("pt-split-g1=19.8", "ep-g1=2.1", "pt-detuned"):
        entry = next(e for e in entries if e.label == label)
        base = cross_validate(entry.sys, entry.mech)
        dt = suggested_dt(entry.sys, entry.mech)
        fine = cross_validate(entry.sys, entry.mech, config=OracleConfig(dt=dt / 2.0))
        for n in (0, 1, 2):
            if base.oracle_powers[n] > 0:
                shift = abs(fine.oracle_powers[n] - base.oracle_powers[n]) / base.oracle_powers[n]
                halving_shift = max(halving_shift, shift)
    report(
        "ladder vs time-domain oracle <= 1e-3 over 25 stable configs; step-halving < 1e-8",
        worst <= 1e-3 and halving_shift < 1e-8,
        f"worst dev {worst:.3e} at {worst_label}; halving shift {halving_shift:.3e}",
    )


def test_c9_reproduce_determinism(tmp_path):
    figset = ("fig1c", "fig1d", "fig2b", "fig2c")
    digests = {}
    for tag, threads in (("r1", "1"), ("r2", "1"), ("r4", "4")):
        outdir = tmp_path / tag
        for fig in figset:
            res = subprocess.run(
                [sys.executable, "-m", "ptcavity", "reproduce", fig,
                 "--out", str(outdir), "--threads", threads],
                capture_output=True,
                text=True,
                timeout=600,
            )
            assert res.returncode == 0, res.stderr
            digests.setdefault(fig, []).append((outdir / f"{fig}.csv").read_bytes())
    ok = all(len(set(runs)) == 1 for runs in digests.values())
    report("reproduce CSVs byte-identical across runs and thread counts", ok)
