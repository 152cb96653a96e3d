"""Reproduction sweeps, CSV emission and the validation matrix.

Each ``fig*`` pipeline computes one deliverable table with a fixed schema
and returns the rows plus a summary of its headline metrics.  Rows for
points without a steady state are never silently dropped: the sweep tables
carry an explicit status column, and values computed from the formal linear
response (rather than a reachable steady state) are labelled as such.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dynamics import OracleConfig, cross_validate
from .model import CoupledModeSystem, decompose, ep_threshold
from .sensitivity import sensitivity_ratio_sweep
from .spectrum import (
    MechanicalMode,
    Normalization,
    amplification_factor,
    background_spectrum,
    composite_spectrum,
    default_background_grid,
    default_transducer_grid,
    peak_analysis,
    sideband_ladder,
    single_cavity_reference,
)

__all__ = [
    "FIGURE_IDS",
    "CSV_HEADERS",
    "sweep_grid",
    "write_csv",
    "reproduce",
    "validation_matrix",
    "run_validation",
]

FIGURE_IDS = ("fig1c", "fig1d", "fig2b", "fig2c")

CSV_HEADERS = {
    "fig1c": ("g1_over_Gamma", "A", "status"),
    "fig1d": ("omega", "S_single", "S_broken", "S_ptsym"),
    "fig2b": ("omega_over_omegam", "S_pt", "S_single", "S_ep"),
    "fig2c": ("g1_over_threshold", "ratio_pt", "ratio_ep", "status"),
}

# Canonical reproduction grids.  fig1c probes the amplification peak, whose
# location must be resolved to better than 0.005 in g1/Gamma; the probe
# amplitude is kept small so the contrast ratio sits in the linear-response
# regime.  fig2c needs points inside (1, 1.01] while avoiding the exact
# coalescence point, which the 420-point grid does.
FIG1C_GRID = (0.5, 1.5, 401)
FIG1C_Z0 = 0.02
FIG2C_GRID = (0.9, 3.0, 420)
FIG1D_BROKEN_G1 = 17.0


def sweep_grid(start: float, stop: float, count: int, spacing: str = "linear") -> np.ndarray:
    if spacing == "log":
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path, header, rows) -> None:
    """Shortest round-trip decimals, LF newlines, fixed column order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# fig1c: amplification factor versus g1/Gamma
# ---------------------------------------------------------------------------

def fig1c_data(config: RunConfig, threads: int = 1):
    base = config.system()
    threshold = ep_threshold(base)
    mech = replace(config.mechanical(), z0=FIG1C_Z0)
    xs = sweep_grid(*FIG1C_GRID)

    def point(x: float):
        sys = replace(base, g1=float(x) * threshold)
        stable = decompose(sys).stable
        a = amplification_factor(
            sys, mech, eps=config.drive_eps, order=config.ladder_order, allow_unstable=True
        )
        # formal linear response where no steady state exists; labelled, not hidden
        return a, "ok" if stable else "unstable-formal"

    results = _pmap(point, xs, threads)
    rows = [(float(x), a, status) for x, (a, status) in zip(xs, results)]

    a_vals = np.array([r[1] for r in rows])
    peak_idx = int(np.argmax(a_vals))
    peak_x = float(xs[peak_idx])
    a_half = float(a_vals[0])  # grid starts at g1/Gamma = 0.5
    summary = {
        "figure": "fig1c",
        "peak_g1_over_Gamma": peak_x,
        "peak_A": float(a_vals[peak_idx]),
        "A_at_half": a_half,
        "growth_from_half": float(a_vals[peak_idx] / a_half),
        "peak_within_5pct_of_transition": bool(abs(peak_x - 1.0) < 0.05),
        "growth_at_least_100x": bool(a_vals[peak_idx] / a_half >= 100.0),
        "n_unstable_points": sum(1 for r in rows if r[2] != "ok"),
    }
    return rows, summary


# ---------------------------------------------------------------------------
# fig1d: background spectra (single / broken / split)
# ---------------------------------------------------------------------------

def fig1d_data(config: RunConfig, threads: int = 1):
    base = config.system()
    grid = default_background_grid(base, points=config.grid_points)

    single = background_spectrum(single_cavity_reference(base), grid)
    broken = background_spectrum(
        replace(base, g1=FIG1D_BROKEN_G1), grid, allow_unstable=True
    )
    ptsym = background_spectrum(base, grid)

    rows = [
        (float(w), float(s), float(b), float(p))
        for w, s, b, p in zip(grid, single.values, broken.values, ptsym.values)
    ]

    dec = decompose(base)
    peaks_pt = peak_analysis(ptsym)
    peaks_single = peak_analysis(single)
    peaks_broken = peak_analysis(broken)
    target = dec.beta_r
    pos = sorted(p.position for p in peaks_pt)
    pos_err = max(abs(abs(p) - target) / target for p in pos) if pos else math.inf
    summary = {
        "figure": "fig1d",
        "split_peak_positions": pos,
        "split_peak_target": [-target, target],
        "split_peak_max_rel_err": pos_err,
        "ptsym_fwhm": [p.fwhm for p in peaks_pt],
        "ptsym_fwhm_target": 2.0 * dec.chi,
        "broken_fwhm": peaks_broken[0].fwhm if peaks_broken else math.nan,
        "single_fwhm": peaks_single[0].fwhm if peaks_single else math.nan,
        "broken_narrower_than_single": bool(
            peaks_broken and peaks_single and peaks_broken[0].fwhm < peaks_single[0].fwhm
        ),
    }
    return rows, summary


# ---------------------------------------------------------------------------
# fig2b: composite transducer spectra (gain-loss / single / loss-loss)
# ---------------------------------------------------------------------------

def fig2b_data(config: RunConfig, threads: int = 1):
    base = config.system()
    mech = config.mechanical()
    grid = default_transducer_grid(mech, points=config.grid_points)

    pt_ladder = sideband_ladder(base, mech, eps=config.drive_eps, order=config.ladder_order)
    single_sys = single_cavity_reference(base)
    single_ladder = sideband_ladder(single_sys, mech, eps=config.drive_eps, order=config.ladder_order)
    # loss-loss pair placed at the same relative distance from its own
    # coalescence point as the gain-loss pair is from its transition
    ep_base = config.ep_system()
    rel = base.g1 / ep_threshold(base)
    ep_sys = replace(ep_base, g1=rel * ep_threshold(ep_base))
    ep_ladder = sideband_ladder(ep_sys, mech, eps=config.drive_eps, order=config.ladder_order)

    s_pt = composite_spectrum(pt_ladder, grid)
    s_single = composite_spectrum(single_ladder, grid)
    s_ep = composite_spectrum(ep_ladder, grid)

    rows = [
        (float(w / mech.omega_m), float(a), float(b), float(c))
        for w, a, b, c in zip(grid, s_pt.values, s_single.values, s_ep.values)
    ]

    contrast_pt = pt_ladder.contrast(1)
    contrast_single = single_ladder.contrast(1)
    peaks = peak_analysis(s_pt)
    heights = {}
    for target_n in (1, 2):
        target = target_n * mech.omega_m
        near = [p for p in peaks if abs(p.position - target) < 0.25 * mech.omega_m]
        heights[target_n] = max((p.height for p in near), default=math.nan)
    summary = {
        "figure": "fig2b",
        "contrast_pt": contrast_pt,
        "contrast_single": contrast_single,
        "contrast_ratio": contrast_pt / contrast_single,
        "contrast_ratio_at_least_10x": bool(contrast_pt / contrast_single >= 10.0),
        "pt_peak_height_at_1": heights[1],
        "pt_peak_height_at_2": heights[2],
        "strictly_decreasing_orders": bool(
            not math.isnan(heights[1])
            and not math.isnan(heights[2])
            and heights[1] > heights[2]
        ),
        "ep_g1": ep_sys.g1,
    }
    return rows, summary


# ---------------------------------------------------------------------------
# fig2c: displacement-sensitivity ratios
# ---------------------------------------------------------------------------

def fig2c_data(config: RunConfig, threads: int = 1):
    base = config.system()
    ep_base = config.ep_system()
    mech = config.mechanical()
    sp = config.sensitivity_params()
    xs = sweep_grid(*FIG2C_GRID)

    curve = sensitivity_ratio_sweep(base, ep_base, mech, sp, xs)
    rows = [
        (float(x), float(rp), float(re), st)
        for x, rp, re, st in zip(curve.sweep_values, curve.ratio_pt, curve.ratio_ep, curve.status)
    ]

    in_window = [
        r[1]
        for r in rows
        if 1.0 < r[0] <= 1.01 and r[3] == "ok" and not math.isnan(r[1])
    ]
    near = [
        (r[1], r[2])
        for r in rows
        if r[3] == "ok" and 0.99 <= r[0] <= 1.2 and not math.isnan(r[1])
    ]
    summary = {
        "figure": "fig2c",
        "min_ratio_pt_in_(1,1.01]": min(in_window) if in_window else math.nan,
        "window_has_point_below_1e-2": bool(in_window and min(in_window) < 1e-2),
        "pt_beats_ep_near_transition": bool(near and all(rp < re for rp, re in near)),
        "n_points_near_transition": len(near),
        "n_unstable_points": sum(1 for r in rows if r[3] != "ok"),
    }
    return rows, summary


_PIPELINES = {
    "fig1c": fig1c_data,
    "fig1d": fig1d_data,
    "fig2b": fig2b_data,
    "fig2c": fig2c_data,
}


def reproduce(figure_id: str, config: RunConfig, outdir, threads: int = 1):
    """Run one reproduction pipeline; write ``<id>.csv`` and ``<id>_summary.json``.

    Returns (csv_path, summary).
    """
    if figure_id not in _PIPELINES:
        raise ValueError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")
    outdir = Path(outdir)
    os.makedirs(outdir, exist_ok=True)
    rows, summary = _PIPELINES[figure_id](config, threads=threads)
    csv_path = outdir / f"{figure_id}.csv"
    write_csv(csv_path, CSV_HEADERS[figure_id], rows)
    with open(outdir / f"{figure_id}_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, summary


# ---------------------------------------------------------------------------
# validation matrix: ladder versus time-domain oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixEntry:
    label: str
    sys: CoupledModeSystem
    mech: MechanicalMode


def validation_matrix(config: RunConfig | None = None) -> list:
    """Stable configurations covering both phases, both pair types, detuned
    drives and a range of mechanical parameters."""
    cfg = config or RunConfig()
    base = cfg.system()
    mech = cfg.mechanical()
    entries = []

    for g1 in (18.05, 18.3, 18.6, 19.0, 19.4, 19.8, 20.5, 21.5, 23.0, 26.0):
        entries.append(MatrixEntry(f"pt-split-g1={g1}", replace(base, g1=g1), mech))
    # broken-but-damped points: the modulation parametrically destabilises
    # this window at full drive, so probe it weakly
    for g1, z0 in ((17.95, 0.05), (17.92, 0.02)):
        entries.append(
            MatrixEntry(f"pt-broken-g1={g1}", replace(base, g1=g1), replace(mech, z0=z0))
        )

    ep = cfg.ep_system()
    for g1 in (0.5, 1.0, 1.9, 2.1, 3.0, 6.0):
        entries.append(MatrixEntry(f"ep-g1={g1}", replace(ep, g1=g1), mech))

    entries.append(MatrixEntry("pt-detuned", replace(base, delta=2.0), mech))
    entries.append(MatrixEntry("ep-detuned", replace(ep, delta=-3.0, g1=3.0), mech))
    entries.append(MatrixEntry("pt-slow-mech", base, replace(mech, omega_m=4.0)))
    entries.append(MatrixEntry("pt-fast-mech", base, replace(mech, omega_m=9.0)))
    entries.append(MatrixEntry("pt-weak-drive", base, replace(mech, z0=0.05)))
    entries.append(MatrixEntry("pt-strong-drive", base, replace(mech, z0=0.4)))
    entries.append(MatrixEntry("single-cavity", single_cavity_reference(base), mech))
    return entries


def run_validation(config: RunConfig | None = None, halving_labels=("pt-split-g1=19.8",)):
    """Cross-validate the full matrix; optionally re-run selected entries at
    half the step to certify integrator convergence.

    Returns (ok, findings) where findings is a list of text lines.
    """
    cfg = config or RunConfig()
    findings = []
    ok = True
    oc = cfg.oracle_config()
    for entry in validation_matrix(cfg):
        try:
            report = cross_validate(entry.sys, entry.mech, eps=cfg.drive_eps, config=oc)
        except Exception as exc:  # divergence, poor fit, instability: report, keep going
            findings.append(f"{entry.label}: ERROR {type(exc).__name__}: {exc}")
            ok = False
            continue
        worst = max(report.deviations.values())
        line = f"{entry.label}: worst rel dev {worst:.3e} -> {'PASS' if report.passed else 'FAIL'}"
        findings.append(line)
        if not report.passed:
            ok = False
            findings.extend("  " + n for n in report.notes)
        if entry.label in halving_labels and report.passed:
            from .dynamics import suggested_dt  # local import to keep module load light

            dt = oc.dt if oc.dt is not None else suggested_dt(entry.sys, entry.mech)
            fine = cross_validate(
                entry.sys,
                entry.mech,
                eps=cfg.drive_eps,
                config=OracleConfig(
                    dt=dt / 2.0, t_end=oc.t_end, order=oc.order, tolerance=oc.tolerance
                ),
            )
            shifts = [
                abs(fine.oracle_powers[n] - report.oracle_powers[n]) / report.oracle_powers[n]
                for n in report.oracle_powers
                if report.oracle_powers[n] > 0
            ]
            shift = max(shifts) if shifts else 0.0
            conv_ok = shift < 1e-8
            findings.append(
                f"{entry.label}: step-halving shift {shift:.3e} -> {'PASS' if conv_ok else 'FAIL'}"
            )
            if not conv_ok:
                ok = False
    return ok, findings
