"""Command-line interface.

Exit codes: 0 success, 1 validation/acceptance failure, 2 configuration
error, 3 numeric failure (instability or divergence).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from .config import RunConfig, parse_config
from .dynamics import cross_validate
from .errors import (
    ConfigError,
    DivergenceError,
    InstabilityError,
    InvalidParameterError,
    PTCavityError,
    TransitionSingularityError,
)
from .model import decompose, ep_threshold, pt_ep_amplification_ratio
from .sensitivity import displacement_psd, force_psd, heisenberg_product
from .spectrum import (
    amplification_factor,
    background_spectrum,
    composite_spectrum,
    default_background_grid,
    default_transducer_grid,
    peak_analysis,
    sideband_ladder,
)
from .sweeps import (
    CSV_HEADERS,
    FIGURE_IDS,
    reproduce,
    run_validation,
    sweep_grid,
    write_csv,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_OUT_ENV = "PTCAVITY_OUT"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="configuration file (key = value sections)")
    p.add_argument("--out", type=Path, default=None, help="output directory (overrides config and env)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; affects speed only, never results")
    p.add_argument("--seed", type=int, default=None, help="reserved; nothing in scope is stochastic")


def _load_config(args) -> RunConfig:
    if args.config is None:
        return RunConfig()
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
    return parse_config(text)


def _outdir(args, cfg: RunConfig) -> Path:
    if args.out is not None:
        out = Path(args.out)
    elif os.environ.get(_OUT_ENV):
        out = Path(os.environ[_OUT_ENV])
    else:
        out = Path(cfg.output_dir)
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_supermodes(args) -> int:
    cfg = _load_config(args)
    sys_ = cfg.system()
    dec = decompose(sys_, tol=cfg.transition_tol)
    print(f"system: delta={sys_.delta} d1={sys_.d1} d2={sys_.d2} g1={sys_.g1} g={sys_.g} (MHz)")
    print(f"chi = {dec.chi!r} MHz, dlt = {dec.dlt!r} MHz, beta = {dec.beta!r} MHz")
    print(f"omega_plus  = {dec.omega_plus!r} MHz  (Omega={dec.Omega_plus!r}, Gamma={dec.Gamma_plus!r})")
    print(f"omega_minus = {dec.omega_minus!r} MHz  (Omega={dec.Omega_minus!r}, Gamma={dec.Gamma_minus!r})")
    print(f"phase = {dec.phase.value}, stable = {dec.stable}, margin = {dec.stability_margin!r} MHz")
    g_eff = "divergent" if math.isinf(dec.g_eff) else repr(dec.g_eff)
    print(f"g_eff = {g_eff}, coalescence coupling = {ep_threshold(sys_)!r} MHz")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    sys_ = cfg.system()
    mech = cfg.mechanical()

    bg = background_spectrum(sys_, default_background_grid(sys_, cfg.grid_points), eps=cfg.drive_eps)
    write_csv(out / "background.csv", ("omega", "value"), list(zip(bg.grid, bg.values)))
    peaks = peak_analysis(bg)
    print(f"background.csv written ({bg.grid.size} points)")
    for p in peaks:
        print(f"  peak at {p.position:.6g} MHz, height {p.height:.6g}, FWHM {p.fwhm:.6g} MHz")

    if mech.z0 > 0:
        ladder = sideband_ladder(sys_, mech, eps=cfg.drive_eps, order=cfg.ladder_order)
        comp = composite_spectrum(ladder, default_transducer_grid(mech, cfg.grid_points))
        write_csv(
            out / "composite.csv",
            ("omega_over_omegam", "value"),
            [(w / mech.omega_m, v) for w, v in zip(comp.grid, comp.values)],
        )
        print(f"composite.csv written; sideband contrast |a1/a0|^2 = {ladder.contrast(1)!r}")
    return EXIT_OK


def _cmd_amplification(args) -> int:
    cfg = _load_config(args)
    sys_ = cfg.system()
    mech = cfg.mechanical()
    a = amplification_factor(sys_, mech, eps=cfg.drive_eps, order=cfg.ladder_order)
    print(f"A = {a!r} at g1 = {sys_.g1} MHz (g1/threshold = {sys_.g1 / ep_threshold(sys_)!r})")
    if cfg.sweep_parameter == "g1_over_Gamma":
        out = _outdir(args, cfg)
        xs = sweep_grid(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_count, cfg.sweep_spacing)
        rows = []
        from dataclasses import replace

        thr = ep_threshold(sys_)
        for x in xs:
            s = replace(sys_, g1=float(x) * thr)
            stable = decompose(s).stable
            val = amplification_factor(
                s, mech, eps=cfg.drive_eps, order=cfg.ladder_order, allow_unstable=True
            )
            rows.append((float(x), val, "ok" if stable else "unstable-formal"))
        write_csv(out / "amplification_sweep.csv", CSV_HEADERS["fig1c"], rows)
        print(f"amplification_sweep.csv written ({len(rows)} points)")
    return EXIT_OK


def _cmd_sensitivity(args) -> int:
    cfg = _load_config(args)
    sys_ = cfg.system()
    sp = cfg.sensitivity_params()
    dec = decompose(sys_, tol=cfg.transition_tol)
    for w in (0.0, cfg.omega_m):
        sxx = displacement_psd(dec, sp, w)
        sff = force_psd(dec, sp, w)
        prod = heisenberg_product(dec, sp, w)
        print(f"omega = {w} MHz: S_xx = {sxx!r}, S_FF = {sff!r}, S_xx*S_FF = {prod!r}")
    print("(absolute densities are in the formula's natural units; only ratios are calibrated)")
    if cfg.sweep_parameter == "g1_over_threshold":
        from .sensitivity import sensitivity_ratio_sweep

        out = _outdir(args, cfg)
        xs = sweep_grid(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_count, cfg.sweep_spacing)
        curve = sensitivity_ratio_sweep(sys_, cfg.ep_system(), cfg.mechanical(), sp, xs)
        rows = list(zip(curve.sweep_values, curve.ratio_pt, curve.ratio_ep, curve.status))
        write_csv(out / "sensitivity_sweep.csv", CSV_HEADERS["fig2c"], rows)
        print(f"sensitivity_sweep.csv written ({len(rows)} points)")
    return EXIT_OK


def _cmd_ep_compare(args) -> int:
    cfg = _load_config(args)
    kappa = cfg.kappa
    gamma = kappa1 = cfg.gamma_or_kappa1
    print(f"gain-loss pair: coalescence at g1 = {(kappa + gamma) / 2!r} MHz")
    print(f"loss-loss pair: coalescence at g1 = {(kappa - kappa1) / 2!r} MHz")
    ratio = pt_ep_amplification_ratio(kappa, gamma, kappa1)
    print(f"amplification-factor ratio (gain-loss over loss-loss) = {ratio!r}")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    csv_path, summary = reproduce(args.figure, cfg, out, threads=max(args.threads, 1))
    print(f"wrote {csv_path}")
    for key in sorted(summary):
        print(f"  {key}: {summary[key]}")
    if args.render:
        try:
            from ptcavity_figures import render
        except ImportError:
            print("figure rendering skipped: ptcavity-figures is not installed")
        else:
            png = Path(csv_path).with_suffix(".png")
            render(args.figure, csv_path, png)
            print(f"wrote {png}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = _load_config(args)
    ok, findings = run_validation(cfg)
    for line in findings:
        print(line)
    print("validation:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptcavity",
        description="Gain-loss coupled-cavity metrology: supermodes, spectra, sensitivity sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, doc in (
        ("supermodes", _cmd_supermodes, "print the supermode decomposition"),
        ("spectrum", _cmd_spectrum, "write background (and composite) spectra"),
        ("amplification", _cmd_amplification, "back-action amplification factor"),
        ("sensitivity", _cmd_sensitivity, "displacement/force spectral densities"),
        ("ep-compare", _cmd_ep_compare, "gain-loss versus loss-loss closed forms"),
        ("validate", _cmd_validate, "cross-validate ladder against time-domain oracle"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("reproduce", help="write one reproduction CSV plus summary")
    p.add_argument("figure", choices=FIGURE_IDS)
    p.add_argument("--render", action="store_true", help="also render a PNG if ptcavity-figures is installed")
    _add_common(p)
    p.set_defaults(fn=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InstabilityError, DivergenceError, TransitionSingularityError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidParameterError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PTCavityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
