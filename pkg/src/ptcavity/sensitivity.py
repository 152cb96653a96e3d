"""Closed-form displacement and back-action force spectral densities.

The displacement spectral density of the coupled transducer is

    S_xx(w) = Gamma_sel**2 * hbar * Omega_sel / (64 * g_eff**2 * P_in) * B(w)

and the back-action force density is its mirror

    S_FF(w) = 16 * hbar * g_eff**2 * P_in / (Gamma_sel**2 * Omega_sel) / B(w)

where Gamma_sel is the decay rate of the least-damped supermode, Omega_sel
its absolute optical frequency (carrier plus rotating-frame resonance), and
B the bracket term.  The printed bracket (1 + 4 w / Gamma**2) is
dimensionally inconsistent; the default mode uses (1 + 4 w**2 / Gamma**2)
and the printed form is retained behind a flag.  Either way the product
S_xx * S_FF = hbar**2 / 4 identically (the saturated Heisenberg bound).

Absolute values are reported in the formula's natural units (no zero-point
displacement scale is applied); only ratios between configurations are
meaningful, and P_in, hbar and the optical carrier cancel in every ratio.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InstabilityError, InvalidParameterError, TransitionSingularityError
from .model import CoupledModeSystem, Phase, SupermodeDecomposition, decompose, ep_threshold
from .spectrum import MechanicalMode

__all__ = [
    "BracketMode",
    "SensitivityParams",
    "SensitivityCurve",
    "displacement_psd",
    "force_psd",
    "heisenberg_product",
    "single_cavity_displacement_psd",
    "sensitivity_ratio_sweep",
    "HBAR",
    "OMEGA0_1550NM",
]

#: Reduced Planck constant (J s).
HBAR = 1.054571817e-34

#: Angular frequency of a 1550 nm optical carrier, in MHz.
OMEGA0_1550NM = 1.2152517e9


class BracketMode(enum.Enum):
    AS_PRINTED = "AS_PRINTED"    # 1 + 4 w / Gamma**2  (kept for fidelity runs)
    DIMENSIONAL = "DIMENSIONAL"  # 1 + 4 w**2 / Gamma**2


@dataclass(frozen=True)
class SensitivityParams:
    """Input power, optical carrier and bracket convention."""

    p_in: float = 1e-3
    omega0: float = OMEGA0_1550NM
    hbar: float = HBAR
    bracket_mode: BracketMode = BracketMode.DIMENSIONAL

    def __post_init__(self) -> None:
        if self.p_in <= 0:
            raise InvalidParameterError(f"p_in must be > 0, got {self.p_in}")
        if self.omega0 <= 0:
            raise InvalidParameterError(f"omega0 must be > 0, got {self.omega0}")
        if self.hbar <= 0:
            raise InvalidParameterError(f"hbar must be > 0, got {self.hbar}")


def _selected_supermode(decomp: SupermodeDecomposition) -> tuple[float, float]:
    """Decay rate and rotating-frame resonance of the least-damped supermode.
    On a tie (split phase) the lower-frequency supermode is used."""
    if decomp.Gamma_plus < decomp.Gamma_minus:
        return decomp.Gamma_plus, decomp.Omega_plus
    if decomp.Gamma_minus < decomp.Gamma_plus:
        return decomp.Gamma_minus, decomp.Omega_minus
    return decomp.Gamma_minus, min(decomp.Omega_plus, decomp.Omega_minus)


def _bracket(omega: float, gamma_sel: float, mode: BracketMode) -> float:
    gsq = gamma_sel * gamma_sel
    if mode is BracketMode.AS_PRINTED:
        return 1.0 + 4.0 * omega / gsq
    return 1.0 + 4.0 * omega * omega / gsq


def _check_usable(decomp: SupermodeDecomposition) -> None:
    if not decomp.stable:
        raise InstabilityError(
            "spectral densities require a stable system (an amplifying supermode "
            "has no steady state)"
        )
    if math.isinf(decomp.g_eff):
        raise TransitionSingularityError(
            "g_eff diverges at the coalescence point: S_xx -> 0 and S_FF -> infinity "
            "as limits; no finite value is returned"
        )
    if decomp.g_eff <= 0.0:
        raise InvalidParameterError("g_eff must be positive (g > 0 required)")


def displacement_psd(
    decomp: SupermodeDecomposition, sp: SensitivityParams, omega: float
) -> float:
    """Displacement spectral density at offset ``omega`` (MHz)."""
    _check_usable(decomp)
    gamma_sel, res = _selected_supermode(decomp)
    omega_sel = sp.omega0 + res
    br = _bracket(omega, gamma_sel, sp.bracket_mode)
    return gamma_sel * gamma_sel * sp.hbar * omega_sel / (64.0 * decomp.g_eff**2 * sp.p_in) * br


def force_psd(decomp: SupermodeDecomposition, sp: SensitivityParams, omega: float) -> float:
    """Back-action force spectral density at offset ``omega`` (MHz)."""
    _check_usable(decomp)
    gamma_sel, res = _selected_supermode(decomp)
    omega_sel = sp.omega0 + res
    br = _bracket(omega, gamma_sel, sp.bracket_mode)
    return 16.0 * sp.hbar * decomp.g_eff**2 * sp.p_in / (gamma_sel * gamma_sel * omega_sel) / br


def heisenberg_product(
    decomp: SupermodeDecomposition, sp: SensitivityParams, omega: float
) -> float:
    """S_xx * S_FF; equals hbar**2 / 4 for every valid input."""
    return displacement_psd(decomp, sp, omega) * force_psd(decomp, sp, omega)


def single_cavity_displacement_psd(
    kappa: float, delta: float, g: float, sp: SensitivityParams, omega: float
) -> float:
    """Baseline: bare cavity of width kappa with Gamma_sel -> kappa,
    Omega_sel -> omega0 + delta and g_eff -> g / kappa (the uncoupled,
    loss-only limit of the effective coupling)."""
    if kappa <= 0 or g <= 0:
        raise InvalidParameterError("kappa and g must be positive")
    omega_sel = sp.omega0 + delta
    g_eff = g / kappa
    br = _bracket(omega, kappa, sp.bracket_mode)
    return kappa * kappa * sp.hbar * omega_sel / (64.0 * g_eff * g_eff * sp.p_in) * br


@dataclass(eq=False)
class SensitivityCurve:
    """Sweep of S_xx(omega_m) against the shared coupling grid.

    ``sweep_values`` holds g1 / threshold of the gain-loss pair; both systems
    are evaluated at the same absolute g1.  Rows where the gain-loss system
    has no steady state (or sits on a coalescence point) carry NaN and a
    non-"ok" status, never a fabricated number.
    """

    sweep_values: np.ndarray
    s_xx_pt: np.ndarray
    s_xx_single: np.ndarray
    s_xx_ep: np.ndarray
    ratio_pt: np.ndarray
    ratio_ep: np.ndarray
    status: tuple


def _psd_at(sys: CoupledModeSystem, sp: SensitivityParams, omega: float):
    """(value, status) for one sweep point; NaN for unusable points."""
    dec = decompose(sys)
    if dec.phase is Phase.TRANSITION or math.isinf(dec.g_eff):
        return math.nan, "transition"
    if not dec.stable:
        return math.nan, "unstable-amplifying-supermode"
    return displacement_psd(dec, sp, omega), "ok"


def sensitivity_ratio_sweep(
    base: CoupledModeSystem,
    ep_base: CoupledModeSystem,
    mech: MechanicalMode,
    sp: SensitivityParams,
    grid: np.ndarray,
) -> SensitivityCurve:
    """Compare gain-loss and loss-loss transducers against the bare cavity.

    The grid is g1 normalised to the gain-loss pair's coalescence coupling;
    each point evaluates both systems at that same absolute g1 and divides by
    the single-cavity baseline, so the two ratio curves answer "how much
    better than a bare cavity is each pair at this coupling".  The grid must
    not contain the exact coalescence point.
    """
    if base.d1 != ep_base.d1 or base.g != ep_base.g:
        raise InvalidParameterError("the two systems must share d1 and g")
    if ep_base.d2 < 0:
        raise InvalidParameterError("ep_base must be a loss-loss pair (d2 >= 0)")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidParameterError("grid must be a 1-d array with at least two points")

    threshold = ep_threshold(base)
    if threshold <= 0:
        raise InvalidParameterError("gain-loss pair has no positive coalescence coupling")

    omega = mech.omega_m
    s_single = single_cavity_displacement_psd(base.d1, base.delta, base.g, sp, omega)

    n = grid.size
    s_pt = np.empty(n)
    s_ep = np.empty(n)
    status = []
    for i, x in enumerate(grid):
        g1_abs = float(x) * threshold
        pt_val, pt_status = _psd_at(replace(base, g1=g1_abs), sp, omega)
        ep_val, ep_status = _psd_at(replace(ep_base, g1=g1_abs), sp, omega)
        s_pt[i] = pt_val
        s_ep[i] = ep_val
        if pt_status == "ok" and ep_status == "ok":
            status.append("ok")
        elif pt_status != "ok":
            status.append(f"pt:{pt_status}")
        else:
            status.append(f"ep:{ep_status}")

    s_single_arr = np.full(n, s_single)
    return SensitivityCurve(
        sweep_values=grid,
        s_xx_pt=s_pt,
        s_xx_single=s_single_arr,
        s_xx_ep=s_ep,
        ratio_pt=s_pt / s_single,
        ratio_ep=s_ep / s_single,
        status=tuple(status),
    )
