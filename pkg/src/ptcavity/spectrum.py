"""Frequency-domain steady-state spectra of the driven coupled pair.

Three layers live here:

* the background response of mode 1 to a probe at offset ``w`` from the
  drive, with the device under test decoupled;
* the sideband ladder: Fourier coefficients a_n, c_n of the steady state at
  offsets n*omega_m under the prescribed periodic displacement, obtained by
  solving the banded linear system that the equations of motion impose on
  the coefficients;
* rendered composite spectra (carrier plus mechanical sidebands) and simple
  peak analysis on them.

Spectra are intracavity |a|^2, normalised to unit peak by default; drive
port structure is deliberately not modelled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .errors import (
    DegenerateReferenceError,
    InstabilityError,
    InvalidParameterError,
    ResolutionError,
)
from .model import CoupledModeSystem, decompose

__all__ = [
    "MechanicalMode",
    "SidebandLadder",
    "SpectrumComponent",
    "SpectrumResult",
    "Normalization",
    "Peak",
    "background_spectrum",
    "sideband_ladder",
    "composite_spectrum",
    "amplification_factor",
    "peak_analysis",
    "default_background_grid",
    "default_transducer_grid",
    "single_cavity_reference",
]

#: Default number of grid points: 2**4 * 10**3 + 1.
DEFAULT_GRID_POINTS = 16001

#: Default ladder truncation order.
DEFAULT_LADDER_ORDER = 5

#: |a_N| / |a_0| above this flags the truncation order as too small.
TRUNCATION_WARN_RATIO = 1e-8


class Normalization(enum.Enum):
    RAW = "RAW"
    PEAK_UNIT = "PEAK_UNIT"


@dataclass(frozen=True)
class MechanicalMode:
    """Mechanical device under test with prescribed classical motion.

    z(t) = z0 * cos(omega_m t + phase); z0 is dimensionless, in units where
    g * z0 is a rate in MHz.
    """

    omega_m: float
    gamma_m: float
    z0: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.omega_m, self.gamma_m, self.z0, self.phase)):
            raise InvalidParameterError("mechanical parameters must be finite")
        if self.omega_m <= 0:
            raise InvalidParameterError(f"omega_m must be > 0, got {self.omega_m}")
        if self.gamma_m <= 0:
            raise InvalidParameterError(f"gamma_m must be > 0, got {self.gamma_m}")
        if self.z0 < 0:
            raise InvalidParameterError(f"z0 must be >= 0, got {self.z0}")


@dataclass(eq=False)
class SidebandLadder:
    """Steady-state Fourier coefficients at offsets n*omega_m, |n| <= order."""

    order: int
    a: np.ndarray
    c: np.ndarray
    eps: float
    residual: float
    truncation_warning: bool
    sys: CoupledModeSystem
    mech: MechanicalMode

    def a_coeff(self, n: int) -> complex:
        return complex(self.a[n + self.order])

    def c_coeff(self, n: int) -> complex:
        return complex(self.c[n + self.order])

    def power(self, n: int) -> float:
        """|a_n|^2."""
        return abs(self.a_coeff(n)) ** 2

    def contrast(self, n: int = 1) -> float:
        """Sideband-to-carrier power ratio |a_n / a_0|^2."""
        a0 = self.a_coeff(0)
        if abs(a0) == 0.0:
            raise DegenerateReferenceError("carrier amplitude a_0 is zero")
        return abs(self.a_coeff(n) / a0) ** 2


@dataclass(frozen=True)
class SpectrumComponent:
    label: str
    order: int | None
    values: np.ndarray


@dataclass(eq=False)
class SpectrumResult:
    """A frequency grid with total spectrum values and labelled components."""

    grid: np.ndarray
    values: np.ndarray
    components: tuple
    normalization: Normalization

    def component(self, label: str) -> SpectrumComponent:
        for comp in self.components:
            if comp.label == label:
                return comp
        raise KeyError(label)

    def sideband(self, n: int) -> SpectrumComponent:
        return self.component(f"SIDEBAND({n:+d})")

    @property
    def background(self) -> SpectrumComponent:
        return self.component("BACKGROUND")


def default_background_grid(
    sys: CoupledModeSystem, points: int = DEFAULT_GRID_POINTS, span: float = 3.0
) -> np.ndarray:
    """Probe-offset grid spanning ``delta +- span*d1``."""
    return np.linspace(sys.delta - span * sys.d1, sys.delta + span * sys.d1, points)


def default_transducer_grid(
    mech: MechanicalMode, points: int = DEFAULT_GRID_POINTS, span: float = 4.0
) -> np.ndarray:
    """Offset grid spanning ``+- span*omega_m`` around the drive."""
    return np.linspace(-span * mech.omega_m, span * mech.omega_m, points)


def _check_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidParameterError("grid must be a 1-d array with at least two points")
    if not np.all(np.diff(grid) > 0):
        raise InvalidParameterError("grid must be strictly increasing")
    return grid


def _require_stable(sys: CoupledModeSystem, allow_unstable: bool, context: str):
    dec = decompose(sys)
    if not dec.stable and not allow_unstable:
        worst = "omega_plus" if dec.Gamma_plus <= dec.Gamma_minus else "omega_minus"
        rate = min(dec.Gamma_plus, dec.Gamma_minus)
        raise InstabilityError(
            f"{context}: supermode {worst} amplifies (decay rate {rate:.6g} MHz <= 0), "
            "no steady state exists; pass allow_unstable=True for the formal "
            "linear response"
        )
    return dec


def mode1_response(sys: CoupledModeSystem, w, eps: float = 1.0) -> np.ndarray:
    """Steady-state amplitude of mode 1 for a probe at offset ``w`` from the
    drive frame, with the device under test decoupled (g = 0)."""
    w = np.asarray(w, dtype=float)
    s = 1j * (sys.delta - w)
    num = eps * (s + sys.d2)
    den = (s + sys.d1) * (s + sys.d2) + sys.g1 * sys.g1
    return num / den


def _normalize(grid, total, components, normalization):
    if normalization is Normalization.PEAK_UNIT:
        peak = float(total.max())
        if peak <= 0.0:
            raise InvalidParameterError("cannot peak-normalise an all-zero spectrum")
        total = total / peak
        components = tuple(
            SpectrumComponent(c.label, c.order, c.values / peak) for c in components
        )
    return SpectrumResult(
        grid=grid, values=total, components=components, normalization=normalization
    )


def background_spectrum(
    sys: CoupledModeSystem,
    grid: np.ndarray | None = None,
    eps: float = 1.0,
    normalization: Normalization = Normalization.PEAK_UNIT,
    allow_unstable: bool = False,
) -> SpectrumResult:
    """Background spectrum |a_0(w)|^2 of the probe response.

    For an amplifying system the steady state does not exist physically;
    ``allow_unstable=True`` returns the formal linear response instead of
    raising, which is how broken-phase background curves are produced.
    """
    _require_stable(sys, allow_unstable, "background spectrum")
    if grid is None:
        grid = default_background_grid(sys)
    grid = _check_grid(grid)
    values = np.abs(mode1_response(sys, grid, eps)) ** 2
    comp = (SpectrumComponent("BACKGROUND", None, values.copy()),)
    return _normalize(grid, values, comp, normalization)


def sideband_ladder(
    sys: CoupledModeSystem,
    mech: MechanicalMode,
    eps: float = 1.0,
    order: int = DEFAULT_LADDER_ORDER,
    allow_unstable: bool = False,
) -> SidebandLadder:
    """Solve the steady-state recurrence for the Fourier coefficients.

    Inserting a(t) = sum_n a_n exp(-i n omega_m t) (and likewise c) into the
    equations of motion under z(t) = z0 cos(omega_m t) gives, per offset n,

        (-i n omega_m + i delta + d1) a_n + i g1 c_n
            + i (g z0 / 2) (a_{n-1} + a_{n+1}) = eps delta_{n0}
        (-i n omega_m + i delta + d2) c_n + i g1 a_n = 0

    with a_{+-(order+1)} = 0.  The interleaved unknowns form a banded system
    with two sub/super-diagonals, solved directly; the residual against the
    assembled system is checked and stored.
    """
    if order < 2:
        raise InvalidParameterError(f"ladder order must be >= 2, got {order}")
    k = sys.g * mech.z0 / 2.0
    if sys.g * mech.z0 >= sys.g1 + abs(sys.chi):
        raise InvalidParameterError(
            f"drive too strong for the perturbative ladder: g*z0 = {sys.g * mech.z0:.6g} "
            f"is not below g1 + |chi| = {sys.g1 + abs(sys.chi):.6g}"
        )
    _require_stable(sys, allow_unstable, "sideband ladder")

    m = 2 * order + 1
    size = 2 * m
    lower = upper = 2
    ab = np.zeros((lower + upper + 1, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)

    def band_set(row: int, col: int, value: complex) -> None:
        ab[upper + row - col, col] = value

    for n in range(-order, order + 1):
        ia = 2 * (n + order)
        ic = ia + 1
        d_common = -1j * n * mech.omega_m + 1j * sys.delta
        band_set(ia, ia, d_common + sys.d1)
        band_set(ia, ic, 1j * sys.g1)
        band_set(ic, ia, 1j * sys.g1)
        band_set(ic, ic, d_common + sys.d2)
        if k != 0.0:
            if n - 1 >= -order:
                band_set(ia, ia - 2, 1j * k)
            if n + 1 <= order:
                band_set(ia, ia + 2, 1j * k)
    rhs[2 * order] = eps

    x = scipy.linalg.solve_banded((lower, upper), ab, rhs)

    # residual of the assembled banded system
    full = np.zeros((size, size), dtype=complex)
    for col in range(size):
        for row in range(max(0, col - upper), min(size, col + lower + 1)):
            full[row, col] = ab[upper + row - col, col]
    resid = float(np.linalg.norm(full @ x - rhs))
    rhs_norm = float(np.linalg.norm(rhs))
    residual = resid / rhs_norm if rhs_norm > 0 else resid

    a = x[0::2]
    c = x[1::2]
    a0 = abs(a[order])
    trunc = a0 > 0 and (abs(a[0]) / a0 > TRUNCATION_WARN_RATIO or abs(a[-1]) / a0 > TRUNCATION_WARN_RATIO)
    return SidebandLadder(
        order=order,
        a=a,
        c=c,
        eps=eps,
        residual=residual,
        truncation_warning=bool(trunc),
        sys=sys,
        mech=mech,
    )


def composite_spectrum(
    ladder: SidebandLadder,
    grid: np.ndarray | None = None,
    normalization: Normalization = Normalization.PEAK_UNIT,
) -> SpectrumResult:
    """Render the ladder as carrier plus sideband lines.

    Line n carries weight |a_n|^2 on a unit-area Lorentzian centred at
    n*omega_m.  The carrier line takes the half-width of the least-damped
    supermode (the narrowed background); mechanical sidebands take the
    mechanical half-width gamma_m.  The stated widths are a stand-in for the
    detection form factor, which is not modelled.
    """
    sys = ladder.sys
    mech = ladder.mech
    dec = decompose(sys)
    gamma_bg = dec.stability_margin
    if gamma_bg <= 0.0:
        raise InstabilityError(
            "composite spectrum undefined: least-damped supermode does not decay"
        )
    if grid is None:
        grid = default_transducer_grid(mech)
    grid = _check_grid(grid)

    total = np.zeros_like(grid)
    components = []
    for n in range(-ladder.order, ladder.order + 1):
        weight = ladder.power(n)
        width = gamma_bg if n == 0 else mech.gamma_m
        center = n * mech.omega_m
        vals = weight * (width / math.pi) / ((grid - center) ** 2 + width * width)
        label = "BACKGROUND" if n == 0 else f"SIDEBAND({n:+d})"
        components.append(SpectrumComponent(label, n, vals))
        total = total + vals
    return _normalize(grid, total, tuple(components), normalization)


def single_cavity_reference(sys: CoupledModeSystem) -> CoupledModeSystem:
    """Mode 1 alone: same d1 and g, inter-mode coupling removed.  Mode 2 is
    replaced by an inert spectator (d2 = d1) so the reference is stable."""
    return CoupledModeSystem(delta=sys.delta, d1=sys.d1, d2=sys.d1, g1=0.0, g=sys.g)


def amplification_factor(
    sys: CoupledModeSystem,
    mech: MechanicalMode,
    eps: float = 1.0,
    order: int = DEFAULT_LADDER_ORDER,
    allow_unstable: bool = False,
) -> float:
    """Back-action amplification relative to the bare cavity.

    Defined operationally as the sideband-to-carrier contrast |a_1/a_0|^2 of
    the coupled system divided by the same contrast for the single-cavity
    reference with identical d1, g, z0, omega_m.  Exactly 1 at g1 = 0, and
    independent of eps (the response is linear in the drive).
    """
    if mech.z0 <= 0.0:
        raise DegenerateReferenceError("z0 = 0: no sidebands, amplification undefined")
    ladder = sideband_ladder(sys, mech, eps=eps, order=order, allow_unstable=allow_unstable)
    ref_sys = single_cavity_reference(sys)
    ref = sideband_ladder(ref_sys, mech, eps=eps, order=order)
    ref_power = ref.power(1)
    if ref_power < 1e-300:
        raise DegenerateReferenceError(
            f"reference sideband power {ref_power:.3g} is numerically zero"
        )
    return ladder.contrast(1) / ref.contrast(1)


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


def _interp_crossing(x0, y0, x1, y1, target):
    if y1 == y0:
        return x0
    return x0 + (target - y0) * (x1 - x0) / (y1 - y0)


def peak_analysis(spec: SpectrumResult, prominence: float = 1e-3) -> list:
    """Locate local maxima and measure their width at half maximum.

    Peaks are local maxima whose prominence exceeds ``prominence`` times the
    global maximum.  Positions and heights are refined by parabolic
    interpolation through the three samples around each maximum; half-maximum
    crossings are linearly interpolated.

    Raises
    ------
    ResolutionError
        If a detected peak spans fewer than 5 grid points at half maximum.
    """
    values = np.asarray(spec.values, dtype=float)
    grid = np.asarray(spec.grid, dtype=float)
    peak_val = float(values.max())
    if peak_val <= 0.0:
        return []
    idx, _props = scipy.signal.find_peaks(values, prominence=prominence * peak_val)
    peaks = []
    for i in idx:
        # parabolic refinement of position and height
        y0, y1, y2 = values[i - 1], values[i], values[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            shift = 0.5 * (y0 - y2) / denom
            shift = float(np.clip(shift, -0.5, 0.5))
        else:
            shift = 0.0
        dx_local = 0.5 * (grid[min(i + 1, grid.size - 1)] - grid[max(i - 1, 0)])
        position = grid[i] + shift * dx_local
        height = y1 - 0.25 * (y0 - y2) * shift
        half = 0.5 * height

        jl = i
        while jl > 0 and values[jl] > half:
            jl -= 1
        jr = i
        while jr < values.size - 1 and values[jr] > half:
            jr += 1
        if values[jl] > half or values[jr] > half:
            raise ResolutionError(
                f"half-maximum of the peak near {position:.6g} falls outside the grid"
            )
        left = _interp_crossing(grid[jl], values[jl], grid[jl + 1], values[jl + 1], half)
        right = _interp_crossing(grid[jr - 1], values[jr - 1], grid[jr], values[jr], half)
        if jr - jl < 5:
            raise ResolutionError(
                f"peak near {position:.6g} spans only {jr - jl} grid points; "
                "grid too coarse for a reliable width"
            )
        peaks.append(Peak(position=float(position), height=float(height), fwhm=float(right - left)))
    return peaks
