"""Two-mode non-Hermitian coupled-cavity model.

A single value type covers both configurations of interest: a passive cavity
coupled to a gain cavity (d2 < 0) and a passive cavity coupled to a second
lossy cavity (d2 >= 0).  All rates and frequencies are carried in MHz; the
module only ever produces MHz-valued outputs and dimensionless ratios.

The mode-1/mode-2 dynamics matrix (for fields evolving as exp(-i w t)) is

    M = [[delta - i*d1, g1], [g1, delta - i*d2]]

whose eigenvalues are w_pm = delta - i*chi +/- beta with chi = (d1 + d2)/2
and beta = sqrt(g1**2 - dlt**2), dlt = (d1 - d2)/2.  For the gain-loss pair
(d2 = -gamma) these reduce to the familiar chi = (kappa - gamma)/2 and
dlt = (kappa + gamma)/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BalancedGainError,
    InvalidParameterError,
    TransitionSingularityError,
)

__all__ = [
    "Phase",
    "CoupledModeSystem",
    "SupermodeDecomposition",
    "decompose",
    "effective_coupling",
    "ep_threshold",
    "pt_ep_amplification_ratio",
]

#: Default relative tolerance for classifying a system as sitting on the
#: coalescence point.  Exact float equality is never hit in sweeps.
DEFAULT_TRANSITION_TOL = 1e-9


class Phase(enum.Enum):
    """Spectral phase of the coupled pair."""

    PT_SYMMETRIC = "PT_SYMMETRIC"  # split resonances, equal linewidths
    BROKEN = "BROKEN"              # degenerate resonances, split linewidths
    TRANSITION = "TRANSITION"      # eigenfrequencies coalesce


@dataclass(frozen=True)
class CoupledModeSystem:
    """Parameters of the two-mode model.

    Parameters
    ----------
    delta : float
        Common detuning of both modes from the drive (MHz).
    d1 : float
        Damping rate of mode 1, the cavity coupled to the device under
        test (MHz).  Must be positive.
    d2 : float
        Signed damping rate of mode 2 (MHz).  Negative values encode a gain
        cavity, non-negative values a second lossy cavity.
    g1 : float
        Inter-mode coupling strength (MHz).
    g : float
        Coupling strength between mode 1 and the device under test (MHz).
    """

    delta: float
    d1: float
    d2: float
    g1: float
    g: float

    def __post_init__(self) -> None:
        vals = (self.delta, self.d1, self.d2, self.g1, self.g)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError(f"all system parameters must be finite, got {vals}")
        if self.d1 <= 0:
            raise InvalidParameterError(f"d1 must be > 0, got {self.d1}")
        if self.g1 < 0:
            raise InvalidParameterError(f"g1 must be >= 0, got {self.g1}")
        if self.g < 0:
            raise InvalidParameterError(f"g must be >= 0, got {self.g}")

    @property
    def chi(self) -> float:
        """Mean damping (d1 + d2)/2 (MHz)."""
        return 0.5 * (self.d1 + self.d2)

    @property
    def dlt(self) -> float:
        """Damping contrast (d1 - d2)/2 (MHz), the coalescence coupling."""
        return 0.5 * (self.d1 - self.d2)

    def matrix(self) -> np.ndarray:
        """The 2x2 dynamics matrix whose eigenvalues are the supermodes."""
        return np.array(
            [
                [self.delta - 1j * self.d1, self.g1],
                [self.g1, self.delta - 1j * self.d2],
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class SupermodeDecomposition:
    """Eigenstructure of a :class:`CoupledModeSystem`.

    ``omega_plus`` always labels the supermode with the larger resonance
    frequency (split phase) or the smaller decay rate (broken phase); this
    follows from taking ``beta`` on the principal square-root branch.
    Decay rates are ``Gamma_pm = -Im(omega_pm)``; a negative decay rate means
    the supermode amplifies.
    """

    omega_plus: complex
    omega_minus: complex
    beta: complex
    chi: float
    dlt: float
    phase: Phase
    stable: bool
    stability_margin: float
    g_eff: float

    @property
    def Omega_plus(self) -> float:
        return self.omega_plus.real

    @property
    def Omega_minus(self) -> float:
        return self.omega_minus.real

    @property
    def Gamma_plus(self) -> float:
        return -self.omega_plus.imag

    @property
    def Gamma_minus(self) -> float:
        return -self.omega_minus.imag

    @property
    def beta_r(self) -> float:
        """Magnitude of the splitting: |Re beta| in the split phase,
        |Im beta| in the broken phase."""
        return self.beta.real if self.beta.real > 0.0 else self.beta.imag


def decompose(sys: CoupledModeSystem, tol: float = DEFAULT_TRANSITION_TOL) -> SupermodeDecomposition:
    """Compute supermodes, phase label and stability of a coupled pair.

    ``beta = sqrt(g1**2 - dlt**2)`` is taken on the principal branch
    (Re beta >= 0; if Re beta = 0 then Im beta >= 0), which fixes the
    labelling described on :class:`SupermodeDecomposition`.

    Parameters
    ----------
    sys : CoupledModeSystem
    tol : float
        Relative tolerance on |g1 - |dlt|| for the TRANSITION label,
        in (0, 1e-2].

    Raises
    ------
    InvalidParameterError
        If ``tol`` is out of range (system invariants are enforced by the
        type itself).
    """
    if not (0.0 < tol <= 1e-2):
        raise InvalidParameterError(f"tol must be in (0, 1e-2], got {tol}")

    chi = sys.chi
    dlt = sys.dlt
    adlt = abs(dlt)
    g1 = sys.g1

    if g1 == 0.0:
        # Uncoupled limit: recover the bare rates exactly, no sqrt roundoff.
        beta = 1j * adlt
        omega_plus = complex(sys.delta, -min(sys.d1, sys.d2))
        omega_minus = complex(sys.delta, -max(sys.d1, sys.d2))
    else:
        disc = g1 * g1 - dlt * dlt
        beta = complex(np.sqrt(complex(disc, 0.0)))
        center = complex(sys.delta, -chi)
        omega_plus = center + beta
        omega_minus = center - beta

    scale = max(g1, adlt, 1.0)
    if abs(g1 - adlt) <= tol * scale:
        phase = Phase.TRANSITION
    elif g1 > adlt:
        phase = Phase.PT_SYMMETRIC
    else:
        phase = Phase.BROKEN

    gamma_plus = -omega_plus.imag
    gamma_minus = -omega_minus.imag
    margin = min(gamma_plus, gamma_minus)
    stable = gamma_plus > 0.0 and gamma_minus > 0.0

    try:
        g_eff = effective_coupling(sys)
    except TransitionSingularityError:
        g_eff = math.inf

    return SupermodeDecomposition(
        omega_plus=omega_plus,
        omega_minus=omega_minus,
        beta=beta,
        chi=chi,
        dlt=dlt,
        phase=phase,
        stable=stable,
        stability_margin=margin,
        g_eff=g_eff,
    )


def effective_coupling(sys: CoupledModeSystem) -> float:
    """Effective coupling between the supermodes and the device under test.

    Returns ``g / (2 * sqrt(|g1**2 - dlt**2|))``, a dimensionless,
    scale-invariant ratio that diverges as g1 approaches the coalescence
    coupling dlt from either side.

    Raises
    ------
    TransitionSingularityError
        When |g1**2 - dlt**2| is below machine resolution: the value
        diverges and no finite number is meaningful.
    """
    g1sq = sys.g1 * sys.g1
    dltsq = sys.dlt * sys.dlt
    disc = abs(g1sq - dltsq)
    eps = np.finfo(float).eps
    if disc <= eps * max(g1sq, dltsq):
        raise TransitionSingularityError(
            f"g1={sys.g1} sits at the coalescence point (dlt={sys.dlt}); "
            "the effective coupling diverges"
        )
    return sys.g / (2.0 * math.sqrt(disc))


def ep_threshold(sys: CoupledModeSystem) -> float:
    """Coupling value at which the two eigenfrequencies coalesce.

    This is dlt = (d1 - d2)/2: for a loss-loss pair (kappa - kappa1)/2, for
    a gain-loss pair (kappa + gamma)/2.
    """
    return sys.dlt


def pt_ep_amplification_ratio(kappa: float, gamma: float, kappa1: float) -> float:
    """Closed-form ratio of back-action amplification factors, gain-loss
    pair over loss-loss pair: 4 * gamma**2 * (kappa + kappa1) / (kappa - gamma)**3.

    Strictly increasing in gamma at fixed kappa, kappa1; diverges as the
    gain approaches the loss.

    Raises
    ------
    BalancedGainError
        When kappa == gamma (the ratio is infinite).
    InvalidParameterError
        When the preconditions kappa > gamma > 0, kappa1 >= 0 fail.
    """
    if kappa == gamma:
        raise BalancedGainError(
            f"gain exactly balances loss (kappa = gamma = {kappa}); "
            "the amplification ratio diverges"
        )
    if not (kappa > gamma > 0.0):
        raise InvalidParameterError(f"need kappa > gamma > 0, got kappa={kappa}, gamma={gamma}")
    if kappa1 < 0.0:
        raise InvalidParameterError(f"kappa1 must be >= 0, got {kappa1}")
    return 4.0 * gamma * gamma * (kappa + kappa1) / (kappa - gamma) ** 3
