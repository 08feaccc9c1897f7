"""Scalar parameters of the rotating-condensate problem and regime classification.

The two inputs are the coupling scale ``epsilon`` (interaction strength is
``1/epsilon**2``) and the rotational velocity ``Omega``.  Everything else is
derived: ``omega = epsilon*Omega`` controls the Thomas-Fermi profile,
``delta = epsilon**2 * Omega * |log epsilon|`` measures distance to the
giant-vortex transition, and ``gamma = min(epsilon, epsilon**2 * Omega)``
sets the subleading energy scale ``(Omega/2)|log gamma|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Regime(Enum):
    """Rotation regimes, ordered by increasing Omega at fixed epsilon."""

    FEW_VORTEX = "FEW_VORTEX"
    LATTICE_SLOW = "LATTICE_SLOW"
    LATTICE_FAST = "LATTICE_FAST"
    GIANT_VORTEX = "GIANT_VORTEX"


_REGIME_ORDER = {
    Regime.FEW_VORTEX: 0,
    Regime.LATTICE_SLOW: 1,
    Regime.LATTICE_FAST: 2,
    Regime.GIANT_VORTEX: 3,
}


@dataclass(frozen=True)
class Params:
    """Immutable bundle of physical and derived parameters.

    Attributes
    ----------
    epsilon : float
        Coupling scale, strictly inside (0, 1).
    Omega : float
        Rotational velocity, >= 0 (0 means no rotation).
    omega : float
        epsilon * Omega.
    delta : float
        epsilon**2 * Omega * |log epsilon|.
    gamma : float
        min(epsilon, epsilon**2 * Omega).
    log_eps_abs : float
        |log epsilon| (natural logarithm).
    """

    epsilon: float
    Omega: float
    omega: float
    delta: float
    gamma: float
    log_eps_abs: float


@dataclass(frozen=True)
class RegimeReport:
    """Classification result plus the thresholds used to obtain it.

    ``boundaries`` are the three Omega values separating the regimes
    (few-vortex/lattice, slow/fast lattice, lattice/giant-vortex), so a
    caller can display how far a parameter point sits from each boundary.
    """

    tag: Regime
    boundaries: tuple[float, float, float]

    @property
    def order(self) -> int:
        return _REGIME_ORDER[self.tag]


def derive(epsilon: float, Omega: float) -> Params:
    """Validate (epsilon, Omega) and populate all derived quantities.

    Omega = 0 is accepted (zero rotation: omega = delta = gamma = 0); the
    asymptotic ratio diagnostics degenerate there and callers mark them NA.
    """
    epsilon = float(epsilon)
    Omega = float(Omega)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie strictly in (0, 1), got {epsilon}")
    if not Omega >= 0.0 or not math.isfinite(Omega):
        raise ValueError(f"Omega must be finite and >= 0, got {Omega}")
    log_eps_abs = abs(math.log(epsilon))
    return Params(
        epsilon=epsilon,
        Omega=Omega,
        omega=epsilon * Omega,
        delta=epsilon**2 * Omega * log_eps_abs,
        gamma=min(epsilon, epsilon**2 * Omega),
        log_eps_abs=log_eps_abs,
    )


def classify(
    params: Params,
    constants: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> RegimeReport:
    """Assign a rotation regime with explicit threshold constants.

    The asymptotic conditions carry no constants, so deterministic
    classification needs them pinned: with ``(c_low, c_mid, c_high)`` the
    thresholds are ``c_low*|log eps|``, ``c_mid/eps`` and
    ``c_high/(eps**2 |log eps|)``.  First matching threshold wins, which
    keeps the tag monotone in Omega even for unusual constants.
    """
    c_low, c_mid, c_high = constants
    if min(c_low, c_mid, c_high) <= 0:
        raise ValueError("classification constants must be positive")
    eps = params.epsilon
    t_low = c_low * params.log_eps_abs
    t_mid = c_mid / eps
    t_high = c_high / (eps**2 * params.log_eps_abs)
    if params.Omega <= t_low:
        tag = Regime.FEW_VORTEX
    elif params.Omega <= t_mid:
        tag = Regime.LATTICE_SLOW
    elif params.Omega < t_high:
        tag = Regime.LATTICE_FAST
    else:
        tag = Regime.GIANT_VORTEX
    return RegimeReport(tag=tag, boundaries=(t_low, t_mid, t_high))
