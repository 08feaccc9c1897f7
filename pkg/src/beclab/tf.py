"""Closed-form Thomas-Fermi ground state on the unit disc.

All quantities are the scaled ones (energy and chemical potential carry a
factor ``epsilon**2``); they depend on ``omega = epsilon*Omega`` only.  Two
branches meet at ``omega_h = 4/sqrt(pi)``: below it the density is positive
everywhere, above it a central hole of radius ``R_h = sqrt(1 - omega_h/omega)``
opens and the density grows quadratically outside the hole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .params import Params

OMEGA_HOLE = 4.0 / math.sqrt(math.pi)

DensityEvaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TFSolution:
    """Thomas-Fermi solution at fixed omega.

    ``scaled_energy`` is eps^2 * E_TF and ``scaled_chemical_potential`` is
    eps^2 * mu_TF; both are epsilon-free functions of omega.  ``density`` maps
    radii in [0, 1] (scalar or array) to the normalized TF density.
    """

    omega: float
    scaled_energy: float
    scaled_chemical_potential: float
    hole_radius: float
    density: DensityEvaluator
    omega_h: float = field(default=OMEGA_HOLE)

    @property
    def has_hole(self) -> bool:
        return self.hole_radius > 0.0

    def support_area(self) -> float:
        """Area of the set where the density is positive."""
        return math.pi * (1.0 - self.hole_radius**2)


def _density_no_hole(omega: float) -> DensityEvaluator:
    base = 1.0 / math.pi + omega**2 / 16.0
    slope = omega**2 / 8.0

    def rho(r):
        r = np.asarray(r, dtype=float)
        return np.maximum(base - slope * (1.0 - r * r), 0.0)

    return rho


def _density_hole(omega: float) -> DensityEvaluator:
    peak = omega / (2.0 * math.sqrt(math.pi))
    slope = omega**2 / 8.0

    def rho(r):
        r = np.asarray(r, dtype=float)
        return np.maximum(peak - slope * (1.0 - r * r), 0.0)

    return rho


def solve_tf(omega: float) -> TFSolution:
    """Evaluate the closed forms for energy, chemical potential and density.

    omega = 0 is valid and gives the uniform disc solution with density 1/pi.
    """
    omega = float(omega)
    if not omega >= 0.0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    if omega <= OMEGA_HOLE:
        energy = 1.0 / math.pi - omega**2 / 8.0 - math.pi * omega**4 / 768.0
        mu = 2.0 / math.pi - omega**2 / 8.0
        hole_radius = 0.0
        density = _density_no_hole(omega)
    else:
        energy = -(omega**2 / 4.0) * (1.0 - 8.0 / (3.0 * math.sqrt(math.pi) * omega))
        mu = -(omega**2 / 4.0) * (1.0 - 4.0 / (math.sqrt(math.pi) * omega))
        hole_radius = math.sqrt(1.0 - OMEGA_HOLE / omega)
        density = _density_hole(omega)
    return TFSolution(
        omega=omega,
        scaled_energy=energy,
        scaled_chemical_potential=mu,
        hole_radius=hole_radius,
        density=density,
    )


def tf_energy_unscaled(params: Params) -> float:
    """Ground-state TF energy with the 1/epsilon^2 factor restored."""
    return solve_tf(params.omega).scaled_energy / params.epsilon**2


def regularized_density(tf: TFSolution, Omega: float) -> DensityEvaluator:
    """Density used by the trial states: TF density with the hole edge smoothed.

    For omega <= omega_h the TF density already has finite kinetic energy and
    is returned unchanged.  Otherwise the jump of sqrt(rho) at the hole edge
    is replaced by a quadratic ramp on [R_h, R_h + 1/Omega], matched
    continuously to the TF density at the outer end of the ramp.
    """
    if not Omega > 0.0:
        raise ValueError(f"Omega must be positive, got {Omega}")
    if not tf.has_hole:
        return tf.density
    r_hole = tf.hole_radius
    width = 1.0 / Omega
    if width >= 1.0 - r_hole:
        raise ValueError(
            f"regularization ramp of width 1/Omega={width:.4g} does not fit "
            f"between the hole radius {r_hole:.4g} and the disc boundary"
        )
    junction_value = float(tf.density(r_hole + width))
    ramp_scale = junction_value * Omega**2
    tf_density = tf.density

    def rho(r):
        r = np.asarray(r, dtype=float)
        ramp = ramp_scale * (r - r_hole) ** 2
        out = np.where(r <= r_hole + width, ramp, tf_density(r))
        return np.where(r <= r_hole, 0.0, out)

    return rho


def radial_integral(
    f: Callable[[float], float],
    breakpoints: tuple[float, ...] = (),
) -> float:
    """Integrate ``f`` over the unit disc assuming radial symmetry.

    Adaptive quadrature of ``2*pi*r*f(r)`` on [0, 1]; pass the radii where the
    integrand kinks (hole radius, ramp end) as breakpoints.
    """
    points = sorted(p for p in breakpoints if 0.0 < p < 1.0)
    value, _ = quad(
        lambda r: 2.0 * math.pi * r * float(f(r)),
        0.0,
        1.0,
        points=points or None,
        limit=200,
    )
    return value
