"""Dimensionless reductions, special time functions and thermal statistics.

Every dynamics routine in this package works in scaled units: time is
measured in units of 1/omega_m (so the scaled time is omega_m * t_physical)
and the coupling enters through the dimensionless k = g0/omega_m. Conversion
to and from SI quantities happens only at the outer boundaries, i.e. in the
experiment designer and the command line layer.

The three special functions of scaled time used throughout are

    eta(t)   = 1 - exp(-i t)
    big_b(t) = -k**2 * (t - sin t)
    xi(t)    = exp(i t) * eta(t) = -conj(eta(t))

All three accept numpy arrays as well as scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhysicalConstants",
    "CODATA2018",
    "SystemParams",
    "ThermalSpec",
    "eta",
    "big_b",
    "xi",
    "thermal_occupation",
    "x_zpf",
    "energy_eigenvalue",
    "energy_eigenvalue_scaled",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants, CODATA 2018 values."""

    hbar: float = 1.054571817e-34        # J s
    k_B: float = 1.380649e-23            # J / K
    c: float = 299792458.0               # m / s
    epsilon_0: float = 8.8541878128e-12  # F / m


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class SystemParams:
    """Mode frequencies and the bare optomechanical coupling, all angular [rad/s].

    Derived dimensionless numbers: k = g0/omega_m, r_a = omega_a/omega_m,
    r_b = omega_b/omega_m. g0 = 0 is allowed so that uncoupled reference
    cases can be represented.
    """

    omega_a: float
    omega_b: float
    omega_m: float
    g0: float

    def __post_init__(self) -> None:
        for name in ("omega_a", "omega_b", "omega_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.g0) and self.g0 >= 0):
            raise ValueError(f"g0 must be non-negative and finite, got {self.g0!r}")

    @property
    def k(self) -> float:
        return self.g0 / self.omega_m

    @property
    def r_a(self) -> float:
        return self.omega_a / self.omega_m

    @property
    def r_b(self) -> float:
        return self.omega_b / self.omega_m

    @classmethod
    def from_dimensionless(cls, k: float, r_a: float, r_b: float) -> "SystemParams":
        """Build params with omega_m = 1 so scaled and physical time coincide."""
        return cls(omega_a=r_a, omega_b=r_b, omega_m=1.0, g0=k)


@dataclass(frozen=True)
class ThermalSpec:
    """Mean thermal occupation of the mechanical mode."""

    nbar: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise ValueError(f"nbar must be non-negative, got {self.nbar!r}")

    @classmethod
    def from_temperature(
        cls, T: float, omega_m: float, constants: PhysicalConstants = CODATA2018
    ) -> "ThermalSpec":
        return cls(nbar=thermal_occupation(T, omega_m, constants))


def eta(t):
    """eta(t) = 1 - exp(-i t).  Satisfies |eta(t)|**2 = 2(1 - cos t)."""
    return 1.0 - np.exp(-1j * np.asarray(t, dtype=float))


def big_b(t, k):
    """B(t) = -k**2 (t - sin t), the slow nonlinear phase."""
    t = np.asarray(t, dtype=float)
    return -(k ** 2) * (t - np.sin(t))


def xi(t):
    """xi(t) = exp(i t) eta(t); identically equal to -conj(eta(t))."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * t) * (1.0 - np.exp(-1j * t))


def thermal_occupation(
    T: float, omega_m: float, constants: PhysicalConstants = CODATA2018
) -> float:
    """Bose-Einstein mean occupation 1/(exp(hbar omega_m / kB T) - 1).

    T is in kelvin, omega_m in rad/s. Raises on non-positive inputs.
    Very small T underflows cleanly to 0.0.
    """
    if not (T > 0):
        raise ValueError(f"temperature must be positive, got {T!r}")
    if not (omega_m > 0):
        raise ValueError(f"omega_m must be positive, got {omega_m!r}")
    x = constants.hbar * omega_m / (constants.k_B * T)
    with np.errstate(over="ignore"):
        return float(1.0 / np.expm1(x))


def x_zpf(m: float, omega_m: float, constants: PhysicalConstants = CODATA2018) -> float:
    """Zero-point position spread sqrt(hbar / (2 m omega_m)) in meters."""
    if not (m > 0):
        raise ValueError(f"mass must be positive, got {m!r}")
    if not (omega_m > 0):
        raise ValueError(f"omega_m must be positive, got {omega_m!r}")
    return math.sqrt(constants.hbar / (2.0 * m * omega_m))


def energy_eigenvalue_scaled(n: int, m: int, l: int, k: float, r_a: float, r_b: float) -> float:
    """Eigenenergy in units of hbar*omega_m: r_a n + r_b m + l - k**2 (n - m)**2."""
    if n < 0 or m < 0 or l < 0:
        raise ValueError(f"quantum numbers must be non-negative, got {(n, m, l)}")
    return r_a * n + r_b * m + l - k ** 2 * (n - m) ** 2


def energy_eigenvalue(
    n: int, m: int, l: int, p: SystemParams, constants: PhysicalConstants = CODATA2018
) -> float:
    """Joint eigenenergy in joules.

    E = hbar (omega_a n + omega_b m + omega_m l) - hbar omega_m k**2 (n - m)**2.
    The last term is the photon-number conditioned shift of the displaced
    mechanical oscillator.
    """
    scaled = energy_eigenvalue_scaled(n, m, l, p.k, p.r_a, p.r_b)
    return constants.hbar * p.omega_m * scaled
