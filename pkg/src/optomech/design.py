"""SI-unit feasibility calculators and a grid-search design optimizer.

Two physical backends produce the bare coupling g0: a trapped ultracold
atomic ensemble dispersively coupled to the two cavity modes, and a
levitated dielectric nanoparticle. On top of those sit the cavity
linewidth/photon-lifetime calculator, the entanglement-period estimate,
a heating budget, and a grid search that minimizes the ratio of
entanglement period to photon lifetime over cavity length, atom number and
trap frequency.

Atomic constants that the coupling formula needs but that are not uniquely
fixed by the physics (dipole moment, detuning) are explicit configuration
inputs. Their defaults are for the 87Rb D2 line, with the detuning
calibrated once against CALIBRATION_REFERENCE below so that the reference
configuration reproduces its known coupling; everything downstream of that
single anchor is prediction, not fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import CODATA2018, PhysicalConstants, x_zpf
from .duan import K_REGIME_BOUNDARY

__all__ = [
    "CavityGeometry",
    "AtomEnsembleSpec",
    "NanoparticleSpec",
    "HeatingBudget",
    "DesignReport",
    "DesignSearchSpace",
    "OptimizeResult",
    "RB87_MASS_KG",
    "RB87_D2_WAVELENGTH_M",
    "RB87_D2_DIPOLE_CM",
    "DEFAULT_DETUNING_RAD_S",
    "CALIBRATION_REFERENCE",
    "cavity_linewidth",
    "atom_coupling",
    "nanoparticle_coupling",
    "entanglement_period",
    "heating_budget",
    "design_report",
    "optimize_design",
    "proposed_atom_spec",
    "proposed_geometry",
]

# ---------------------------------------------------------------------------
# BLOCK: atomic constants (87Rb D2 line)
# ---------------------------------------------------------------------------
RB87_MASS_KG = 1.44316e-25          # 86.909 u
RB87_D2_WAVELENGTH_M = 780.0e-9
RB87_D2_DIPOLE_CM = 3.584e-29       # reduced dipole matrix element, 4.227 e*a0
# Cavity-atom detuning, order 2*pi x 32 GHz. Fixed by requiring that
# CALIBRATION_REFERENCE below reproduce k = 9.50; see that constant.
DEFAULT_DETUNING_RAD_S = 2.0297e11

#: Reference ultracold-atom configuration used to pin the detuning default.
#: With the constants above, atom_coupling reproduces k = g0/omega_m = 9.50
#: here to better than 0.1%.
CALIBRATION_REFERENCE = {
    "N": 1.0e5,
    "omega_m_rad_per_s": 2.0 * math.pi * 40.0e3,
    "L_m": 194.0e-6,
    "R_mirror_m": 5.0e-2,
    "k_expected": 9.50,
}


@dataclass(frozen=True)
class CavityGeometry:
    """Symmetric two-mirror cavity: length, mirror curvature radius, finesse, wavelength."""

    L: float
    R_mirror: float
    finesse: float
    lambda_a: float = RB87_D2_WAVELENGTH_M

    def __post_init__(self) -> None:
        if not (0.0 < self.L < 2.0 * self.R_mirror):
            raise ValueError(
                f"need 0 < L < 2 R_mirror for a real waist, got L={self.L!r}, "
                f"R_mirror={self.R_mirror!r}"
            )
        if not (self.finesse > 1.0):
            raise ValueError(f"finesse must exceed 1, got {self.finesse!r}")
        if not (self.lambda_a > 0.0):
            raise ValueError(f"lambda_a must be positive, got {self.lambda_a!r}")

    @property
    def nu_fsr(self) -> float:
        """Free spectral range c/2L in Hz."""
        return CODATA2018.c / (2.0 * self.L)

    @property
    def waist(self) -> float:
        """Gaussian mode waist sqrt((lambda/2pi) sqrt(L (2R - L)))."""
        return math.sqrt(
            (self.lambda_a / (2.0 * math.pi)) * math.sqrt(self.L * (2.0 * self.R_mirror - self.L))
        )

    @property
    def mode_volume(self) -> float:
        """V_c = pi w**2 L."""
        return math.pi * self.waist ** 2 * self.L


@dataclass(frozen=True)
class AtomEnsembleSpec:
    """Trapped atomic ensemble: count, single-atom mass, trap frequency, optical constants."""

    N: float
    m_atom: float = RB87_MASS_KG
    omega_m: float = 2.0 * math.pi * 95.0e3
    Delta_ca: float = DEFAULT_DETUNING_RAD_S
    d: float = RB87_D2_DIPOLE_CM
    Gamma: float = 2.0 * math.pi * 1.0e3
    T: float = 0.8e-6

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"need at least one atom, got N={self.N!r}")
        for name in ("m_atom", "omega_m", "d", "Gamma", "T"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.Delta_ca == 0:
            raise ValueError("Delta_ca must be non-zero")


@dataclass(frozen=True)
class NanoparticleSpec:
    """Levitated dielectric sphere: radius, refractive index, mass, cavity mode volume, wavenumber."""

    r: float
    n_p: float
    m: float
    V_i: float
    k_i: float

    def __post_init__(self) -> None:
        if not (self.r > 0):
            raise ValueError(f"radius must be positive, got {self.r!r}")
        if not (self.n_p > 1):
            raise ValueError(f"refractive index must exceed 1, got {self.n_p!r}")
        for name in ("m", "V_i", "k_i"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    @property
    def polarizability(self) -> float:
        """Clausius-Mossotti polarizability 4 pi eps0 r**3 (n**2-1)/(n**2+2)."""
        n2 = self.n_p ** 2
        return 4.0 * math.pi * CODATA2018.epsilon_0 * self.r ** 3 * (n2 - 1.0) / (n2 + 2.0)


@dataclass(frozen=True)
class HeatingBudget:
    """Backaction (r_c) and spontaneous-emission (r_fs) heating figures.

    The primary fields use the literal product grouping of the published
    symbol string (hbar k_p)^2/m * g0^2 * nbar_cav * Gamma/Delta_ca, which
    is dimensionally an energy times squared frequency and is reported
    as-is. The *_alt fields use the recoil-power grouping
    (hbar k_p)^2/m * (g0/Delta_ca)^2 * nbar_cav * Gamma, which is a power
    and yields a dimensionless energy_ratio. The ratio r_c/r_fs is the same
    dimensionless number under both groupings.
    """

    r_fs: float
    r_c: float
    energy_ratio: float
    r_fs_alt: float
    r_c_alt: float
    energy_ratio_alt: float

    @property
    def backaction_dominates(self) -> bool:
        return self.r_c > self.r_fs


@dataclass(frozen=True)
class DesignReport:
    """Derived feasibility quantities for one physical design."""

    g0: float
    k: float
    kappa: float
    tau_p: float
    tau_e: float
    ratio: float
    min_finesse_for_unity_ratio: float
    heating: HeatingBudget | None = None


def cavity_linewidth(geom: CavityGeometry) -> tuple[float, float]:
    """(kappa, photon lifetime): kappa = nu_FSR / finesse in 1/s, tau_p = 1/kappa."""
    kappa = geom.nu_fsr / geom.finesse
    return kappa, 1.0 / kappa


def atom_coupling(spec: AtomEnsembleSpec, geom: CavityGeometry) -> float:
    """Collective dispersive coupling g0 in rad/s.

    g0 = k_a N (alpha0**2 / Delta_ca) sin(2 k_a z0) sqrt(hbar / 2 N m omega_m)
    with alpha0**2 = d**2 omega_c / (2 hbar eps0 V_c) and the ensemble placed
    at the maximal-gradient point, sin(2 k_a z0) = 1.
    """
    hbar = CODATA2018.hbar
    k_a = 2.0 * math.pi / geom.lambda_a
    omega_c = 2.0 * math.pi * CODATA2018.c / geom.lambda_a
    alpha0_sq = spec.d ** 2 * omega_c / (2.0 * hbar * CODATA2018.epsilon_0 * geom.mode_volume)
    x_zpf_collective = math.sqrt(hbar / (2.0 * spec.N * spec.m_atom * spec.omega_m))
    return k_a * spec.N * (alpha0_sq / spec.Delta_ca) * x_zpf_collective


def nanoparticle_coupling(spec: NanoparticleSpec, omega_m: float) -> float:
    """Dispersive coupling g0 = U_0 k_i x_zpf for a levitated sphere, in rad/s.

    U_0 = omega alpha_pol / (2 eps0 V_i) is the single-photon optical
    potential depth, with omega = c k_i the optical frequency.
    """
    if not (omega_m > 0):
        raise ValueError(f"omega_m must be positive, got {omega_m!r}")
    omega_opt = CODATA2018.c * spec.k_i
    u0 = omega_opt * spec.polarizability / (2.0 * CODATA2018.epsilon_0 * spec.V_i)
    return u0 * spec.k_i * x_zpf(spec.m, omega_m)


def entanglement_period(k: float, omega_m: float) -> float:
    """Time to the first entanglement-envelope recurrence, in seconds.

    pi/(omega_m k**2) below the regime boundary k = 1/sqrt 2, 2 pi/omega_m at
    and above it.
    """
    if not (k > 0):
        raise ValueError(f"k must be positive, got {k!r}")
    if not (omega_m > 0):
        raise ValueError(f"omega_m must be positive, got {omega_m!r}")
    if k < K_REGIME_BOUNDARY:
        return math.pi / (omega_m * k ** 2)
    return 2.0 * math.pi / omega_m


def heating_budget(
    spec: AtomEnsembleSpec,
    geom: CavityGeometry,
    nbar_cav: float = 0.25,
    k_p: float | None = None,
) -> HeatingBudget:
    """Heating figures for the atomic ensemble; see HeatingBudget for the two groupings."""
    if nbar_cav < 0:
        raise ValueError(f"nbar_cav must be non-negative, got {nbar_cav!r}")
    if k_p is None:
        k_p = 2.0 * math.pi / geom.lambda_a
    g0 = atom_coupling(spec, geom)
    kappa, tau_p = cavity_linewidth(geom)
    kappa_angular = 2.0 * math.pi * kappa
    recoil_like = (CODATA2018.hbar * k_p) ** 2 / spec.m_atom
    r_fs = recoil_like * g0 ** 2 * nbar_cav * spec.Gamma / spec.Delta_ca
    backaction_gain = spec.N * g0 ** 2 / (4.0 * spec.Gamma * kappa_angular)
    r_c = backaction_gain * r_fs
    thermal_energy = CODATA2018.k_B * spec.T
    r_fs_alt = recoil_like * (g0 / spec.Delta_ca) ** 2 * nbar_cav * spec.Gamma
    r_c_alt = backaction_gain * r_fs_alt
    return HeatingBudget(
        r_fs=r_fs,
        r_c=r_c,
        energy_ratio=r_c * tau_p / thermal_energy,
        r_fs_alt=r_fs_alt,
        r_c_alt=r_c_alt,
        energy_ratio_alt=r_c_alt * tau_p / thermal_energy,
    )


def design_report(
    spec: AtomEnsembleSpec,
    geom: CavityGeometry,
    *,
    nbar_cav: float = 0.25,
    k_p: float | None = None,
    with_heating: bool = True,
) -> DesignReport:
    """Assemble the derived feasibility quantities for one atom-ensemble design."""
    g0 = atom_coupling(spec, geom)
    k = g0 / spec.omega_m
    kappa, tau_p = cavity_linewidth(geom)
    tau_e = entanglement_period(k, spec.omega_m)
    ratio = tau_e / tau_p
    heating = heating_budget(spec, geom, nbar_cav, k_p) if with_heating else None
    return DesignReport(
        g0=g0,
        k=k,
        kappa=kappa,
        tau_p=tau_p,
        tau_e=tau_e,
        ratio=ratio,
        # ratio scales as 1/finesse at fixed geometry and tau_e never depends
        # on finesse, so the unity-ratio finesse follows exactly
        min_finesse_for_unity_ratio=geom.finesse * ratio,
        heating=heating,
    )


def proposed_atom_spec() -> AtomEnsembleSpec:
    """The proposed ultracold-atom operating point."""
    return AtomEnsembleSpec(N=5.43e5, omega_m=2.0 * math.pi * 95.0e3)


def proposed_geometry(finesse: float = 3.0e6) -> CavityGeometry:
    """The proposed cavity: L = 783 um, R = 5 cm, 780 nm."""
    return CavityGeometry(L=783.0e-6, R_mirror=5.0e-2, finesse=finesse)


@dataclass(frozen=True)
class DesignSearchSpace:
    """Grid-search domain for optimize_design. R_mirror is fixed per run.

    The coupling must avoid the bands |k - sqrt(n/2)| <= exclusion_halfwidth
    (n = 1..exclusion_n_max), where the optical witness becomes inconclusive.
    Because the objective is nearly flat along the feasibility frontier, all
    candidates within plateau_rtol of the best ratio are treated as ties and
    the lexicographically smallest (L, N, omega_m) wins.
    """

    R_mirror: float
    L_min: float = 200.0e-6
    L_max: float = 1250.0e-6
    L_step: float = 2.0e-6
    N_min: float = 1.0e5
    N_max: float = 5.8e5
    N_step: float = 1.0e3
    omega_m_values: tuple = tuple(2.0 * math.pi * f for f in np.arange(40.0e3, 95.0e3 + 1.0, 5.0e3))
    finesse_eval: float = 5.8e5
    exclusion_halfwidth: float = 0.02
    exclusion_n_max: int = 8
    plateau_rtol: float = 0.01
    atom_template: AtomEnsembleSpec = field(
        default_factory=lambda: AtomEnsembleSpec(N=1.0e5)
    )

    def __post_init__(self) -> None:
        if not (self.R_mirror > 0):
            raise ValueError(f"R_mirror must be positive, got {self.R_mirror!r}")
        if not (0 < self.L_min <= self.L_max and self.L_step > 0):
            raise ValueError("invalid L range")
        if not (1 <= self.N_min <= self.N_max and self.N_step > 0):
            raise ValueError("invalid N range")
        if len(self.omega_m_values) == 0:
            raise ValueError("omega_m_values must be non-empty")


@dataclass(frozen=True)
class OptimizeResult:
    """Outcome of optimize_design; feasible=False carries an explanation instead of a design."""

    feasible: bool
    L: float | None = None
    N: float | None = None
    omega_m: float | None = None
    k: float | None = None
    ratio: float | None = None
    report: DesignReport | None = None
    n_evaluated: int = 0
    message: str = ""


def _k_excluded(k: np.ndarray, halfwidth: float, n_max: int) -> np.ndarray:
    """Boolean mask of couplings inside any inconclusive band around sqrt(n/2)."""
    bad = np.zeros(np.shape(k), dtype=bool)
    for n in range(1, n_max + 1):
        bad |= np.abs(k - math.sqrt(n / 2.0)) <= halfwidth
    return bad


def optimize_design(search: DesignSearchSpace) -> OptimizeResult:
    """Minimize tau_e/tau_p over (L, N, omega_m) at fixed mirror radius.

    Exhaustive vectorized grid scan; the argmin does not depend on
    finesse_eval because the objective scales as 1/finesse uniformly.
    """
    L_values = np.arange(search.L_min, search.L_max + 0.5 * search.L_step, search.L_step)
    L_values = L_values[L_values < 2.0 * search.R_mirror]
    N_values = np.arange(search.N_min, search.N_max + 0.5 * search.N_step, search.N_step)
    if L_values.size == 0 or N_values.size == 0:
        return OptimizeResult(feasible=False, message="empty search grid")

    tmpl = search.atom_template
    hbar = CODATA2018.hbar
    lam = RB87_D2_WAVELENGTH_M
    k_a = 2.0 * math.pi / lam
    omega_c = 2.0 * math.pi * CODATA2018.c / lam
    # volume factor: V_c = (lam/2) L sqrt(L (2R - L))
    vol = (lam / 2.0) * L_values * np.sqrt(L_values * (2.0 * search.R_mirror - L_values))
    alpha0_sq = tmpl.d ** 2 * omega_c / (2.0 * hbar * CODATA2018.epsilon_0 * vol)
    kappa = CODATA2018.c / (2.0 * L_values) / search.finesse_eval

    best = None
    candidates = []
    n_evaluated = 0
    for omega_m in search.omega_m_values:
        # g0(L, N) = k_a N (alpha0^2/Delta) sqrt(hbar / 2 N m omega) separates
        # into an L-dependent column and sqrt(N)
        g0_per_sqrt_n = (
            k_a
            * (alpha0_sq / tmpl.Delta_ca)
            * math.sqrt(hbar / (2.0 * tmpl.m_atom * omega_m))
        )
        k_grid = np.sqrt(N_values)[None, :] * (g0_per_sqrt_n / omega_m)[:, None]
        feasible = ~_k_excluded(k_grid, search.exclusion_halfwidth, search.exclusion_n_max)
        n_evaluated += k_grid.size
        if not feasible.any():
            continue
        tau_e = np.where(
            k_grid < K_REGIME_BOUNDARY,
            math.pi / (omega_m * k_grid ** 2),
            2.0 * math.pi / omega_m,
        )
        ratio = tau_e * kappa[:, None]
        ratio_masked = np.where(feasible, ratio, np.inf)
        idx = np.unravel_index(np.argmin(ratio_masked), ratio_masked.shape)
        candidates.append((float(ratio_masked[idx]), omega_m, ratio_masked))
        if best is None or ratio_masked[idx] < best:
            best = float(ratio_masked[idx])

    if best is None or not math.isfinite(best):
        return OptimizeResult(
            feasible=False,
            n_evaluated=n_evaluated,
            message="no feasible design: every coupling lands in an exclusion band",
        )

    # collect near-ties across all omega blocks, then lexicographic (L, N, omega)
    cutoff = best * (1.0 + search.plateau_rtol)
    rows = []
    for _, omega_m, ratio_masked in candidates:
        hit_L, hit_N = np.nonzero(ratio_masked <= cutoff)
        for iL, iN in zip(hit_L, hit_N):
            rows.append((float(L_values[iL]), float(N_values[iN]), float(omega_m)))
    rows.sort()
    L_opt, N_opt, omega_opt = rows[0]

    spec = replace(tmpl, N=N_opt, omega_m=omega_opt)
    geom = CavityGeometry(L=L_opt, R_mirror=search.R_mirror, finesse=search.finesse_eval, lambda_a=lam)
    report = design_report(spec, geom)
    return OptimizeResult(
        feasible=True,
        L=L_opt,
        N=N_opt,
        omega_m=omega_opt,
        k=report.k,
        ratio=report.ratio,
        report=report,
        n_evaluated=n_evaluated,
        message="",
    )
