"""Tripartite optomechanical entanglement toolkit.

Two cavity modes couple to one mechanical mode through a shared
position-dependent frequency shift. The package provides the closed-form
evolution of that system (core, qubit, duan), a truncated-Fock-space
numerical oracle for cross-checking the closed forms (oracle), SI-unit
experiment-design calculators (design), and a CSV-producing command line
front end (cli).
"""

from .core import (
    CODATA2018,
    PhysicalConstants,
    SystemParams,
    ThermalSpec,
    big_b,
    energy_eigenvalue,
    energy_eigenvalue_scaled,
    eta,
    thermal_occupation,
    x_zpf,
    xi,
)
from .design import (
    AtomEnsembleSpec,
    CavityGeometry,
    DesignReport,
    DesignSearchSpace,
    HeatingBudget,
    NanoparticleSpec,
    OptimizeResult,
    atom_coupling,
    cavity_linewidth,
    design_report,
    entanglement_period,
    heating_budget,
    nanoparticle_coupling,
    optimize_design,
)
from .duan import (
    CVInitialState,
    EPRRecord,
    RegimeReport,
    duan_ab,
    duan_ac,
    duan_bc,
    duan_from_moments,
    min_over_window,
    regime_report,
)
from .oracle import (
    FockConfig,
    ModePairMoments,
    TriModeState,
    apply_evolution,
    build_initial_state,
    displacement_matrix,
    moments,
    partial_trace,
)
from .qubit import (
    QubitJointState,
    concurrence,
    evolve_qubit_state,
    reduced_rho_ab,
    timeseries,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "CODATA2018",
    "PhysicalConstants",
    "SystemParams",
    "ThermalSpec",
    "eta",
    "big_b",
    "xi",
    "thermal_occupation",
    "x_zpf",
    "energy_eigenvalue",
    "energy_eigenvalue_scaled",
    # qubit
    "QubitJointState",
    "evolve_qubit_state",
    "reduced_rho_ab",
    "concurrence",
    "von_neumann_entropy",
    "timeseries",
    # duan
    "CVInitialState",
    "EPRRecord",
    "RegimeReport",
    "duan_ab",
    "duan_ac",
    "duan_bc",
    "duan_from_moments",
    "min_over_window",
    "regime_report",
    # oracle
    "FockConfig",
    "TriModeState",
    "ModePairMoments",
    "displacement_matrix",
    "build_initial_state",
    "apply_evolution",
    "partial_trace",
    "moments",
    # design
    "CavityGeometry",
    "AtomEnsembleSpec",
    "NanoparticleSpec",
    "HeatingBudget",
    "DesignReport",
    "DesignSearchSpace",
    "OptimizeResult",
    "atom_coupling",
    "nanoparticle_coupling",
    "cavity_linewidth",
    "entanglement_period",
    "heating_budget",
    "design_report",
    "optimize_design",
]
