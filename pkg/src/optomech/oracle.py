"""Brute-force state evolution in a truncated Fock basis.

The evolution operator of the two-optical-mode plus mechanics system is
applied in its exactly factored form: a photon-number conditioned Kerr
phase, a conditional displacement of the mechanical mode, and free
rotations. No Hamiltonian exponentiation is performed; displacement matrix
elements are evaluated in closed form through associated Laguerre
polynomials, so every matrix entry is exact irrespective of the cutoff and
truncation error consists purely of the state's own tail mass.

Sign convention (pinned by the regression tests against a dense matrix
exponential): a photon-number branch (n, m) with difference delta = n - m
acquires the interaction-picture factor

    exp(-i B(t) delta**2) * D_C(k * delta * xi(t))

and, in the full picture, additionally the optical phases
exp(-i (r_a n + r_b m) t) and the mechanical rotation exp(-i l t) applied
after the displacement.

Mixed mechanical input states (thermal occupation nbar > 0) are represented
as weighted ensembles of pure states over the initial mechanical Fock
number, which is exact for every quantity reported here because the thermal
state is diagonal in the number basis and all outputs are linear in the
density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln
from scipy.stats import poisson

from .core import big_b, xi

__all__ = [
    "FockConfig",
    "TriModeState",
    "ModePairMoments",
    "displacement_matrix",
    "build_initial_state",
    "apply_evolution",
    "partial_trace",
    "moments",
    "hamiltonian_expectation",
]

_MODE_AXES = {"A": 0, "B": 1, "C": 2}


def displacement_matrix(beta: complex, n_max: int) -> np.ndarray:
    """Matrix elements <m|D(beta)|n> on the basis 0..n_max.

    Closed form for m >= n:
        sqrt(n!/m!) * beta**(m-n) * exp(-|beta|**2/2) * L_n^{(m-n)}(|beta|**2)
    and the m < n entries follow from D(beta)^dag = D(-beta). The prefactor
    is assembled in log space so far off-diagonal entries neither overflow
    nor underflow before cancellation.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    dim = n_max + 1
    beta = complex(beta)
    if beta == 0:
        return np.eye(dim, dtype=complex)
    idx = np.arange(dim)
    row = idx[:, None]
    col = idx[None, :]
    kmin = np.minimum(row, col)
    diff = np.abs(row - col)
    x = abs(beta) ** 2
    lag = eval_genlaguerre(kmin, diff, x)
    log_mag = (
        0.5 * (gammaln(kmin + 1) - gammaln(kmin + diff + 1))
        + diff * math.log(abs(beta))
        - 0.5 * x
    )
    unit = beta / abs(beta)
    phase_base = np.where(row >= col, unit, -np.conj(unit))
    return np.exp(log_mag) * phase_base ** diff * lag


def _poisson_tail_cutoff(lam: float, tol: float) -> int:
    """Smallest n with P(Poisson(lam) > n) < tol."""
    if lam <= 0 or tol >= 1:
        return 0
    guess = poisson.isf(tol, lam)
    # isf can go NaN in the far tail; start from a generous normal-tail bound
    n = int(guess) if math.isfinite(guess) else int(lam + 10.0 * math.sqrt(lam) + 10.0)
    n = max(n, 0)
    while poisson.sf(n, lam) >= tol:
        n += 1
    while n > 0 and poisson.sf(n - 1, lam) < tol:
        n -= 1
    return n


def _thermal_tail_cutoff(nbar: float, tol: float) -> int:
    """Smallest L such that the geometric weights beyond L sum below tol."""
    if nbar <= 0 or tol >= 1:
        return 0
    q = nbar / (1.0 + nbar)
    L = max(int(math.ceil(math.log(tol) / math.log(q))) - 1, 0)
    while q ** (L + 1) >= tol:
        L += 1
    while L > 0 and q ** L < tol:
        L -= 1
    return L


def _mechanical_cutoff(
    alpha: complex,
    beta: complex,
    nbar: float,
    k: float,
    n_max_a: int,
    n_max_b: int,
    tol: float,
) -> tuple[int, int]:
    """Mechanical cutoff covering the conditional displacements.

    A branch with photon-number difference delta is displaced by at most
    |k * delta * eta| <= 2 k |delta| on top of an initial Fock state up to
    the thermal cutoff, so its occupation is bounded by a Poisson-like tail
    at lam = (2 k |delta| + sqrt(l_max))**2. Each |delta| gets a tail budget
    inversely weighted by its branch probability, which keeps the cutoff
    from being dictated by branches of negligible weight.

    Returns (n_max_c, thermal_l_max).
    """
    l_max = _thermal_tail_cutoff(nbar, tol / 4.0)
    pa = poisson.pmf(np.arange(n_max_a + 1), abs(alpha) ** 2)
    pb = poisson.pmf(np.arange(n_max_b + 1), abs(beta) ** 2)
    weight = np.outer(pa, pb)
    delta = np.arange(n_max_a + 1)[:, None] - np.arange(n_max_b + 1)[None, :]
    sqrt_l = math.sqrt(l_max)
    n_c = l_max + 4
    n_classes = int(np.abs(delta).max()) + 1
    for d in range(n_classes):
        w = float(weight[np.abs(delta) == d].sum())
        if w <= 0.0:
            continue
        budget = tol / (4.0 * n_classes * w)
        if budget >= 1.0:
            # the whole branch carries less weight than its share of the
            # error budget, so it does not drive the cutoff
            continue
        lam = (2.0 * abs(k) * d + sqrt_l) ** 2
        n_c = max(n_c, _poisson_tail_cutoff(lam, budget) + 2)
    return n_c, l_max


@dataclass(frozen=True)
class FockConfig:
    """Truncation cutoffs (inclusive occupation maxima) and tail budget."""

    n_max_a: int
    n_max_b: int
    n_max_c: int
    tolerance: float = 1e-10

    def __post_init__(self) -> None:
        for name in ("n_max_a", "n_max_b", "n_max_c"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not (0 < self.tolerance < 1):
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")

    @classmethod
    def for_qubit(cls, k: float, tolerance: float = 1e-10) -> "FockConfig":
        """Cutoffs for the vacuum/one-photon superposition input.

        Photon numbers are conserved, so the optical cutoffs stay at 1; the
        mechanical mode sees displacements of magnitude at most 2k.
        """
        n_c = max(_poisson_tail_cutoff((2.0 * abs(k)) ** 2, tolerance / 2.0) + 2, 8)
        return cls(n_max_a=1, n_max_b=1, n_max_c=n_c, tolerance=tolerance)

    @classmethod
    def for_coherent_thermal(
        cls,
        alpha: complex,
        beta: complex,
        nbar: float,
        k: float,
        tolerance: float = 1e-10,
    ) -> "FockConfig":
        n_a = max(_poisson_tail_cutoff(abs(alpha) ** 2, tolerance / 4.0), 1)
        n_b = max(_poisson_tail_cutoff(abs(beta) ** 2, tolerance / 4.0), 1)
        n_c, _ = _mechanical_cutoff(alpha, beta, nbar, k, n_a, n_b, tolerance)
        return cls(n_max_a=n_a, n_max_b=n_b, n_max_c=max(n_c, 1), tolerance=tolerance)

    def doubled(self) -> "FockConfig":
        """Convergence-study variant with all cutoffs doubled."""
        return FockConfig(
            n_max_a=2 * self.n_max_a,
            n_max_b=2 * self.n_max_b,
            n_max_c=2 * self.n_max_c,
            tolerance=self.tolerance,
        )


@dataclass
class TriModeState:
    """State of modes A, B (optical) and C (mechanical) in the number basis.

    Either a single pure amplitude tensor of shape
    (n_max_a+1, n_max_b+1, n_max_c+1), or a statistical ensemble of such
    tensors with fixed weights. Treated as immutable after construction.
    """

    weights: np.ndarray
    vectors: list
    config: FockConfig

    @property
    def is_pure(self) -> bool:
        return len(self.vectors) == 1

    @property
    def shape(self) -> tuple:
        return self.vectors[0].shape

    def trace(self) -> float:
        return float(
            sum(
                w * float(np.vdot(v, v).real)
                for w, v in zip(self.weights, self.vectors)
            )
        )


def _coherent_vector(alpha: complex, n_max: int) -> np.ndarray:
    """Number-basis amplitudes of |alpha> up to n_max (log-safe)."""
    n = np.arange(n_max + 1)
    if alpha == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    mag = np.exp(-0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    unit = alpha / abs(alpha)
    return mag * unit ** n


def build_initial_state(kind: str, **params) -> TriModeState:
    """Construct the initial tri-mode state.

    kind="qubit": ((|0> + |1>)/sqrt2) on each optical mode, mechanical
    ground state. Accepts k (used to size the mechanical cutoff),
    tolerance, and optionally a FockConfig via config=.

    kind="coherent_thermal": |alpha> x |beta> x thermal(nbar), the thermal
    mode as a weighted ensemble of Fock states with geometric weights,
    truncated below the tail tolerance and renormalized. Accepts alpha,
    beta, nbar, k, tolerance, config=.
    """
    config = params.pop("config", None)
    tolerance = params.pop("tolerance", config.tolerance if config else 1e-10)
    if kind == "qubit":
        k = params.pop("k", 0.0)
        if params:
            raise ValueError(f"unexpected parameters for kind='qubit': {sorted(params)}")
        if config is None:
            config = FockConfig.for_qubit(k, tolerance)
        if config.n_max_a < 1 or config.n_max_b < 1:
            raise ValueError("qubit state needs optical cutoffs of at least 1")
        psi = np.zeros((config.n_max_a + 1, config.n_max_b + 1, config.n_max_c + 1), dtype=complex)
        psi[0:2, 0:2, 0] = 0.5
        return TriModeState(np.array([1.0]), [psi], config)

    if kind == "coherent_thermal":
        alpha = complex(params.pop("alpha", 0.0))
        beta = complex(params.pop("beta", 0.0))
        nbar = float(params.pop("nbar", 0.0))
        k = params.pop("k", 0.0)
        if params:
            raise ValueError(
                f"unexpected parameters for kind='coherent_thermal': {sorted(params)}"
            )
        if nbar < 0:
            raise ValueError(f"nbar must be non-negative, got {nbar!r}")
        if config is None:
            config = FockConfig.for_coherent_thermal(alpha, beta, nbar, k, tolerance)
        # tail-mass invariants for the supplied cutoffs
        for amp, n_max, label in (
            (alpha, config.n_max_a, "n_max_a"),
            (beta, config.n_max_b, "n_max_b"),
        ):
            tail = float(poisson.sf(n_max, abs(amp) ** 2)) if amp != 0 else 0.0
            if tail >= config.tolerance:
                raise ValueError(
                    f"coherent tail mass {tail:.3e} beyond {label}={n_max} exceeds "
                    f"tolerance {config.tolerance:.1e}"
                )
        l_max = _thermal_tail_cutoff(nbar, config.tolerance / 4.0)
        if l_max > config.n_max_c:
            raise ValueError(
                f"thermal tail needs mechanical cutoff {l_max}, "
                f"config has n_max_c={config.n_max_c}"
            )
        amp_a = _coherent_vector(alpha, config.n_max_a)
        amp_b = _coherent_vector(beta, config.n_max_b)
        optical = np.multiply.outer(amp_a, amp_b)
        if nbar == 0:
            weights = np.array([1.0])
        else:
            q = nbar / (1.0 + nbar)
            weights = (1.0 - q) * q ** np.arange(l_max + 1)
            weights = weights / weights.sum()
        vectors = []
        for l0 in range(len(weights)):
            psi = np.zeros(
                (config.n_max_a + 1, config.n_max_b + 1, config.n_max_c + 1), dtype=complex
            )
            psi[:, :, l0] = optical
            vectors.append(psi)
        return TriModeState(weights, vectors, config)

    raise ValueError(f"unknown state kind {kind!r}")


def apply_evolution(
    state: TriModeState,
    t: float,
    k: float,
    r_a: float,
    r_b: float,
    *,
    interaction_picture: bool = False,
) -> TriModeState:
    """Evolve by scaled time t under the factored unitary.

    Applied per photon-number branch (n, m), delta = n - m, in order: the
    Kerr phase exp(-i B(t) delta**2), the conditional mechanical
    displacement D_C(k delta xi(t)), then (full picture only) the optical
    phases exp(-i (r_a n + r_b m) t) and the mechanical rotation
    exp(-i l t). With interaction_picture=True the last two factors are
    omitted.
    """
    na1, nb1, nc1 = state.shape
    n = np.arange(na1)[:, None]
    m = np.arange(nb1)[None, :]
    delta = n - m
    phase = np.exp(-1j * float(big_b(t, k)) * delta.astype(float) ** 2)
    if not interaction_picture:
        phase = phase * np.exp(-1j * t * (r_a * n + r_b * m))
    xi_t = complex(xi(t))
    stacked = np.stack(state.vectors)
    out = stacked * phase[None, :, :, None]
    if k != 0.0 and xi_t != 0.0:
        for d in range(1, int(np.abs(delta).max()) + 1):
            mat = displacement_matrix(k * d * xi_t, nc1 - 1)
            # D(-beta) is the adjoint of D(beta), so one build covers both signs
            for dd, mat_t in ((d, mat.T), (-d, mat.conj())):
                mask = delta == dd
                if mask.any():
                    out[:, mask, :] = out[:, mask, :] @ mat_t
    if not interaction_picture:
        out = out * np.exp(-1j * t * np.arange(nc1))[None, None, None, :]
    return TriModeState(state.weights.copy(), list(out), state.config)


def partial_trace(state: TriModeState, keep: str) -> np.ndarray:
    """Reduced density matrix over the kept modes, ordered A before B before C.

    keep is a subset of "ABC", e.g. "AB" or "C". Row-major composite index
    over the kept modes, so for keep="AB" the basis runs
    |00>, |01>, ..., |0 n_b>, |10>, ...
    """
    kept = "".join(sorted(set(keep.upper())))
    if not kept or any(mode not in _MODE_AXES for mode in kept):
        raise ValueError(f"keep must be a non-empty subset of 'ABC', got {keep!r}")
    traced = [axis for mode, axis in _MODE_AXES.items() if mode not in kept]
    kept_axes = [_MODE_AXES[mode] for mode in kept]
    dims = state.shape
    dim_keep = int(np.prod([dims[axis] for axis in kept_axes]))
    if dim_keep ** 2 > 4e8:
        raise ValueError(f"reduced matrix over {kept} would have dimension {dim_keep}")
    rho = np.zeros((dim_keep, dim_keep), dtype=complex)
    for w, psi in zip(state.weights, state.vectors):
        if traced:
            block = np.tensordot(psi, psi.conj(), axes=(traced, traced))
        else:
            block = np.multiply.outer(psi, psi.conj())
            order = kept_axes + [axis + 3 for axis in kept_axes]
            block = np.transpose(block, order)
        rho += w * block.reshape(dim_keep, dim_keep)
    return rho


def _lower(psi: np.ndarray, axis: int) -> np.ndarray:
    """Apply the annihilation operator along the given tensor axis."""
    p = np.moveaxis(psi, axis, 0)
    out = np.zeros_like(p)
    dim = p.shape[0]
    weights = np.sqrt(np.arange(1, dim, dtype=float)).reshape((-1,) + (1,) * (p.ndim - 1))
    out[:-1] = p[1:] * weights
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class ModePairMoments:
    """First and second moments of a mode pair: <a1>, <a2>, <a1+ a1>, <a2+ a2>, <a1 a2>."""

    mean1: complex
    mean2: complex
    occ1: float
    occ2: float
    corr: complex


def moments(state: TriModeState, mode_pair: str) -> ModePairMoments:
    """Moments that feed the EPR variance kernel, for mode_pair in {AB, AC, BC}."""
    pair = "".join(sorted(set(mode_pair.upper())))
    if len(pair) != 2 or any(mode not in _MODE_AXES for mode in pair):
        raise ValueError(f"mode_pair must name two of A, B, C, got {mode_pair!r}")
    ax1, ax2 = _MODE_AXES[pair[0]], _MODE_AXES[pair[1]]
    mean1 = mean2 = corr = 0.0 + 0.0j
    occ1 = occ2 = 0.0
    for w, psi in zip(state.weights, state.vectors):
        low1 = _lower(psi, ax1)
        low2 = _lower(psi, ax2)
        mean1 += w * np.vdot(psi, low1)
        mean2 += w * np.vdot(psi, low2)
        occ1 += w * float(np.vdot(low1, low1).real)
        occ2 += w * float(np.vdot(low2, low2).real)
        corr += w * np.vdot(psi, _lower(low1, ax2))
    return ModePairMoments(
        mean1=complex(mean1),
        mean2=complex(mean2),
        occ1=occ1,
        occ2=occ2,
        corr=complex(corr),
    )


def hamiltonian_expectation(state: TriModeState, k: float, r_a: float, r_b: float) -> float:
    """<H>/(hbar omega_m) with H/(hbar omega_m) = r_a n_a + r_b n_b + n_c - k (n_a - n_b)(c + c+).

    Used by the conservation tests; exact in the truncated basis as long as
    the state holds no appreciable weight at the cutoff boundary.
    """
    na1, nb1, nc1 = state.shape
    n = np.arange(na1, dtype=float)
    m = np.arange(nb1, dtype=float)
    l = np.arange(nc1, dtype=float)
    delta = n[:, None, None] - m[None, :, None]
    total = 0.0
    for w, psi in zip(state.weights, state.vectors):
        prob = np.abs(psi) ** 2
        occ = (
            r_a * float((prob.sum(axis=(1, 2)) * n).sum())
            + r_b * float((prob.sum(axis=(0, 2)) * m).sum())
            + float((prob.sum(axis=(0, 1)) * l).sum())
        )
        cross = np.vdot(psi, delta * _lower(psi, 2))
        total += w * (occ - 2.0 * k * float(cross.real))
    return total
