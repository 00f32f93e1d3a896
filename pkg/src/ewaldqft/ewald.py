"""Classical Coulomb energy of periodic point-charge systems.

Decomposes the conditionally convergent lattice sum into a screened
real-space term, a reciprocal-space term, a self term, and a boundary
dipole term, all in reduced units with 1/(4*pi*eps0) = 1. Also provides
the truncated image-shell direct summation used as the accuracy oracle.

The reciprocal kernel depends on the dimension. In 3-d the Gaussian
splitting gives weight (2*pi/V) * exp(-sigma^2 k^2 / 2) / k^2 per
|S(k)|^2. For charges confined to a 2-d periodic plane but interacting
through the same 1/r potential, Poisson resummation of the smeared part
instead yields (pi/A) * erfc(sigma*k/sqrt(2)) / k, and the in-plane image
sum is absolutely convergent, so no dipole shape term arises.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .charges import ChargeSystem

DIRECT_K = "directk"
GRID_FFT = "fft"
QUANTUM_EXACT = "qexact"
QUANTUM_SAMPLED = "qsampled"

BACKENDS = (DIRECT_K, GRID_FFT, QUANTUM_EXACT, QUANTUM_SAMPLED)


class ConvergenceError(RuntimeError):
    """Image-shell direct summation failed to meet its tolerance."""


@dataclass(frozen=True)
class EwaldParams:
    """Splitting width and truncation settings.

    ``sigma`` is the Gaussian screening width, ``r_cut`` the real-space
    cutoff (image shells are enumerated automatically when it exceeds
    half the cell), ``k_max`` the max integer wavevector component, and
    ``eps_prime`` the boundary dielectric (math.inf = tinfoil).
    """

    sigma: float
    r_cut: float
    k_max: int
    eps_prime: float = 1.0
    image_shells: int = 8  # direct-sum oracle only

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.r_cut <= 0:
            raise ValueError("r_cut must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if not (self.eps_prime >= 1.0 or math.isinf(self.eps_prime)):
            raise ValueError("eps_prime must be >= 1 or infinite")
        if self.image_shells < 0:
            raise ValueError("image_shells must be nonnegative")


def default_params(system: ChargeSystem, sigma_scale: float = 1.0,
                   eps_prime: float = 1.0) -> EwaldParams:
    """Defaults that keep both truncation errors far below 1e-3 relative."""
    cell = system.cell_length
    return EwaldParams(
        sigma=sigma_scale * cell / (6.0 * math.sqrt(2.0)),
        r_cut=cell / 2.0,
        k_max=system.grid_size // 2,
        eps_prime=eps_prime,
    )


@dataclass(frozen=True)
class EnergyBreakdown:
    """The four energy terms plus their total, with backend provenance."""

    e_short: float
    e_long: float
    e_self: float
    e_dip: float
    e_total: float
    backend: str
    meta: dict = field(default_factory=dict)

    @classmethod
    def assemble(cls, e_short, e_long, e_self, e_dip, backend, meta=None):
        total = e_short + e_long + e_self + e_dip
        return cls(e_short, e_long, e_self, e_dip, total, backend, dict(meta or {}))


CSV_FIELDS = ("N", "d", "M", "sigma", "backend",
              "e_short", "e_long", "e_self", "e_dip", "e_total",
              "wall_ns", "shots")


def breakdown_csv_row(system: ChargeSystem, b: EnergyBreakdown,
                      wall_ns: int = 0) -> str:
    vals = [str(system.n_charges), str(system.d), str(system.grid_size),
            f"{b.meta.get('sigma', 0.0):.17g}", b.backend]
    vals += [f"{v:.17g}" for v in (b.e_short, b.e_long, b.e_self, b.e_dip, b.e_total)]
    vals += [str(int(wall_ns)), str(int(b.meta.get("shots", 0)))]
    return ",".join(vals)


# -- direct image-shell summation (oracle) ---------------------------------

_SHELL_KERNEL_CACHE: dict = {}


def _pair_weight_grid(system: ChargeSystem) -> np.ndarray:
    """W[delta] = sum of q_i q_j over ordered pairs with x_j - x_i = delta.

    delta spans [-(M-1), M-1]^d (offset by M-1); includes the i == j pairs
    at delta = 0, which the shell kernels must exclude for the home image.
    """
    m, d = system.grid_size, system.d
    size = 2 * m - 1
    w = np.zeros((size,) * d)
    diff = (system.coords[None, :, :] - system.coords[:, None, :]) + (m - 1)
    qq = np.outer(system.charges, system.charges).reshape(-1)
    np.add.at(w, tuple(diff.reshape(-1, d).T), qq)
    return w


def _shell_kernel(m: int, d: int, shell: int) -> np.ndarray:
    """G[delta] = sum over images n with ||n||_inf == shell of 1/||delta + n*M||.

    Distances in grid units; the singular delta=0, n=0 entry is zeroed.
    Cached per (m, d, shell) since it is charge-independent.
    """
    key = (m, d, shell)
    cached = _SHELL_KERNEL_CACHE.get(key)
    if cached is not None:
        return cached
    size = 2 * m - 1
    axes = [np.arange(size) - (m - 1)] * d
    delta = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    g = np.zeros(len(delta))
    for n in sorted(itertools.product(range(-shell, shell + 1), repeat=d)):
        if max(abs(c) for c in n) != shell:
            continue
        r2 = np.sum((delta + np.asarray(n) * m) ** 2, axis=1).astype(float)
        if shell == 0:
            center = np.flatnonzero(r2 == 0)
            r2[center] = 1.0
            inv = 1.0 / np.sqrt(r2)
            inv[center] = 0.0
        else:
            inv = 1.0 / np.sqrt(r2)
        g += inv
    g = g.reshape((size,) * d)
    g.setflags(write=False)
    _SHELL_KERNEL_CACHE[key] = g
    return g


def _shell_term(system: ChargeSystem, w: np.ndarray, shell: int) -> float:
    scale = 0.5 * system.grid_size / system.cell_length
    return scale * float(np.sum(w * _shell_kernel(system.grid_size, system.d, shell)))


def direct_sum_shell_terms(system: ChargeSystem, n_max: int) -> np.ndarray:
    """Per-shell contributions of the truncated direct lattice sum."""
    w = _pair_weight_grid(system)
    return np.array([_shell_term(system, w, s) for s in range(n_max + 1)])


def direct_sum_energy(system: ChargeSystem, n_max: int = 0) -> float:
    """Truncated direct Coulomb sum over image shells ||n||_inf <= n_max.

    Equals (1/2) * sum over images n and ordered pairs (i, j), excluding
    only the i = j self pair in the home image, of q_i q_j / |r_ij + n L|.
    Pairs are accumulated shell-major for bit-stable results.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return float(np.sum(direct_sum_shell_terms(system, n_max)))


@dataclass(frozen=True)
class DirectSumResult:
    energy: float
    shells: int
    converged: bool
    tail_estimate: float


def _richardson_stage(seq: list, start: int, power: int) -> list:
    out = [math.nan] * len(seq)
    for i in range(start + 1, len(seq)):
        a, b = float((i - 1) ** power), float(i ** power)
        if not math.isnan(seq[i - 1]):
            out[i] = (b * seq[i] - a * seq[i - 1]) / (b - a)
    return out


def direct_sum_converged(system: ChargeSystem, rel_tol: float = 1e-6,
                         max_shells: int | None = None,
                         min_shells: int = 4) -> DirectSumResult:
    """Shell-major direct summation, accelerated by Richardson extrapolation.

    Partial sums over cubic image shells approach the limit with a tail
    ~ n^(-(d-1)) set by the cell dipole; two extrapolation stages (orders
    d-1 and d) remove it. Converged when consecutive extrapolants agree to
    rel_tol. The plain truncated sum is available as direct_sum_energy.
    """
    if max_shells is None:
        max_shells = 48 if system.d == 2 else 16
    w = _pair_weight_grid(system)
    power = system.d - 1
    partial: list = []
    total = 0.0
    for shell in range(max_shells + 1):
        total += _shell_term(system, w, shell)
        partial.append(total)
        if shell < max(min_shells, 3):
            continue
        e1 = _richardson_stage(partial, 1, power)
        e2 = _richardson_stage(e1, 2, power + 1)
        delta = abs(e2[-1] - e2[-2]) if not math.isnan(e2[-2]) else math.inf
        if delta < rel_tol * max(abs(e2[-1]), 1e-300):
            return DirectSumResult(e2[-1], shell, True, delta)
    e1 = _richardson_stage(partial, 1, power)
    e2 = _richardson_stage(e1, 2, power + 1)
    delta = abs(e2[-1] - e2[-2])
    return DirectSumResult(e2[-1], max_shells, False, delta)


# -- Ewald terms -----------------------------------------------------------

def real_space_energy(system: ChargeSystem, params: EwaldParams) -> float:
    """Screened short-range sum over pairs (and self images) within r_cut."""
    cell = system.cell_length
    pos = system.positions()
    n_img = int(math.floor(params.r_cut / cell + 1.0))
    sq2sig = math.sqrt(2.0) * params.sigma
    qq = np.outer(system.charges, system.charges)
    n_p = system.n_charges
    total = 0.0
    for n in sorted(itertools.product(range(-n_img, n_img + 1), repeat=system.d),
                    key=lambda v: (max(abs(c) for c in v), v)):
        disp = pos[None, :, :] - pos[:, None, :] + np.asarray(n, dtype=float) * cell
        r = np.sqrt(np.sum(disp ** 2, axis=-1))
        mask = r <= params.r_cut
        if all(c == 0 for c in n):
            mask &= ~np.eye(n_p, dtype=bool)
        if not mask.any():
            continue
        rs = r[mask]
        total += float(np.sum(qq[mask] * erfc(rs / sq2sig) / rs))
    return 0.5 * total


def self_energy(system: ChargeSystem, params: EwaldParams) -> float:
    """Closed-form removal of each charge's interaction with its own screening cloud."""
    return -float(np.sum(system.charges ** 2)) / (math.sqrt(2.0 * math.pi) * params.sigma)


def dipole_energy(system: ChargeSystem, params: EwaldParams) -> float:
    """Boundary (surface) dipole term; zero under tinfoil conditions.

    Vanishes identically in 2-d, where the image sum is absolutely
    convergent and carries no shape-dependent contribution.
    """
    if system.d == 2 or math.isinf(params.eps_prime):
        return 0.0
    dip = system.charges @ system.positions()
    pref = 2.0 * math.pi / ((1.0 + 2.0 * params.eps_prime) * system.volume)
    return pref * float(np.sum(dip ** 2))


def reciprocal_weight(k_sq: np.ndarray, sigma: float, volume: float,
                      d: int) -> np.ndarray:
    """Coefficient of |S(k)|^2 in the reciprocal-space energy (k != 0)."""
    k_sq = np.asarray(k_sq, dtype=float)
    if d == 3:
        return (2.0 * math.pi / volume) * np.exp(-sigma ** 2 * k_sq / 2.0) / k_sq
    if d == 2:
        k = np.sqrt(k_sq)
        return (math.pi / volume) * erfc(sigma * k / math.sqrt(2.0)) / k
    raise ValueError(f"unsupported dimension {d}")


def _wavevector_list(system: ChargeSystem, k_max: int) -> np.ndarray:
    """Integer wavevectors for the direct k-space sum, zero excluded.

    Symmetric cube [-k_max, k_max]^d, except that at the grid Nyquist
    (k_max = M/2) the half-open range (-M/2, M/2] is used so the term set
    matches the folded FFT grid exactly (the +-M/2 planes alias to the
    same structure-factor value and must be counted once).
    """
    m = system.grid_size
    if k_max == m // 2:
        axis = np.arange(-k_max + 1, k_max + 1)
    else:
        axis = np.arange(-k_max, k_max + 1)
    mesh = np.stack(np.meshgrid(*([axis] * system.d), indexing="ij"), axis=-1)
    mlist = mesh.reshape(-1, system.d)
    return mlist[np.any(mlist != 0, axis=1)]


def reciprocal_energy_direct(system: ChargeSystem, params: EwaldParams) -> float:
    """Reciprocal-space term with structure factors evaluated per wavevector."""
    mlist = _wavevector_list(system, params.k_max)
    cell = system.cell_length
    k_sq = (2.0 * math.pi / cell) ** 2 * np.sum(mlist.astype(float) ** 2, axis=1)
    weights = reciprocal_weight(k_sq, params.sigma, system.volume, system.d)
    total = 0.0
    chunk = 8192
    for start in range(0, len(mlist), chunk):
        block = mlist[start:start + chunk]
        # grid positions make the phases exact multiples of 2*pi/M
        phases = np.exp((2j * math.pi / system.grid_size)
                        * (block @ system.coords.T))
        s_k = phases @ system.charges
        total += float(np.sum(weights[start:start + chunk] * np.abs(s_k) ** 2))
    return total


def charge_grid(system: ChargeSystem) -> np.ndarray:
    """Exact assignment of charges to their grid points (no interpolation)."""
    grid = np.zeros((system.grid_size,) * system.d)
    grid[tuple(system.coords.T)] = system.charges
    return grid


def folded_indices(m: int) -> np.ndarray:
    """DFT index s -> signed integer wavevector component (Nyquist kept positive)."""
    s = np.arange(m)
    return np.where(s <= m // 2, s, s - m)


def weight_grid_flat(system: ChargeSystem, params: EwaldParams) -> np.ndarray:
    """Reciprocal weights on the flattened M^d DFT grid; zero at s=0 and beyond k_max."""
    m = system.grid_size
    fold = folded_indices(m)
    mesh = np.stack(np.meshgrid(*([fold] * system.d), indexing="ij"), axis=-1)
    m_sq = np.sum(mesh.astype(float) ** 2, axis=-1)
    k_sq = (2.0 * math.pi / system.cell_length) ** 2 * m_sq
    keep = m_sq > 0
    if params.k_max < m // 2:
        keep &= np.max(np.abs(mesh), axis=-1) <= params.k_max
    weights = np.zeros(k_sq.shape)
    weights[keep] = reciprocal_weight(k_sq[keep], params.sigma, system.volume,
                                      system.d)
    return weights.reshape(-1)


def reciprocal_energy_fft(system: ChargeSystem, params: EwaldParams) -> float:
    """Reciprocal-space term via a discrete Fourier transform of the charge grid."""
    s_sq = np.abs(np.fft.fftn(charge_grid(system))) ** 2
    return float(weight_grid_flat(system, params) @ s_sq.reshape(-1))


# -- assembly --------------------------------------------------------------

def total_energy(system: ChargeSystem, params: EwaldParams,
                 backend: str = GRID_FFT, shots: int = 0,
                 seed: int = 0) -> EnergyBreakdown:
    """All four energy terms, delegating the reciprocal part to the backend."""
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    e_short = real_space_energy(system, params)
    e_self = self_energy(system, params)
    e_dip = dipole_energy(system, params)
    meta = {"sigma": params.sigma, "r_cut": params.r_cut, "k_max": params.k_max,
            "eps_prime": params.eps_prime}
    if backend == DIRECT_K:
        e_long = reciprocal_energy_direct(system, params)
    elif backend == GRID_FFT:
        e_long = reciprocal_energy_fft(system, params)
    else:
        from . import qewald  # deferred: qewald imports this module

        mode = qewald.EXACT if backend == QUANTUM_EXACT else qewald.SAMPLED
        est = qewald.estimate_reciprocal_energy(system, params, mode=mode,
                                                shots=shots, seed=seed)
        e_long = est.e_long
        meta["shots"] = est.shots
        meta["seed"] = est.seed
    return EnergyBreakdown.assemble(e_short, e_long, e_self, e_dip, backend, meta)
