"""Point-charge systems on a periodic cubic grid.

Charges live on integer grid points x in [0, M)^d inside a cubic cell of
side L; physical positions are r = L * x / M. At most one charge may sit
on a grid point, so the charge vector doubles as the amplitude pattern of
a sparse quantum register state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RNG_ALGORITHM = "numpy:PCG64(default_rng)"

MIXED = "mixed"
SEPARATED = "separated"


class CapacityError(ValueError):
    """More charges requested than available grid points."""


class ParityError(ValueError):
    """Charge count or grid size incompatible with the requested layout."""


def _is_power_of_two(m) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True, eq=False)
class ChargeSystem:
    """N point charges on the integer grid [0, M)^d of a periodic cubic cell.

    Grid coordinates are the ground truth; continuous positions are derived,
    never stored. Instances are immutable and safe to share between threads.
    Use :func:`make_system` (or the generators below) to get a validated
    instance; the bare constructor performs only structural normalization.
    """

    d: int
    grid_size: int
    cell: tuple[float, float, float]
    charges: np.ndarray  # shape (N,)
    coords: np.ndarray   # shape (N, d), integer
    rng_info: str = RNG_ALGORITHM

    def __post_init__(self):
        q = np.ascontiguousarray(np.asarray(self.charges, dtype=float))
        x = np.ascontiguousarray(np.asarray(self.coords, dtype=np.int64))
        q.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "charges", q)
        object.__setattr__(self, "coords", x)
        object.__setattr__(self, "cell", tuple(float(c) for c in self.cell))

    # -- derived quantities ------------------------------------------------

    @property
    def n_charges(self) -> int:
        return len(self.charges)

    @property
    def cell_length(self) -> float:
        return self.cell[0]

    @property
    def spacing(self) -> float:
        return self.cell_length / self.grid_size

    @property
    def volume(self) -> float:
        """Cell volume for d=3, cell area for d=2."""
        v = 1.0
        for axis in range(self.d):
            v *= self.cell[axis]
        return v

    @property
    def charge_norm(self) -> float:
        return float(np.sqrt(np.sum(self.charges ** 2)))

    @property
    def total_charge(self) -> float:
        return float(np.sum(self.charges))

    def positions(self) -> np.ndarray:
        """Continuous positions r = L * x / M, shape (N, d)."""
        return self.coords * self.spacing

    def is_neutral(self, tol: float = 1e-12) -> bool:
        return abs(self.total_charge) <= tol * max(1.0, self.charge_norm)

    def __eq__(self, other):
        if not isinstance(other, ChargeSystem):
            return NotImplemented
        return (
            self.d == other.d
            and self.grid_size == other.grid_size
            and self.cell == other.cell
            and np.array_equal(self.charges, other.charges)
            and np.array_equal(self.coords, other.coords)
        )


@dataclass(frozen=True)
class ConfigSpec:
    """Deterministic recipe for a benchmark charge configuration."""

    kind: str             # MIXED or SEPARATED
    n: int
    seed: int
    magnitude: float = 1.0


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None
    index: int | None = None


def validate(system: ChargeSystem) -> ValidationResult:
    """Check every ChargeSystem invariant; report the first violation."""
    if system.d not in (2, 3):
        return ValidationResult(False, f"dimension must be 2 or 3, got {system.d}")
    if not _is_power_of_two(system.grid_size):
        return ValidationResult(False, f"grid size {system.grid_size} is not a power of two")
    for axis in range(system.d):
        if system.cell[axis] <= 0:
            return ValidationResult(False, f"cell length {system.cell[axis]} must be positive")
    if any(abs(system.cell[a] - system.cell[0]) > 0 for a in range(1, system.d)):
        return ValidationResult(False, "only cubic cells are supported")
    if system.charges.ndim != 1 or system.coords.shape != (len(system.charges), system.d):
        return ValidationResult(False, "charges and coords have inconsistent shapes")
    if system.n_charges < 1:
        return ValidationResult(False, "system must contain at least one charge")

    m = system.grid_size
    in_range = (system.coords >= 0) & (system.coords < m)
    if not in_range.all():
        bad = int(np.flatnonzero(~in_range.all(axis=1))[0])
        return ValidationResult(False, f"coordinate of charge {bad} outside [0, {m})", bad)

    flat = _flatten_coords(system.coords, m)
    order = np.argsort(flat, kind="stable")
    dup = np.flatnonzero(np.diff(flat[order]) == 0)
    if dup.size:
        bad = int(max(order[dup[0]], order[dup[0] + 1]))
        return ValidationResult(False, f"charge {bad} duplicates an occupied grid point", bad)

    if system.charge_norm <= 0:
        return ValidationResult(False, "charge vector has zero norm")
    return ValidationResult(True)


def make_system(d, grid_size, charges, coords, cell_length=None,
                rng_info=RNG_ALGORITHM) -> ChargeSystem:
    """Validated ChargeSystem constructor; raises ValueError on any violation."""
    if cell_length is None:
        cell_length = float(grid_size)
    system = ChargeSystem(
        d=d,
        grid_size=grid_size,
        cell=(cell_length, cell_length, cell_length),
        charges=np.asarray(charges, dtype=float),
        coords=np.asarray(coords, dtype=np.int64),
        rng_info=rng_info,
    )
    result = validate(system)
    if not result.ok:
        raise ValueError(result.reason)
    return system


def _flatten_coords(coords: np.ndarray, m: int) -> np.ndarray:
    """Axis-major flat index; axis 0 is the most significant block."""
    flat = np.zeros(len(coords), dtype=np.int64)
    for axis in range(coords.shape[1]):
        flat = flat * m + coords[:, axis]
    return flat


def _unflatten_coords(flat: np.ndarray, m: int, d: int) -> np.ndarray:
    coords = np.empty((len(flat), d), dtype=np.int64)
    rest = np.asarray(flat, dtype=np.int64)
    for axis in range(d - 1, -1, -1):
        coords[:, axis] = rest % m
        rest //= m
    return coords


def generate_configuration(spec: ConfigSpec, grid_size: int, d: int,
                           cell_length=None) -> ChargeSystem:
    """Generate the mixed or separated benchmark configuration.

    Pure function of (spec, grid_size, d, cell_length): the same inputs
    always produce an identical system, including charge ordering.
    """
    m, n = grid_size, spec.n
    if n < 1:
        raise ValueError("need at least one charge")
    if spec.kind not in (MIXED, SEPARATED):
        raise ValueError(f"unknown configuration kind {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)

    if spec.kind == MIXED:
        if n > m ** d:
            raise CapacityError(f"{n} charges exceed {m}^{d} grid points")
        flat = rng.choice(m ** d, size=n, replace=False)
        coords = _unflatten_coords(flat, m, d)
        n_pos = n - n // 2
    else:
        if n % 2:
            raise ParityError("separated configuration needs an even charge count")
        half = n // 2
        half_cells = (m // 2) * m ** (d - 1)
        if half > half_cells:
            raise CapacityError(f"{half} charges exceed the {half_cells}-point half cell")
        pos_flat = rng.choice(half_cells, size=half, replace=False)
        neg_flat = rng.choice(half_cells, size=half, replace=False)
        # positives occupy x < M/2; negatives the complementary half cell
        pos = _unflatten_coords(pos_flat, m, d)
        neg = _unflatten_coords(neg_flat, m, d)
        neg[:, 0] += m // 2
        coords = np.vstack([pos, neg])
        n_pos = half

    q = np.full(n, -spec.magnitude)
    q[:n_pos] = spec.magnitude
    return make_system(d, m, q, coords, cell_length)


def rocksalt_lattice(grid_size: int, d: int = 3, cell_length=None) -> ChargeSystem:
    """Fully occupied grid with alternating unit charges, sign (-1)^(x+y+z).

    Net charge is zero for even grid sizes; odd sizes are rejected because
    the alternation would clash across the periodic boundary.
    """
    m = grid_size
    if m % 2:
        raise ParityError("rocksalt lattice needs an even grid size")
    coords = np.indices((m,) * d).reshape(d, -1).T.astype(np.int64)
    q = np.where(coords.sum(axis=1) % 2 == 0, 1.0, -1.0)
    return make_system(d, m, q, coords, cell_length)


# -- serialization ---------------------------------------------------------

def to_text(system: ChargeSystem) -> str:
    """Line-oriented dump: header 'd M Lx Ly Lz N', then one 'q x y [z]' per charge."""
    lx, ly, lz = system.cell
    lines = [f"{system.d} {system.grid_size} {lx:.17g} {ly:.17g} {lz:.17g} {system.n_charges}"]
    for q, x in zip(system.charges, system.coords):
        lines.append(f"{q:.17g} " + " ".join(str(int(c)) for c in x))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ChargeSystem:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty charge-system file")
    head = lines[0].split()
    if len(head) != 6:
        raise ValueError("malformed header, expected 'd M Lx Ly Lz N'")
    d, m = int(head[0]), int(head[1])
    cell = tuple(float(v) for v in head[2:5])
    n = int(head[5])
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} charge lines, found {len(lines) - 1}")
    q = np.empty(n)
    coords = np.empty((n, d), dtype=np.int64)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 1 + d:
            raise ValueError(f"charge line {i} has {len(parts)} fields, expected {1 + d}")
        q[i] = float(parts[0])
        coords[i] = [int(p) for p in parts[1:]]
    system = ChargeSystem(d=d, grid_size=m, cell=cell, charges=q, coords=coords)
    result = validate(system)
    if not result.ok:
        raise ValueError(result.reason)
    return system
