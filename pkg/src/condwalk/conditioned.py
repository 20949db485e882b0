"""The walk conditioned to stay non-negative and its bridges.

The conditioned chain has transitions ``p*(x, y) = V(y)/V(x) P[X = y - x]``
on ``y >= 0``.  Pinning both ends of an n-step path makes the factor
``V(y)/V(x)`` a constant, so the bridge of the conditioned chain from x to y
is exactly the bridge of the *killed* walk.  :class:`BridgeTable` therefore
never touches V: it stores the backward probabilities
``h_j(z) = P_z[S^_{n-j} = y]`` and samples by the Doob construction
``P[z -> w at time j] = P[X = w - z] h_{j+1}(w) / h_j(z)``.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetError, DomainError, TableInconsistencyError, UnreachableError
from .ladder import HARMONICITY_TOL, RenewalTable, harmonicity_error, killed_final
from .steplaw import LatticePath, LatticePmf, StepLaw

#: default cap on bridge-table cells, n * width
DEFAULT_TABLE_BUDGET = 2**26


def make_rng(master_seed: int, key: str | int | None = None) -> np.random.Generator:
    """Deterministic generator derived from a master seed.

    Workers and checks get independent streams from
    ``SeedSequence(master_seed, spawn_key=(crc32(key),))``; ``key=None``
    gives the master stream itself.
    """
    if key is None:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed)))
    if isinstance(key, str):
        key = zlib.crc32(key.encode())
    ss = np.random.SeedSequence(master_seed, spawn_key=(int(key),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ConditionedKernel:
    law: StepLaw
    V: np.ndarray
    matrix: np.ndarray  # matrix[x, y] = p*(x, y) for x <= x_top

    @property
    def x_top(self) -> int:
        """Largest state whose row is fully covered by the V table."""
        return self.matrix.shape[0] - 1

    def row(self, x: int) -> LatticePmf:
        return LatticePmf(0, self.matrix[x])

    def transition(self, x: int, y: int) -> float:
        if y < 0 or y >= self.matrix.shape[1] or not 0 <= x <= self.x_top:
            return 0.0
        return float(self.matrix[x, y])


def conditioned_kernel(table: RenewalTable) -> ConditionedKernel:
    law, V = table.law, table.V
    err = harmonicity_error(law, V)
    if err > HARMONICITY_TOL:
        raise TableInconsistencyError(f"V is not harmonic within {HARMONICITY_TOL:.0e} (error {err:.3e})")
    x_top = len(V) - 1 - law.max_up
    if x_top < 0:
        raise BudgetError("renewal table too short to define any kernel row")
    m = np.zeros((x_top + 1, len(V)))
    for x in range(x_top + 1):
        for off, _ in law.support:
            y = x + off
            if y >= 0:
                m[x, y] = V[y] / V[x] * law.pmf(off)
    return ConditionedKernel(law, V, m)


def sample_conditioned_many(kernel: ConditionedKernel, x: int, n: int, size: int,
                            rng: np.random.Generator) -> np.ndarray:
    """``size`` paths of the conditioned chain from x; shape (size, n + 1)."""
    if x < 0:
        raise DomainError(f"start must be >= 0, got {x}")
    if x + n * kernel.law.max_up > kernel.x_top:
        raise BudgetError(
            f"paths from {x} over {n} steps reach {x + n * kernel.law.max_up} > {kernel.x_top}; "
            "enlarge x_max of the renewal table"
        )
    offsets = np.asarray(kernel.law.offsets)
    out = np.empty((size, n + 1), dtype=np.int64)
    out[:, 0] = x
    z = np.full(size, x, dtype=np.int64)
    for j in range(n):
        targets = z[:, None] + offsets[None, :]
        w = np.where(targets >= 0, kernel.matrix[z[:, None], np.clip(targets, 0, None)], 0.0)
        z = _choose(targets, w, rng)
        out[:, j + 1] = z
    return out


def sample_conditioned(kernel: ConditionedKernel, x: int, n: int, rng: np.random.Generator) -> LatticePath:
    return LatticePath.from_positions(sample_conditioned_many(kernel, x, n, 1, rng)[0])


def _choose(targets: np.ndarray, weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Pick one target per row with probability proportional to its weight."""
    cum = np.cumsum(weights, axis=1)
    u = rng.random(len(targets)) * cum[:, -1]
    idx = (cum <= u[:, None]).sum(axis=1)
    idx = np.minimum(idx, targets.shape[1] - 1)
    return targets[np.arange(len(targets)), idx]


@dataclass(frozen=True)
class BridgeTable:
    law: StepLaw
    x: int
    y: int
    n: int
    h: np.ndarray  # h[j, z] = P_z[S^_{n-j} = y]

    @property
    def normalizer(self) -> float:
        return float(self.h[0, self.x])


def bridge_table(law: StepLaw, x: int, y: int, n: int, budget: int = DEFAULT_TABLE_BUDGET) -> BridgeTable:
    if x < 0 or y < 0 or n < 0:
        raise DomainError(f"bridge needs x, y, n >= 0; got ({x}, {y}, {n})")
    # states above both bounds are either unreachable from x or cannot return to y
    width = min(x + n * law.max_up, y + n * law.max_down) + 1
    width = max(width, x + 1, y + 1)
    if (n + 1) * width > budget:
        raise BudgetError(f"bridge table needs {(n + 1) * width} cells > budget {budget}")
    D, U = law.max_down, law.max_up
    h = np.zeros((n + 1, width))
    h[n, y] = 1.0
    for j in range(n - 1, -1, -1):
        padded = np.concatenate([np.zeros(D), h[j + 1], np.zeros(U)])
        h[j] = np.correlate(padded, law.kernel, mode="valid")
    table = BridgeTable(law, x, y, n, h)
    if table.normalizer <= 0:
        raise UnreachableError(
            f"P_{x}[killed walk at {y} after {n} steps] = 0; choose a reachable endpoint"
        )
    return table


def sample_bridges(table: BridgeTable, size: int, rng: np.random.Generator,
                   keep: Sequence[int] | None = None) -> np.ndarray:
    """``size`` exact bridge paths; shape (size, n + 1).

    With ``keep`` only those time indices are stored, shape (size, len(keep)).
    """
    law, h = table.law, table.h
    width = h.shape[1]
    offsets = np.asarray(law.offsets)
    probs = np.asarray([float(p) for p in law.probs])
    keep = list(range(table.n + 1)) if keep is None else list(keep)
    if any(not 0 <= k <= table.n for k in keep):
        raise DomainError(f"kept indices must lie in [0, {table.n}]")
    cols: dict[int, list[int]] = {}
    for c, k in enumerate(keep):
        cols.setdefault(k, []).append(c)
    out = np.empty((size, len(keep)), dtype=np.int64)
    z = np.full(size, table.x, dtype=np.int64)
    for c in cols.get(0, ()):
        out[:, c] = z
    for j in range(table.n):
        targets = z[:, None] + offsets[None, :]
        ok = (targets >= 0) & (targets < width)
        w = np.where(ok, probs[None, :] * h[j + 1][np.clip(targets, 0, width - 1)], 0.0)
        z = _choose(targets, w, rng)
        for c in cols.get(j + 1, ()):
            out[:, c] = z
    return out


def sample_bridge(table: BridgeTable, rng: np.random.Generator) -> LatticePath:
    return LatticePath.from_positions(sample_bridges(table, 1, rng)[0])


def bridge_marginal_exact(law: StepLaw, x: int, y: int, n: int, m: int) -> LatticePmf:
    """``P[S_m = z | S_0 = x, S_n = y, killed walk alive]``.

    The forward factor is the killed DP from x; the backward factor
    ``P_z[S^_{n-m} = y]`` is read by time reversal as the killed DP of the
    reversed law started at y.
    """
    if not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got m = {m}, n = {n}")
    fwd = killed_final(law, x, m)
    bwd = killed_final(law.reversed(), y, n - m)
    k = min(len(fwd), len(bwd))
    joint = fwd[:k] * bwd[:k]
    total = joint.sum()
    if total <= 0:
        raise UnreachableError(f"P_{x}[killed walk at {y} after {n} steps] = 0")
    return LatticePmf(0, joint / total)


def rescale_path(positions: Sequence[int] | np.ndarray | LatticePath, n: int, a_n: float,
                 grid: Sequence[float]) -> list[float]:
    """Evaluate ``t -> S_floor(n t) / a_n`` on the grid."""
    if isinstance(positions, LatticePath):
        positions = positions.positions
    positions = np.asarray(positions)
    if len(positions) < n + 1:
        raise DomainError(f"path has {len(positions) - 1} steps, need {n}")
    out = []
    for t in grid:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"grid time {t} outside [0, 1]")
        out.append(float(positions[math.floor(n * t)]) / a_n)
    return out
