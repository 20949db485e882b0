"""Step distributions, exact unconditioned marginals and the norming sequence.

A :class:`StepLaw` is a finite-support, mean-zero, aperiodic distribution on
the integers.  Probabilities are kept as :class:`fractions.Fraction` so the
invariants can be checked exactly; the dynamic programs downstream run in
float64 on :attr:`StepLaw.kernel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DegenerateLawError, DomainError, InvariantError, UnreachableError

#: horizon of the return-time gcd used as the aperiodicity proxy
APERIODICITY_HORIZON = 64

BUILTIN_LAWS = {
    "lazy_srw": {-1: Fraction(1, 4), 0: Fraction(1, 2), 1: Fraction(1, 4)},
    "three_point": {-2: Fraction(1, 4), 0: Fraction(1, 4), 1: Fraction(1, 2)},
}


@dataclass(frozen=True)
class LatticePmf:
    """A (sub-)probability mass function on consecutive integers.

    ``probs[i]`` is the mass at position ``offset + i``.
    """

    offset: int
    probs: np.ndarray

    def __getitem__(self, z: int) -> float:
        i = z - self.offset
        if 0 <= i < len(self.probs):
            return float(self.probs[i])
        return 0.0

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.probs))

    def total(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> float:
        return float(np.dot(self.positions, self.probs) / self.total())

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.positions - m) ** 2, self.probs) / self.total())

    def to_dict(self, drop_zeros: bool = True) -> dict[int, float]:
        return {
            int(z): float(p)
            for z, p in zip(self.positions, self.probs)
            if p != 0 or not drop_zeros
        }


@dataclass(frozen=True)
class StepLaw:
    """Finite-support integer step law.

    ``offsets`` are strictly increasing; ``probs`` are exact rationals.
    Construction validates normalization, zero mean and aperiodicity and
    raises :class:`InvariantError` naming the first failing property.
    """

    offsets: tuple[int, ...]
    probs: tuple[Fraction, ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if len(self.offsets) == 0 or len(self.offsets) != len(self.probs):
            raise InvariantError("non-empty support", "offsets and probabilities must pair up")
        if list(self.offsets) != sorted(set(self.offsets)):
            raise InvariantError("distinct sorted offsets", f"got {self.offsets}")
        if any(p <= 0 for p in self.probs):
            raise InvariantError("positive probabilities", "every listed offset needs mass > 0")
        total = sum(self.probs, Fraction(0))
        if total != 1:
            raise InvariantError("probabilities sum to 1", f"sum = {total}")
        if self.exact_mean != 0:
            raise InvariantError("mean zero", f"mean = {self.exact_mean}")
        span = reduce(math.gcd, (abs(k) for k in self.offsets), 0)
        if span != 1:
            # return times can be aperiodic while the walk still lives on span * Z
            raise InvariantError("lattice span 1", f"gcd of offsets is {span}")
        period = self.period()
        if period != 1:
            raise InvariantError(
                "aperiodicity",
                f"gcd of return times <= {APERIODICITY_HORIZON} is {period}",
            )

    @classmethod
    def from_mapping(cls, mapping: dict[int, Fraction | float | str], name: str = "custom") -> "StepLaw":
        items = sorted((int(k), Fraction(v)) for k, v in mapping.items())
        return cls(tuple(k for k, _ in items), tuple(p for _, p in items), name=name)

    # exact moments
    @property
    def exact_mean(self) -> Fraction:
        return sum((k * p for k, p in zip(self.offsets, self.probs)), Fraction(0))

    @property
    def exact_variance(self) -> Fraction:
        return sum((k * k * p for k, p in zip(self.offsets, self.probs)), Fraction(0))

    @property
    def sigma2(self) -> float:
        return float(self.exact_variance)

    @property
    def support(self) -> list[tuple[int, Fraction]]:
        return list(zip(self.offsets, self.probs))

    @property
    def max_up(self) -> int:
        return max(0, self.offsets[-1])

    @property
    def max_down(self) -> int:
        """Largest downward jump as a non-negative integer."""
        return max(0, -self.offsets[0])

    @cached_property
    def kernel(self) -> np.ndarray:
        """Float kernel indexed by ``offset + max_down``."""
        k = np.zeros(self.max_down + self.max_up + 1)
        for off, p in self.support:
            k[off + self.max_down] = float(p)
        return k

    def pmf(self, offset: int) -> float:
        i = offset + self.max_down
        if 0 <= i < len(self.kernel):
            return float(self.kernel[i])
        return 0.0

    def reversed(self) -> "StepLaw":
        """Law of ``-X``: the time-reversed walk."""
        name = self.name[:-9] if self.name.endswith(":reversed") else self.name + ":reversed"
        return StepLaw.from_mapping({-k: p for k, p in self.support}, name=name)

    @property
    def is_symmetric(self) -> bool:
        return self.reversed() == self

    def period(self, horizon: int = APERIODICITY_HORIZON) -> int:
        """gcd of the n <= horizon with P[S_n = 0] > 0 (0 if there are none)."""
        reach = np.zeros(1, dtype=bool)
        reach[0] = True
        lo = 0
        mask = self.kernel > 0
        returns = []
        for n in range(1, horizon + 1):
            reach = np.convolve(reach.astype(np.int64), mask.astype(np.int64)) > 0
            lo -= self.max_down
            if 0 <= -lo < len(reach) and reach[-lo]:
                returns.append(n)
        return reduce(math.gcd, returns, 0)

    def to_text(self) -> str:
        return "".join(f"{k} {p}\n" for k, p in self.support)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LatticePath:
    """A lattice path ``start, start + steps[0], ...``."""

    start: int
    steps: tuple[int, ...]

    @classmethod
    def from_positions(cls, positions: Sequence[int]) -> "LatticePath":
        pos = [int(p) for p in positions]
        return cls(pos[0], tuple(b - a for a, b in zip(pos, pos[1:])))

    @property
    def positions(self) -> np.ndarray:
        return np.concatenate([[self.start], self.start + np.cumsum(self.steps, dtype=np.int64)]).astype(np.int64)

    def __len__(self) -> int:
        return len(self.steps)

    def validate(self, law: StepLaw) -> None:
        allowed = set(law.offsets)
        for i, s in enumerate(self.steps):
            if s not in allowed:
                raise InvariantError("steps drawn from support", f"step {i} = {s}")


def make_builtin_law(name: str) -> StepLaw:
    try:
        mapping = BUILTIN_LAWS[name]
    except KeyError:
        raise ConfigError(f"unknown law {name!r}; known: {', '.join(sorted(BUILTIN_LAWS))}") from None
    return StepLaw.from_mapping(mapping, name=name)


def parse_law_text(text: str, name: str = "custom") -> StepLaw:
    """Parse ``offset probability`` lines; ``#`` starts a comment.

    Probabilities may be rationals (``1/4``) or decimals (``0.25``); both
    are converted exactly.
    """
    mapping: dict[int, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"line {lineno}: expected 'offset probability', got {raw!r}")
        try:
            off = int(parts[0])
            prob = Fraction(parts[1])
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        if off in mapping:
            raise InvariantError("distinct offsets", f"offset {off} repeated on line {lineno}")
        mapping[off] = prob
    if not mapping:
        raise InvariantError("non-empty support", "no entries found")
    return StepLaw.from_mapping(mapping, name=name)


def load_law(spec: str | Path) -> StepLaw:
    """Resolve a builtin name or read a law file."""
    spec = str(spec)
    if spec in BUILTIN_LAWS:
        return make_builtin_law(spec)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"law {spec!r} is neither a builtin nor an existing file")
    return parse_law_text(path.read_text(), name=path.stem)


def _convolve_steps(probs: np.ndarray, law: StepLaw, n: int) -> np.ndarray:
    for _ in range(n):
        probs = np.convolve(probs, law.kernel)
    return probs


def walk_pmf(law: StepLaw, n: int) -> LatticePmf:
    """Exact law of ``S_n`` started at 0, on ``[-n*max_down, n*max_up]``."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return LatticePmf(-n * law.max_down, _convolve_steps(np.ones(1), law, n))


def walk_pmf_sequence(law: StepLaw, n_max: int) -> Iterable[tuple[int, LatticePmf]]:
    """Yield ``(n, walk_pmf(law, n))`` for n = 0..n_max, reusing the DP."""
    probs = np.ones(1)
    for n in range(n_max + 1):
        yield n, LatticePmf(-n * law.max_down, probs)
        probs = np.convolve(probs, law.kernel)


def norming(law: StepLaw, n: int) -> float:
    """a_n = sigma * sqrt(n)."""
    if law.exact_variance == 0:
        raise DegenerateLawError(f"law {law} has zero variance; no norming sequence")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return math.sqrt(law.sigma2 * n)


def normal_density(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def llt_ratio(law: StepLaw, n: int, y: int, pmf: LatticePmf | None = None) -> float:
    """a_n P[S_n = y] / phi(y / a_n); tends to 1 by the local limit theorem."""
    pmf = walk_pmf(law, n) if pmf is None else pmf
    mass = pmf[y]
    if mass <= 0:
        raise UnreachableError(f"P[S_{n} = {y}] = 0 for law {law}: lattice point unreachable")
    a_n = norming(law, n)
    return a_n * mass / normal_density(y / a_n)
