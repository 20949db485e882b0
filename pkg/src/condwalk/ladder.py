"""Killed-walk kernels, ladder laws and renewal functions.

Conventions used throughout:

* ``T^-`` is the first time the walk started at 0 is strictly negative,
  ``H^- = -S_{T^-}``;
* ``T^+`` is the first time ``j >= 1`` with ``S_j >= 0`` (weak ascent),
  ``H^+ = S_{T^+}``;
* ``V(x) = sum_k P(H^-_k <= x)`` and ``U(x) = sum_k P(H^+_k <= x)``.

Because the support is finite, the ladder height laws are obtained exactly
from the Wiener-Hopf factorization ``1 - phi(z) = (1 - E z^{-H^-})(1 - E z^{H^+})``
of the step generating function: the first factor collects the roots of
``z^D (1 - phi(z))`` in the closed unit disk, the second the rest.  The
time-truncated ladder DP (:func:`first_ladder_laws`) is kept as an independent
route and as the source of the epoch tails.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import DomainError, NumericError, TableInconsistencyError, TruncationError
from .steplaw import LatticePmf, StepLaw

log = logging.getLogger(__name__)

RENEWAL_SCHEMA = "condwalk.renewal/1"
HARMONICITY_TOL = 1e-9
DEFAULT_X_MAX = 256
DEFAULT_N_MAX = 2**14


def killed_step(row: np.ndarray, law: StepLaw) -> np.ndarray:
    """One step of the killed walk: convolve, then drop negative states."""
    return np.convolve(row, law.kernel)[law.max_down:]


def killed_rows(law: StepLaw, start: int, horizon: int) -> Iterator[np.ndarray]:
    """Yield rows 0..horizon of ``z -> P_start[S^_j = z]`` (index = z)."""
    row = np.zeros(start + 1)
    row[start] = 1.0
    yield row
    for _ in range(horizon):
        row = killed_step(row, law)
        yield row


@dataclass(frozen=True)
class KilledDistribution:
    law: StepLaw
    start: int
    horizon: int
    survival: np.ndarray  # P_start[tau > j], j = 0..horizon
    final: np.ndarray
    rows: tuple[np.ndarray, ...] | None = None

    def row(self, j: int) -> LatticePmf:
        if not 0 <= j <= self.horizon:
            raise DomainError(f"row {j} outside [0, {self.horizon}]")
        if j == self.horizon:
            return LatticePmf(0, self.final)
        if self.rows is None:
            raise DomainError("intermediate rows were not stored (store_rows=False)")
        return LatticePmf(0, self.rows[j])


def killed_pmf(law: StepLaw, start: int, horizon: int, store_rows: bool = True) -> KilledDistribution:
    """Exact table of ``P_start[S^_j = z]`` for ``j <= horizon``, ``z >= 0``."""
    if start < 0:
        raise DomainError(f"killed walk needs start >= 0, got {start}")
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    rows = []
    surv = np.empty(horizon + 1)
    for j, row in enumerate(killed_rows(law, start, horizon)):
        surv[j] = row.sum()
        if store_rows:
            rows.append(row)
    return KilledDistribution(law, start, horizon, surv, row, tuple(rows) if store_rows else None)


def killed_final(law: StepLaw, start: int, n: int) -> np.ndarray:
    """Row n of the killed table only."""
    *_, row = killed_rows(law, start, n)
    return row


def survival_curve(law: StepLaw, start: int, n: int) -> np.ndarray:
    """``P_start[tau_(-inf,0) > j]`` for j = 0..n."""
    return killed_pmf(law, start, n, store_rows=False).survival


def survival(law: StepLaw, start: int, n: int) -> float:
    if start < 0:
        raise DomainError(f"killed walk needs start >= 0, got {start}")
    return float(killed_final(law, start, n).sum())


def strict_negative_rows(law: StepLaw, horizon: int) -> Iterator[np.ndarray]:
    """Rows of ``r -> P[S_1 < 0, ..., S_j < 0, S_j = -r - 1]`` for j = 0..horizon.

    Row 0 is empty (S_0 = 0 is not negative) but its total is reported as 1
    by :func:`first_ladder_laws` since no constraint has been imposed yet.
    """
    rev = law.reversed()
    yield np.zeros(0)
    if horizon == 0:
        return
    row = np.zeros(max(law.max_down, 1))
    for r in range(law.max_down):
        row[r] = law.pmf(-(r + 1))
    yield row
    for _ in range(horizon - 1):
        row = killed_step(row, rev)
        yield row


def u_mass(law: StepLaw, n: int, x: int) -> float:
    """``P[S_1 >= 0, ..., S_n >= 0, S_n = x]`` (equals the weak ascending renewal mass)."""
    if n < 0 or x < 0:
        raise DomainError(f"u(n, x) needs n, x >= 0; got ({n}, {x})")
    row = killed_final(law, 0, n)
    return float(row[x]) if x < len(row) else 0.0


def v_mass(law: StepLaw, n: int, x: int) -> float:
    """``P[S_j > -x for j < n, S_n = -x]``: n is a strict descending ladder epoch at height x."""
    if n < 1 or x < 1:
        raise DomainError(f"v(n, x) needs n, x >= 1; got ({n}, {x})")
    # shift by x - 1 so that {S > -x} becomes the non-negative half-line
    row = killed_final(law, x - 1, n - 1)
    total = 0.0
    for w in range(len(row)):
        total += row[w] * law.pmf(-1 - w)
    return float(total)


@dataclass(frozen=True)
class FirstLadderLaws:
    """Joint laws of the first ladder points up to an epoch horizon.

    ``minus_joint[n, h] = P[T^- = n, H^- = h]`` (h >= 1),
    ``plus_joint[n, h] = P[T^+ = n, H^+ = h]`` (h >= 0),
    ``minus_tail[n] = P[T^- > n]``, ``plus_tail[n] = P[T^+ > n]``.
    """

    n_max: int
    minus_joint: np.ndarray
    plus_joint: np.ndarray
    minus_tail: np.ndarray
    plus_tail: np.ndarray

    @property
    def truncation_error(self) -> float:
        return float(self.minus_tail[-1] + self.plus_tail[-1])

    @property
    def h_minus_partial(self) -> np.ndarray:
        """Marginal of H^- restricted to T^- <= n_max (index = height)."""
        return self.minus_joint.sum(axis=0)

    @property
    def h_plus_partial(self) -> np.ndarray:
        return self.plus_joint.sum(axis=0)


def first_ladder_laws(law: StepLaw, n_max: int) -> FirstLadderLaws:
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    D, U = law.max_down, law.max_up
    minus = np.zeros((n_max + 1, D + 1))
    m_tail = np.empty(n_max + 1)
    prev = None
    for n, row in enumerate(killed_rows(law, 0, n_max)):
        m_tail[n] = row.sum()
        if prev is not None:
            for h in range(1, D + 1):
                w = np.arange(min(len(prev), D - h + 1))
                minus[n, h] = np.dot(prev[w], law.kernel[D - h - w])
        prev = row

    plus = np.zeros((n_max + 1, U + 1))
    p_tail = np.empty(n_max + 1)
    for n, row in enumerate(strict_negative_rows(law, n_max)):
        p_tail[n] = 1.0 if n == 0 else row.sum()
        if n == 0:
            continue
        if n == 1:
            for h in range(U + 1):
                plus[1, h] = law.pmf(h)
        else:
            for h in range(U + 1):
                r = np.arange(min(len(prev), U - h))
                plus[n, h] = np.dot(prev[r], law.kernel[D + h + r + 1])
        prev = row
    return FirstLadderLaws(n_max, minus, plus, m_tail, p_tail)


@dataclass(frozen=True)
class LadderHeightLaws:
    """Exact laws of ``H^-_1`` (index 1..D) and ``H^+_1`` (index 0..U)."""

    h_minus: np.ndarray  # h_minus[0] = 0
    h_plus: np.ndarray
    residual: float


def _deflate_double_root_at_one(coeffs_desc: list[Fraction]) -> list[Fraction]:
    for _ in range(2):
        out = [coeffs_desc[0]]
        for c in coeffs_desc[1:]:
            out.append(c + out[-1])
        if out[-1] != 0:
            raise NumericError("z = 1 is not a double root of z^D(1 - phi(z))", float(abs(out[-1])))
        coeffs_desc = out[:-1]
    return coeffs_desc


@lru_cache(maxsize=64)
def ladder_height_laws(law: StepLaw) -> LadderHeightLaws:
    """Ladder height laws via the Wiener-Hopf factorization at s = 1."""
    D, U = law.max_down, law.max_up
    # ascending coefficients of z^D (1 - phi(z)), exact
    asc = [Fraction(0)] * (D + U + 1)
    asc[D] += 1
    for k, p in law.support:
        asc[k + D] -= p
    rest = _deflate_double_root_at_one(asc[::-1])
    roots = np.roots([float(c) for c in rest]) if len(rest) > 1 else np.zeros(0)
    if len(roots) and np.min(np.abs(np.abs(roots) - 1.0)) < 1e-9:
        raise NumericError("extra root on the unit circle (law is effectively periodic)",
                           float(np.min(np.abs(np.abs(roots) - 1.0))))
    inside = np.concatenate([[1.0], roots[np.abs(roots) < 1.0]])
    if len(inside) != D:
        raise NumericError(f"expected {D} roots in the closed unit disk, found {len(inside)}", 0.0)
    monic = np.poly(inside)  # descending, degree D
    imag = float(np.max(np.abs(np.imag(monic))))
    monic = np.real(monic)
    h_minus = np.concatenate([[0.0], -monic[1:]])
    quot, rem = np.polydiv(np.array([float(c) for c in asc[::-1]]), monic)
    q_asc = quot[::-1]
    h_plus = np.concatenate([[1.0 - q_asc[0]], -q_asc[1:]])
    residual = max(
        imag,
        float(np.max(np.abs(rem))) if len(rem) else 0.0,
        abs(1.0 - h_minus.sum()),
        abs(1.0 - h_plus.sum()),
        float(-min(h_minus.min(), h_plus.min(), 0.0)),
    )
    return LadderHeightLaws(h_minus, h_plus, residual)


def _renewal(f: np.ndarray, x_max: int) -> np.ndarray:
    """Solve ``R(x) = 1 + sum_{h=0}^{x} f_h R(x - h)`` for x = 0..x_max."""
    out = np.empty(x_max + 1)
    denom = 1.0 - f[0]
    for x in range(x_max + 1):
        h = np.arange(1, min(x, len(f) - 1) + 1)
        out[x] = (1.0 + np.dot(f[h], out[x - h])) / denom
    return out


def renewal_V(law: StepLaw, x_max: int = DEFAULT_X_MAX, n_max: int = DEFAULT_N_MAX,
              method: str = "factorization", tol: float = 1e-10) -> np.ndarray:
    """V(0..x_max).

    ``method="factorization"`` uses the exact ladder height law;
    ``method="ladder_dp"`` uses the H^- marginal of :func:`first_ladder_laws`
    truncated at ``n_max`` and raises :class:`TruncationError` when the
    missing mass ``P[T^- > n_max]`` exceeds ``tol``.
    """
    if x_max < 0:
        raise DomainError(f"x_max must be >= 0, got {x_max}")
    if method == "factorization":
        hl = ladder_height_laws(law)
        if hl.residual > tol:
            raise TruncationError("Wiener-Hopf factorization residual above budget", hl.residual)
        f = hl.h_minus
    elif method == "ladder_dp":
        fl = first_ladder_laws(law, n_max)
        if fl.minus_tail[-1] > tol:
            raise TruncationError(f"P[T^- > {n_max}] exceeds budget", float(fl.minus_tail[-1]))
        f = fl.h_minus_partial
    else:
        raise DomainError(f"unknown method {method!r}")
    return _renewal(f, x_max)


def renewal_U(law: StepLaw, x_max: int = DEFAULT_X_MAX, n_max: int = DEFAULT_N_MAX,
              method: str = "factorization", tol: float = 1e-10) -> np.ndarray:
    """U(0..x_max); see :func:`renewal_V` and :func:`renewal_U_partial`."""
    if x_max < 0:
        raise DomainError(f"x_max must be >= 0, got {x_max}")
    if method == "factorization":
        hl = ladder_height_laws(law)
        if hl.residual > tol:
            raise TruncationError("Wiener-Hopf factorization residual above budget", hl.residual)
        return _renewal(hl.h_plus, x_max)
    if method == "partial_sums":
        partial, tail = renewal_U_partial(law, x_max, n_max)
        if tail.max() > tol:
            raise TruncationError(f"U tail beyond n = {n_max} exceeds budget", float(tail.max()))
        return partial
    raise DomainError(f"unknown method {method!r}")


def renewal_U_partial(law: StepLaw, x_max: int, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Partial sums ``sum_{n<=n_max} sum_{y<=x} u(n, y)`` and a tail estimate.

    The estimate extrapolates ``u(n, .)`` beyond ``n_max`` with the
    ``n^{-3/2}`` envelope of the local estimate for ``u`` and a safety
    factor 2, i.e. ``4 n_max sum_{y<=x} u(n_max, y)``.  It is an estimate,
    not a proof.
    """
    partial = np.zeros(x_max + 1)
    last = np.zeros(x_max + 1)
    for row in killed_rows(law, 0, n_max):
        cut = np.zeros(x_max + 1)
        k = min(len(row), x_max + 1)
        cut[:k] = row[:k]
        last = np.cumsum(cut)
        partial += last
    return partial, 4.0 * n_max * last


def harmonicity_error(law: StepLaw, V: np.ndarray) -> float:
    """max_x |sum_{y>=0} V(y) P[X = y - x] - V(x)| over x in [0, len(V) - 1 - max_up]."""
    D, U = law.max_down, law.max_up
    n_inner = len(V) - U
    if n_inner <= 0:
        return 0.0
    padded = np.concatenate([np.zeros(D), V])
    lhs = np.correlate(padded, law.kernel, mode="valid")[:n_inner]
    return float(np.max(np.abs(lhs - V[:n_inner])))


@dataclass(frozen=True)
class RenewalTable:
    law: StepLaw
    x_max: int
    n_max: int
    V: np.ndarray
    U: np.ndarray
    h_minus_pmf: dict[int, float]
    h_plus_pmf: dict[int, float]
    t_minus_tail: np.ndarray
    t_plus_tail: np.ndarray
    truncation_error: float
    dp_truncation: float = field(default=0.0)

    def check_harmonicity(self, tol: float = HARMONICITY_TOL) -> float:
        err = harmonicity_error(self.law, self.V)
        if err > tol:
            raise TableInconsistencyError(f"V fails harmonicity for law {self.law}: max error {err:.3e} > {tol:.0e}")
        return err

    def to_json(self, **meta) -> str:
        """Versioned JSON; ``meta`` (e.g. seed) is stored alongside and ignored on load."""
        doc = {
            **meta,
            "schema": RENEWAL_SCHEMA,
            "law": {"name": self.law.name, "support": [[k, str(p)] for k, p in self.law.support]},
            "x_max": self.x_max,
            "n_max": self.n_max,
            "V": self.V.tolist(),
            "U": self.U.tolist(),
            "h_minus_pmf": {str(k): v for k, v in self.h_minus_pmf.items()},
            "h_plus_pmf": {str(k): v for k, v in self.h_plus_pmf.items()},
            "t_minus_tail": self.t_minus_tail.tolist(),
            "t_plus_tail": self.t_plus_tail.tolist(),
            "truncation_error": self.truncation_error,
            "dp_truncation": self.dp_truncation,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RenewalTable":
        doc = json.loads(text)
        if doc.get("schema") != RENEWAL_SCHEMA:
            raise TableInconsistencyError(f"unsupported renewal schema {doc.get('schema')!r}")
        law = StepLaw.from_mapping({int(k): Fraction(p) for k, p in doc["law"]["support"]},
                                   name=doc["law"]["name"])
        table = cls(
            law=law,
            x_max=int(doc["x_max"]),
            n_max=int(doc["n_max"]),
            V=np.asarray(doc["V"], dtype=float),
            U=np.asarray(doc["U"], dtype=float),
            h_minus_pmf={int(k): float(v) for k, v in doc["h_minus_pmf"].items()},
            h_plus_pmf={int(k): float(v) for k, v in doc["h_plus_pmf"].items()},
            t_minus_tail=np.asarray(doc["t_minus_tail"], dtype=float),
            t_plus_tail=np.asarray(doc["t_plus_tail"], dtype=float),
            truncation_error=float(doc["truncation_error"]),
            dp_truncation=float(doc.get("dp_truncation", 0.0)),
        )
        table.check_harmonicity()
        return table


@lru_cache(maxsize=16)
def build_renewal_table(law: StepLaw, x_max: int = DEFAULT_X_MAX, n_max: int = DEFAULT_N_MAX) -> RenewalTable:
    """Tabulate V, U, first ladder laws and epoch tails; cached per arguments."""
    hl = ladder_height_laws(law)
    fl = first_ladder_laws(law, n_max)
    table = RenewalTable(
        law=law,
        x_max=x_max,
        n_max=n_max,
        V=renewal_V(law, x_max),
        U=renewal_U(law, x_max),
        h_minus_pmf={h: float(hl.h_minus[h]) for h in range(1, len(hl.h_minus))},
        h_plus_pmf={h: float(hl.h_plus[h]) for h in range(len(hl.h_plus))},
        t_minus_tail=fl.minus_tail,
        t_plus_tail=fl.plus_tail,
        truncation_error=hl.residual,
        dp_truncation=fl.truncation_error,
    )
    table.check_harmonicity()
    log.debug("renewal table for %s: residual %.2e, dp tail %.2e", law, hl.residual, fl.truncation_error)
    return table


def duality_check(law: StepLaw, n: int, x: int) -> tuple[float, float]:
    """(u(n, x) from the killed DP, weak-ascending renewal mass at (n, x))."""
    if n < 0 or x < 0:
        raise DomainError(f"duality check needs n, x >= 0; got ({n}, {x})")
    lhs = u_mass(law, n, x)
    if n == 0:
        return lhs, 1.0 if x == 0 else 0.0
    f = first_ladder_laws(law, n).plus_joint
    hmax = f.shape[1] - 1
    u = np.zeros((n + 1, x + 1))
    u[0, 0] = 1.0
    for t in range(1, n + 1):
        for y in range(x + 1):
            acc = 0.0
            for s in range(1, t + 1):
                for h in range(min(y, hmax) + 1):
                    acc += f[s, h] * u[t - s, y - h]
            u[t, y] = acc
    return lhs, float(u[n, x])
