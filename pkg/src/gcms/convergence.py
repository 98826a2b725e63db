"""Cylinder values of the renewal measures as beta decreases to log 2.

For the renewal shift with the constant potential 1, a stem of the root {1}
family must end in 1, and from a letter a > 1 the only successor is a - 1.
So the cylinder of a word ending in a equals the cylinder of its completion
w (a-1) (a-2) ... 1, and the cylinder of a word ending in 1 has mass
exp(-beta * length).  The limit measure gives the same cylinder 2^-length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .conformal import Constant, AtomicMeasure, measure_of_cylinder, normalize, renewal_closed_form
from .dynamics import enumerate_finite_words
from .errors import BetaBelowCritical, PreconditionError
from .matrix import Root, renewal
from .words import Word, as_word, format_word, is_admissible

LOG2 = math.log(2.0)
_RENEWAL = renewal()


def completed_word(alpha: Sequence[int]) -> Word:
    """alpha followed by the forced descent to 1."""
    alpha = as_word(alpha)
    if not alpha:
        return ()
    return alpha + tuple(range(alpha[-1] - 1, 0, -1))


def _check(alpha: Sequence[int]) -> Word:
    alpha = as_word(alpha)
    if not is_admissible(_RENEWAL, alpha):
        raise PreconditionError(f"{format_word(alpha)} is not admissible for the renewal shift")
    return alpha


def mu_beta_on_cylinder(beta: float, alpha: Sequence[int]) -> float:
    """exp(-beta * |completed alpha|)."""
    alpha = _check(alpha)
    if not beta > LOG2:
        raise BetaBelowCritical(f"beta = {beta!r} must exceed log 2")
    if math.isinf(beta):
        return 1.0 if not alpha else 0.0
    return math.exp(-beta * len(completed_word(alpha)))


def limit_measure_on_cylinder(alpha: Sequence[int]) -> float:
    """2^-|completed alpha|."""
    return 2.0 ** -len(completed_word(_check(alpha)))


@dataclass(frozen=True)
class AtomRow:
    beta: float
    weight: float


def atom_mass_vanishes(alpha: Sequence[int], beta_seq: Iterable[float]) -> tuple[list[AtomRow], bool]:
    """Weights of the configuration (alpha, {1}) along beta_seq, and whether they decrease."""
    alpha = _check(alpha)
    if alpha and alpha[-1] != 1:
        raise PreconditionError("the configuration (alpha, {1}) needs alpha to end in 1")
    rows = [AtomRow(float(b), renewal_closed_form(float(b), len(alpha))) for b in beta_seq]
    decreasing = all(r2.weight < r1.weight for r1, r2 in zip(rows, rows[1:]))
    return rows, decreasing


@dataclass(frozen=True)
class ConvergenceReport:
    cylinders: tuple[Word, ...]
    betas: tuple[float, ...]
    values: tuple[tuple[tuple[float, float], ...], ...]  # per beta, per cylinder
    limit_values: tuple[float, ...]
    max_gap: tuple[float, ...]
    sources: tuple[str, ...]

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.max_gap, self.max_gap[1:]))

    def rows(self):
        """(alpha, beta, mu_beta, nu, gap) with mu_beta the interval midpoint."""
        for i, b in enumerate(self.betas):
            for j, a in enumerate(self.cylinders):
                lo, hi = self.values[i][j]
                mid = 0.5 * (lo + hi)
                yield format_word(a), b, mid, self.limit_values[j], abs(mid - self.limit_values[j])

    def to_json(self) -> dict:
        return {
            "cylinders": [format_word(a) for a in self.cylinders],
            "betas": list(self.betas),
            "values": [[list(iv) for iv in row] for row in self.values],
            "limit_values": list(self.limit_values),
            "max_gap": list(self.max_gap),
            "sources": list(self.sources),
            "monotone": self.monotone,
        }


def lipschitz_bound(cylinders: Iterable[Sequence[int]], beta: float) -> float:
    """Sum of |completed alpha| (beta - log 2) 2^-|completed alpha|, which dominates the gap."""
    return math.fsum(len(completed_word(a)) * (beta - LOG2) * 2.0 ** -len(completed_word(a)) for a in cylinders)


def converge_report(
    cylinders: Iterable[Sequence[int]],
    betas: Iterable[float],
    tol: float = 1e-9,
    atomic: bool = True,
) -> ConvergenceReport:
    """Cylinder values per beta and their distance to the limit values.

    When ``atomic`` is set and the certified measure is affordable, values
    are intervals from the atomic measure; otherwise the closed form is used.
    """
    cyl = tuple(_check(a) for a in cylinders)
    bs = tuple(float(b) for b in betas)
    if any(b <= LOG2 for b in bs):
        raise BetaBelowCritical("every beta must exceed log 2")
    if any(b2 >= b1 for b1, b2 in zip(bs, bs[1:])):
        raise PreconditionError("betas must be strictly decreasing")
    limits = tuple(limit_measure_on_cylinder(a) for a in cyl)
    values, gaps, sources = [], [], []
    for b in bs:
        mu: AtomicMeasure | None = None
        if atomic:
            try:
                m = normalize(_RENEWAL, Constant(1.0), b, Root.of(1), tol, max_atoms=1)
                mu = m if isinstance(m, AtomicMeasure) else None
            except PreconditionError:
                mu = None
        if mu is not None:
            row = tuple(measure_of_cylinder(mu, a) for a in cyl)
            sources.append("atomic")
        else:
            row = tuple((mu_beta_on_cylinder(b, a),) * 2 for a in cyl)
            sources.append("closed form")
        values.append(row)
        gaps.append(max((max(abs(lo - nu), abs(hi - nu)) for (lo, hi), nu in zip(row, limits)), default=0.0))
    return ConvergenceReport(cyl, bs, tuple(values), limits, tuple(gaps), tuple(sources))


def auto_betas(start_offset: float = 0.3, steps: int = 8) -> list[float]:
    """log 2 + start_offset * (steps - i) / steps for i = 0..steps-1."""
    if steps < 1 or start_offset <= 0:
        raise PreconditionError("need a positive offset and at least one step")
    return [LOG2 + start_offset * (steps - i) / steps for i in range(steps)]


def renewal_cylinders(lengths: Iterable[int]) -> list[Word]:
    """Admissible renewal words ending in 1 with the given lengths, sorted."""
    out = []
    for n in lengths:
        if n == 0:
            out.append(())
            continue
        out.extend(c.stem for c in enumerate_finite_words(_RENEWAL, Root.of(1), n))
    return out
