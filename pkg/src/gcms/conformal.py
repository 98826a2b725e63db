"""Atomic conformal measures supported on finite-stem configurations.

For a root R and a potential F the candidate measure gives the configuration
(w, R) the weight c_e * exp(-beta * S F(w)), where S F(w) is the sum of F over
the letters of the stem w.  The normalizing constant is c_e = 1 / (1 + S),
where S sums exp(-beta * S F(w)) over all nonempty stems of the family.

The family sum is organized by first letter.  With D(x) = exp(-beta F(x)) the
first-letter masses T solve

    T[x] = D(x) * ([x in R] + sum_{y : A(x, y) = 1} T[y]).

For column-finite matrices whose columns stay below j + g, every stem of
length at most L + 1 uses letters at most max(R) + g L, so solving the system
on that finite alphabet captures those stems exactly and misses at most a
geometric tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.linalg import spsolve

from .errors import BetaBelowCritical, PreconditionError, StemTooShort, UnsupportedRoot
from .matrix import Root, TransitionMatrix, column_limit_points
from .words import Configuration, Word, as_word, format_word, is_admissible

LOG2 = math.log(2.0)
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ATOMS = 8192
MAX_SOLVE_LETTERS = 400_000
MAX_DP_LENGTH = 2_000
MAX_DP_SUPPORT = 200_000


# ---------------------------------------------------------------------------
# potentials


class Potential:
    """A potential depending on the first stem letter only."""

    def letter(self, x: int) -> float:
        raise NotImplementedError

    @property
    def inf(self) -> float:
        raise NotImplementedError

    @property
    def sup(self) -> float:
        raise NotImplementedError

    def __call__(self, xi: Configuration) -> float:
        if xi.is_finite and not xi.stem:
            raise StemTooShort("potentials are defined on nonempty stems")
        return self.letter(xi.first_letter())

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Potential):
    c: float

    def letter(self, x: int) -> float:
        return self.c

    @property
    def inf(self) -> float:
        return self.c

    @property
    def sup(self) -> float:
        return self.c

    def spec(self) -> str:
        return f"const:{self.c:.17g}"


@dataclass(frozen=True)
class FirstLetter(Potential):
    """Values for finitely many letters and a default for all others."""

    values: tuple[tuple[int, float], ...]
    default: float

    @classmethod
    def from_mapping(cls, values: dict, default: float) -> "FirstLetter":
        return cls(tuple(sorted((int(k), float(v)) for k, v in values.items())), float(default))

    def letter(self, x: int) -> float:
        for k, v in self.values:
            if k == x:
                return v
        return self.default

    @property
    def inf(self) -> float:
        return min([self.default] + [v for _, v in self.values])

    @property
    def sup(self) -> float:
        return max([self.default] + [v for _, v in self.values])

    def spec(self) -> str:
        return "first:" + ",".join(f"{k}={v:.17g}" for k, v in self.values) + f";default={self.default:.17g}"


@dataclass(frozen=True)
class LogRatio(Potential):
    """F(x) = log(x_0) - log(x_0 + 1)."""

    def letter(self, x: int) -> float:
        return math.log(x) - math.log(x + 1)

    @property
    def inf(self) -> float:
        return -LOG2

    @property
    def sup(self) -> float:
        return 0.0

    def spec(self) -> str:
        return "logratio"


@dataclass(frozen=True)
class Scaled(Potential):
    """factor * F."""

    base: Potential
    factor: float

    def letter(self, x: int) -> float:
        return self.factor * self.base.letter(x)

    @property
    def inf(self) -> float:
        a, b = self.factor * self.base.inf, self.factor * self.base.sup
        return min(a, b)

    @property
    def sup(self) -> float:
        a, b = self.factor * self.base.inf, self.factor * self.base.sup
        return max(a, b)

    def spec(self) -> str:
        return f"scaled:{self.factor:.17g}*{self.base.spec()}"


def birkhoff_sum(F: Potential, xi: Configuration, n: int) -> float:
    """Sum of F over the first n shifts of xi."""
    if n < 1:
        raise PreconditionError("n must be positive")
    stem = xi.stem_prefix(n)
    if len(stem) < n:
        raise StemTooShort(f"stem of length {len(stem)} is shorter than {n}")
    return math.fsum(F.letter(x) for x in stem)


def _stem_sum(F: Potential, stem: Sequence[int]) -> float:
    return math.fsum(F.letter(x) for x in stem)


def coefficient(F: Potential, beta: float, xi: Configuration) -> float:
    """exp(-beta * S F(stem)), equal to 1 on the empty stem."""
    if not xi.is_finite:
        raise PreconditionError("coefficients are defined for finite stems")
    return math.exp(-beta * _stem_sum(F, xi.stem)) if xi.stem else 1.0


def renewal_closed_form(beta: float, n: int) -> float:
    """exp(-n beta) (e^beta - 2) / (e^beta - 1) for the renewal shift with F = 1."""
    if n < 0:
        raise PreconditionError("n must be nonnegative")
    if not beta > LOG2:
        raise BetaBelowCritical(f"beta = {beta!r} must exceed log 2")
    if math.isinf(beta):
        return 1.0 if n == 0 else 0.0
    # (e^b - 2)/(e^b - 1) = (1 - 2e^-b)/(1 - e^-b), stable for large beta
    return math.exp(-n * beta) * (-math.expm1(math.log(2.0) - beta)) / (-math.expm1(-beta))


# ---------------------------------------------------------------------------
# tail certificates


def geometric_tail(n_roots: int, branching: int, x: float, L: int) -> float:
    """Closed form of sum_{n > L} n_roots * branching**(n-1) * x**n.

    This bounds the unnormalized mass of stems longer than L when each of
    them has weight at most x per letter.  Infinite unless branching * x < 1.
    """
    q = branching * x
    if q >= 1.0:
        return math.inf
    return n_roots * x * q**L / (1.0 - q)


def truncation_length(n_roots: int, branching: int, x: float, tol: float) -> int:
    """Smallest L with geometric_tail(..., L) <= tol."""
    q = branching * x
    if q >= 1.0:
        raise PreconditionError("the geometric bound does not converge")
    if n_roots * x / (1.0 - q) <= tol:
        return 0
    L = math.ceil(math.log(tol * (1.0 - q) / (n_roots * x)) / math.log(q))
    L = max(L, 0)
    while L > 0 and geometric_tail(n_roots, branching, x, L - 1) <= tol:
        L -= 1
    while geometric_tail(n_roots, branching, x, L) > tol:
        L += 1
    return L


# ---------------------------------------------------------------------------
# family masses


def _weights(F: Potential, beta: float, K: int) -> np.ndarray:
    return np.array([math.exp(-beta * F.letter(x)) for x in range(1, K + 1)])


def _adjacency(A: TransitionMatrix, K: int) -> csr_matrix:
    rows, cols = [], []
    for y in range(1, K + 1):
        for i in A.column(y):
            if i <= K:
                rows.append(i - 1)
                cols.append(y - 1)
    return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(K, K))


@dataclass(frozen=True)
class FamilyMass:
    """First-letter masses of one root family on letters 1..K.

    ``first[x-1]`` approximates T[x]; ``follow[y-1]`` approximates the sum of
    T[x] over successors x of y.  ``total`` is the sum of ``first`` and
    ``tail`` bounds the unnormalized mass the truncation misses.
    """

    root: Root
    K: int
    first: np.ndarray
    follow: np.ndarray
    total: float
    tail: float
    method: str

    @property
    def c_empty(self) -> float:
        return 1.0 / (1.0 + self.total)

    @property
    def c_empty_bracket(self) -> tuple[float, float]:
        return 1.0 / (1.0 + self.total + self.tail), 1.0 / (1.0 + self.total)

    def extension_mass(self, alpha: Word) -> float:
        """Unnormalized mass of stems of the family extending alpha, divided by P(alpha)."""
        if not alpha:
            return 1.0 + self.total
        last = alpha[-1]
        own = 1.0 if last in self.root else 0.0
        return own + (float(self.follow[last - 1]) if last <= self.K else 0.0)


def _solve_family(A: TransitionMatrix, F: Potential, beta: float, root: Root, L: int, tail: float) -> FamilyMass:
    g = A.column_growth
    K = max(root.as_tuple()) + g * L
    if K > MAX_SOLVE_LETTERS:
        raise PreconditionError(f"truncation needs {K} letters, above the limit {MAX_SOLVE_LETTERS}")
    d = _weights(F, beta, K)
    P = _adjacency(A, K)
    r = np.zeros(K)
    for s in root.as_tuple():
        if s <= K:
            r[s - 1] = 1.0
    # reversed letter order keeps the LU factors of the dense first row sparse
    perm = np.arange(K)[::-1]
    M = (identity(K, format="csr") - csr_matrix(d[:, None]).multiply(P).tocsr())[perm][:, perm]
    T = spsolve(M.tocsc(), (d * r)[perm])[np.argsort(perm)]
    T = np.maximum(T, 0.0)
    follow = P @ T
    return FamilyMass(root, K, T, follow, float(math.fsum(T)), tail, "linear solve")


def length_masses(A: TransitionMatrix, F: Potential, beta: float, root: Root, L: int) -> list[dict[int, float]]:
    """Per length n = 1..L, the map first letter -> unnormalized mass of stems of length n."""
    D = {}

    def w(x: int) -> float:
        if x not in D:
            D[x] = math.exp(-beta * F.letter(x))
        return D[x]

    level = {s: w(s) for s in root.as_tuple()}
    out = [level]
    for _ in range(L - 1):
        nxt: dict[int, float] = {}
        for y, m in level.items():
            for x in A.column(y):
                nxt[x] = nxt.get(x, 0.0) + w(x) * m
        if len(nxt) > MAX_DP_SUPPORT:
            raise PreconditionError("stem letters grow too fast for the length recursion")
        level = nxt
        out.append(level)
    return out


def _dp_family(A: TransitionMatrix, F: Potential, beta: float, root: Root, L: int, tail: float) -> FamilyMass:
    if L + 1 > MAX_DP_LENGTH:
        raise PreconditionError(f"truncation length {L} exceeds {MAX_DP_LENGTH}")
    levels = length_masses(A, F, beta, root, L + 1)
    K = max(max(lv) for lv in levels)
    first = np.zeros(K)
    for lv in levels:
        for x, m in lv.items():
            first[x - 1] += m
    # follow[y] sums first[x] over successors x of y
    follow = np.zeros(K)
    for x in range(1, K + 1):
        if first[x - 1]:
            for y in A.column(x):
                if y <= K:
                    follow[y - 1] += first[x - 1]
    return FamilyMass(root, K, first, follow, float(math.fsum(first)), tail, "length recursion")


def family_mass(A: TransitionMatrix, F: Potential, beta: float, root: Root, tol: float) -> FamilyMass:
    """Certified first-letter masses, or PreconditionError when no certificate applies."""
    if root.is_all:
        raise UnsupportedRoot("the all-symbols root has no atomic measure")
    b = A.branching_bound
    if b is None or not A.column_finite:
        raise PreconditionError("a certified tail needs a column-finite matrix with bounded columns")
    x = math.exp(-beta * F.inf)
    n_roots = len(root.as_tuple())
    L = truncation_length(n_roots, b, x, tol)
    tail = geometric_tail(n_roots, b, x, L + 1)
    if A.column_growth is not None:
        return _solve_family(A, F, beta, root, L, tail)
    return _dp_family(A, F, beta, root, L, tail)


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class Component:
    weight: float
    family: FamilyMass


@dataclass(frozen=True)
class AtomicMeasure:
    """Explicit atoms up to ``depth`` plus the aggregated family masses.

    ``atoms`` holds every configuration of each family with stem length at
    most ``depth``.  ``adjustments`` records deliberate edits of atom weights
    so that cylinder masses stay consistent with the atoms.
    """

    matrix: TransitionMatrix
    potential: Potential
    beta: float
    atoms: dict
    components: tuple[Component, ...]
    depth: int
    tail_bound: float
    adjustments: dict = field(default_factory=dict)

    @property
    def root_tag(self) -> str:
        roots = [c.family.root for c in self.components if c.weight > 0]
        return str(roots[0]) if len(roots) == 1 else "mixed"

    @property
    def c_empty(self) -> float | None:
        if len(self.components) != 1:
            return None
        return self.components[0].weight * self.components[0].family.c_empty

    def weight(self, xi: Configuration) -> float:
        return self.atoms.get(xi, 0.0)

    def to_json(self, max_atoms: int | None = None) -> dict:
        items = sorted(self.atoms.items(), key=lambda kv: (len(kv[0].stem), kv[0].root.sort_key(), kv[0].stem))
        if max_atoms is not None:
            items = items[:max_atoms]
        return {
            "root": self.root_tag,
            "beta": self.beta,
            "potential": self.potential.spec(),
            "c_empty": self.c_empty,
            "tail_bound": self.tail_bound,
            "depth": self.depth,
            "n_atoms": len(self.atoms),
            "components": [
                {"root": c.family.root.to_json(), "weight": c.weight, "c_empty": c.family.c_empty, "letters": c.family.K, "method": c.family.method}
                for c in self.components
            ],
            "atoms": [{"stem": list(k.stem), "root": k.root.to_json(), "weight": v} for k, v in items],
        }


@dataclass(frozen=True)
class Divergent:
    threshold: float
    reason: str

    def to_json(self) -> dict:
        return {"status": "Divergent", "threshold": self.threshold, "reason": self.reason}


@dataclass(frozen=True)
class Undetermined:
    partial_sums: tuple[tuple[int, float], ...]
    reason: str

    def to_json(self) -> dict:
        return {"status": "Undetermined", "reason": self.reason, "partial_sums": [list(p) for p in self.partial_sums]}


def _explicit_atoms(A: TransitionMatrix, F: Potential, beta: float, root: Root, scale: float, max_atoms: int) -> tuple[dict, int]:
    """All stems of the family level by level while the total stays below max_atoms."""
    atoms = {Configuration((), root): scale}
    level = {(s,): scale * math.exp(-beta * F.letter(s)) for s in root.as_tuple()}
    depth = 0
    while level and len(atoms) + len(level) <= max_atoms:
        depth += 1
        for w, v in level.items():
            atoms[Configuration(w, root)] = v
        nxt = {}
        for w, v in level.items():
            for x in A.column(w[0]):
                nxt[(x,) + w] = v * math.exp(-beta * F.letter(x))
        level = nxt
    return atoms, depth


def divergence_threshold(A: TransitionMatrix, F: Potential, root: Root) -> float | None:
    """beta at or below which no probability exists, when the comparison with the renewal applies."""
    if not A.dominates_renewal or 1 not in root:
        return None
    if F.sup <= 0:
        return math.inf
    return LOG2 / F.sup


def convergence_threshold(A: TransitionMatrix, F: Potential) -> float | None:
    """beta above which the geometric bound certifies a probability."""
    b = A.branching_bound
    if b is None or F.inf <= 0:
        return None
    return math.log(b) / F.inf


def _partial_sums(A: TransitionMatrix, F: Potential, beta: float, root: Root, L: int = 200) -> tuple[tuple[int, float], ...]:
    out = []
    acc = 0.0
    try:
        levels = length_masses(A, F, beta, root, L)
    except PreconditionError:
        return ()
    for n, lv in enumerate(levels, start=1):
        acc += math.fsum(lv.values())
        if n in (1, 2, 5, 10, 20, 50, 100, 200) or n == L:
            out.append((n, acc))
    return tuple(out)


def normalize(
    A: TransitionMatrix,
    F: Potential,
    beta: float,
    root: Root,
    tol: float = DEFAULT_TOL,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    horizon: int = 64,
) -> AtomicMeasure | Divergent | Undetermined:
    """The probability measure carried by one empty-word family, when it exists."""
    if beta <= 0:
        raise PreconditionError("beta must be positive")
    if root.is_all:
        raise UnsupportedRoot("the all-symbols root has no atomic measure")
    if root not in column_limit_points(A, horizon):
        raise PreconditionError(f"{root} is not a column limit point of {A.name}")
    up = convergence_threshold(A, F)
    if up is not None and beta > up:
        fam = family_mass(A, F, beta, root, tol)
        atoms, depth = _explicit_atoms(A, F, beta, root, fam.c_empty, max_atoms)
        return AtomicMeasure(A, F, beta, atoms, (Component(1.0, fam),), depth, fam.c_empty * fam.tail)
    down = divergence_threshold(A, F, root)
    if down is not None and beta <= down:
        return Divergent(down, "at least 2^(n-1) stems of length n, each of weight at least exp(-n beta sup F)")
    return Undetermined(_partial_sums(A, F, beta, root), "beta lies between the proved thresholds")


def mixture(parts: Iterable[tuple[float, AtomicMeasure]]) -> AtomicMeasure:
    """Convex combination of single-family measures with the same matrix, potential and beta."""
    parts = [(float(w), m) for w, m in parts]
    if not parts:
        raise PreconditionError("empty mixture")
    if any(w < 0 for w, _ in parts) or abs(math.fsum(w for w, _ in parts) - 1.0) > 1e-12:
        raise PreconditionError("mixture weights must be nonnegative and sum to 1")
    A, F, beta = parts[0][1].matrix, parts[0][1].potential, parts[0][1].beta
    atoms: dict = {}
    comps = []
    for w, m in parts:
        if m.matrix != A or m.potential != F or m.beta != beta:
            raise PreconditionError("mixture parts must share matrix, potential and beta")
        for k, v in m.atoms.items():
            atoms[k] = atoms.get(k, 0.0) + w * v
        comps.extend(Component(w * c.weight, c.family) for c in m.components)
    depth = min(m.depth for _, m in parts)
    atoms = {k: v for k, v in atoms.items() if len(k.stem) <= depth}
    tail = math.fsum(w * m.tail_bound for w, m in parts)
    return AtomicMeasure(A, F, beta, atoms, tuple(comps), depth, tail)


def zero_measure(A: TransitionMatrix, F: Potential, beta: float) -> AtomicMeasure:
    return AtomicMeasure(A, F, beta, {}, (), 0, 0.0)


def perturb(mu: AtomicMeasure, xi: Configuration, delta: float) -> AtomicMeasure:
    """Add delta to the weight of one atom."""
    if xi not in mu.atoms:
        raise PreconditionError(f"{xi} is not an explicit atom")
    atoms = dict(mu.atoms)
    atoms[xi] += delta
    adj = dict(mu.adjustments)
    adj[xi] = adj.get(xi, 0.0) + delta
    return replace(mu, atoms=atoms, adjustments=adj)


def measure_of_cylinder(mu: AtomicMeasure, alpha: Sequence[int]) -> tuple[float, float]:
    """Certified interval for the mass of configurations whose stem starts with alpha."""
    alpha = as_word(alpha)
    if not is_admissible(mu.matrix, alpha):
        return 0.0, 0.0
    if not alpha:
        # the families are probabilities, so only the mixture weights and edits count
        total = math.fsum(c.weight for c in mu.components) + math.fsum(mu.adjustments.values())
        return total, total
    lo = hi = 0.0
    p_alpha = math.exp(-mu.beta * _stem_sum(mu.potential, alpha))
    for comp in mu.components:
        fam = comp.family
        a = fam.extension_mass(alpha) * p_alpha
        lo += comp.weight * a / (1.0 + fam.total + fam.tail)
        hi += comp.weight * min(1.0, (a + fam.tail) / (1.0 + fam.total))
    for xi, d in mu.adjustments.items():
        if xi.stem[: len(alpha)] == alpha:
            lo += d
            hi += d
    return lo, hi


def total_mass(mu: AtomicMeasure) -> tuple[float, float]:
    return measure_of_cylinder(mu, ())


# ---------------------------------------------------------------------------
# conformality checks on explicit atoms


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    worst: float
    worst_at: str | None
    checked: int
    tol: float

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "worst": self.worst,
            "worst_at": self.worst_at,
            "checked": self.checked,
            "tol": self.tol,
        }


def _report(name: str, violations: list[tuple[float, str]], checked: int, tol: float) -> CheckReport:
    if not violations:
        return CheckReport(name, True, 0.0, None, checked, tol)
    worst, where = max(violations, key=lambda v: v[0])
    return CheckReport(name, worst <= tol, worst, where, checked, tol)


def du_check(A: TransitionMatrix, mu: AtomicMeasure, F: Potential, beta: float, tol: float) -> CheckReport:
    """c_w exp(beta F(w)) = c_{shift w} for every atom with nonempty stem."""
    viol = []
    n = 0
    for xi, c in mu.atoms.items():
        if not xi.stem:
            continue
        target = mu.atoms.get(Configuration(xi.stem[1:], xi.root))
        if target is None:
            continue
        n += 1
        err = abs(c * math.exp(beta * F.letter(xi.stem[0])) - target) / max(1.0, target)
        viol.append((err, str(xi)))
    return _report("denker-urbanski", viol, n, tol)


def sarig_check(A: TransitionMatrix, mu: AtomicMeasure, F: Potential, beta: float, tol: float) -> CheckReport:
    """mu(shift w) / mu(w) = exp(beta F(w)) for atoms of positive weight."""
    viol = []
    n = 0
    for xi, c in mu.atoms.items():
        if not xi.stem or c <= 0:
            continue
        target = mu.atoms.get(Configuration(xi.stem[1:], xi.root))
        if target is None:
            continue
        n += 1
        expected = math.exp(beta * F.letter(xi.stem[0]))
        viol.append((abs(target / c - expected) / expected, str(xi)))
    return _report("sarig", viol, n, tol)


def quasi_invariance_arrow_check(
    A: TransitionMatrix, mu: AtomicMeasure, F: Potential, beta: float, max_n: int, tol: float
) -> CheckReport:
    """exp(beta S_n F(w)) mu(w) = mu(shift^n w) on arrows between atoms, 1 <= n <= max_n."""
    viol = []
    count = 0
    for xi, c in mu.atoms.items():
        for n in range(1, min(max_n, len(xi.stem)) + 1):
            target = mu.atoms.get(Configuration(xi.stem[n:], xi.root))
            if target is None:
                continue
            count += 1
            lhs = math.exp(beta * _stem_sum(F, xi.stem[:n])) * c
            viol.append((abs(lhs - target) / max(1.0, target), f"{xi} -> {n}"))
    return _report("quasi-invariance", viol, count, tol)


def _preimages(A: TransitionMatrix, xi: Configuration) -> tuple[int, ...]:
    if xi.stem:
        return A.column(xi.stem[0])
    return xi.root.as_tuple()


def eigenmeasure_check(
    A: TransitionMatrix,
    mu: AtomicMeasure,
    F: Potential,
    beta: float,
    test_cylinders: Iterable[Sequence[int]],
    tol: float,
) -> CheckReport:
    """Integrals of transfer-operator images of cylinder indicators against their direct integrals.

    Both sides are restricted to atoms of stem length at most ``mu.depth``:
    the transfer side sums over atoms one letter shorter, whose preimages are
    then all explicit atoms.
    """
    tests = [as_word(a) for a in test_cylinders]
    keys = set(tests)
    maxlen = max((len(a) for a in tests), default=0)
    lhs: dict[Word, float] = {}
    rhs: dict[Word, float] = {}
    for xi, c in mu.atoms.items():
        stem = xi.stem
        if stem:
            for k in range(min(len(stem), maxlen) + 1):
                if stem[:k] in keys:
                    rhs[stem[:k]] = rhs.get(stem[:k], 0.0) + c
        if len(stem) < mu.depth:
            for x in _preimages(A, xi):
                y = (x,) + stem
                v = c * math.exp(-beta * F.letter(x))
                for k in range(min(len(y), maxlen) + 1):
                    if y[:k] in keys:
                        lhs[y[:k]] = lhs.get(y[:k], 0.0) + v
    viol = [(abs(lhs.get(a, 0.0) - rhs.get(a, 0.0)), format_word(a)) for a in tests]
    return _report("eigenmeasure", viol, len(tests), tol)


def run_all_checks(A: TransitionMatrix, mu: AtomicMeasure, F: Potential, beta: float, tol: float, cylinder_length: int = 4, max_n: int = 3) -> list[CheckReport]:
    tests = admissible_words(A, cylinder_length, alphabet=range(1, 6))
    return [
        du_check(A, mu, F, beta, tol),
        eigenmeasure_check(A, mu, F, beta, tests, tol),
        sarig_check(A, mu, F, beta, tol),
        quasi_invariance_arrow_check(A, mu, F, beta, max_n, tol),
    ]


def admissible_words(A: TransitionMatrix, max_len: int, alphabet: Iterable[int]) -> list[Word]:
    """All admissible words over the alphabet with length at most max_len, e included."""
    syms = sorted(set(alphabet))
    out: list[Word] = [()]
    level: list[Word] = [()]
    for _ in range(max_len):
        level = [w + (x,) for w in level for x in syms if not w or A.entry(w[-1], x)]
        out.extend(level)
    return out


# ---------------------------------------------------------------------------
# mixtures and phase transition


@dataclass(frozen=True)
class Decomposition:
    weights: dict  # Root -> float
    errors: dict  # Root -> float
    conditionals: dict  # Root -> AtomicMeasure

    def to_json(self) -> dict:
        return {
            "weights": [{"root": r.to_json(), "weight": w, "error": self.errors[r]} for r, w in sorted(self.weights.items(), key=lambda kv: kv[0].sort_key())]
        }


def extremal_decomposition(A: TransitionMatrix, mu: AtomicMeasure, beta: float, tol: float = DEFAULT_TOL) -> Decomposition:
    """Weights of the empty-word families, recovered from the explicit atoms.

    For each root present among the atoms, the atom mass with that root is
    divided by the share of the pure family measure that sits at stem length
    at most ``mu.depth``.
    """
    by_root: dict[Root, float] = {}
    for xi, c in mu.atoms.items():
        by_root[xi.root] = by_root.get(xi.root, 0.0) + c
    weights, errors, conds = {}, {}, {}
    for R, m in by_root.items():
        pure = normalize(A, mu.potential, beta, R, tol, max_atoms=1)
        if not isinstance(pure, AtomicMeasure):
            raise PreconditionError(f"family {R} has no normalized measure at beta = {beta}")
        fam = pure.components[0].family
        levels = length_masses(A, mu.potential, beta, R, mu.depth) if mu.depth else []
        share = fam.c_empty * (1.0 + math.fsum(math.fsum(lv.values()) for lv in levels))
        weights[R] = m / share
        errors[R] = weights[R] * fam.tail / (1.0 + fam.total) + tol
        conds[R] = normalize(A, mu.potential, beta, R, tol)
    return Decomposition(weights, errors, conds)


@dataclass(frozen=True)
class ScanRow:
    beta: float
    status: str  # "Converges", "Diverges", "Undetermined"
    c_empty: tuple[float, float] | None
    threshold: float | None
    partial_sums: tuple = ()

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "status": self.status,
            "c_empty": None if self.c_empty is None else list(self.c_empty),
            "threshold": self.threshold,
            "partial_sums": [list(p) for p in self.partial_sums],
        }


@dataclass(frozen=True)
class Scan:
    root: Root
    lower: float | None
    upper: float | None
    rows: tuple[ScanRow, ...]

    @property
    def boundary(self) -> float | None:
        """The critical beta when both proved thresholds coincide."""
        if self.lower is not None and self.upper is not None and self.lower == self.upper:
            return self.lower
        return None

    def to_json(self) -> dict:
        return {
            "root": self.root.to_json(),
            "divergence_threshold": self.lower,
            "convergence_threshold": self.upper,
            "boundary": self.boundary,
            "rows": [r.to_json() for r in self.rows],
        }


def critical_beta_scan(
    A: TransitionMatrix, F: Potential, beta_grid: Iterable[float], root: Root | None = None, tol: float = 1e-6, horizon: int = 64
) -> Scan:
    """Existence of the family probability along a grid of beta values."""
    if not isinstance(F, (Constant, FirstLetter)):
        raise PreconditionError("the scan supports constant and first-letter potentials")
    if root is None:
        root = column_limit_points(A, horizon)[0]
    down = divergence_threshold(A, F, root)
    up = convergence_threshold(A, F)
    rows = []
    for beta in beta_grid:
        beta = float(beta)
        if up is not None and beta > up:
            try:
                fam = family_mass(A, F, beta, root, tol)
                rows.append(ScanRow(beta, "Converges", fam.c_empty_bracket, up))
            except PreconditionError:
                rows.append(ScanRow(beta, "Converges", (0.0, 1.0), up))
        elif down is not None and beta <= down:
            rows.append(ScanRow(beta, "Diverges", None, down))
        else:
            rows.append(ScanRow(beta, "Undetermined", None, None, _partial_sums(A, F, beta, root)))
    return Scan(root, down, up, tuple(rows))
