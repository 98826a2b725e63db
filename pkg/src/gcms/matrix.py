"""Countably infinite 0/1 transition matrices described by finite rules.

A :class:`TransitionMatrix` never stores an array.  It answers entry queries
from a family rule, and exposes the structural facts that the rest of the
package needs: column supports, infinite emitters, limit points of the column
sequence, and membership in the two classes of matrices for which the shift
extends continuously to the compactified space.

Symbols are positive integers.  Every analysis that can only be carried out
up to a finite horizon takes that horizon as an argument and reports it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import HorizonTooSmall, PreconditionError

BUILTIN_FAMILIES = (
    "renewal",
    "lazy-renewal",
    "pair-renewal",
    "prime-renewal",
    "n-renewal",
    "full",
    "ce1",
    "ce2",
    "ce3",
)


# ---------------------------------------------------------------------------
# small number theory helpers


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def prime_power_base(n: int) -> int | None:
    """Return p when n = p**k for a prime p and k >= 1, else None."""
    if n < 2:
        return None
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            return p if n == 1 else None
        p += 1
    return n


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for k in range(2, math.isqrt(n) + 1):
        if sieve[k]:
            sieve[k * k :: k] = False
    return [int(p) for p in np.flatnonzero(sieve)]


# ---------------------------------------------------------------------------
# roots


@dataclass(frozen=True)
class Root:
    """A finite nonempty set of symbols, or the marker for every symbol.

    ``symbols is None`` encodes the all-symbols root that appears for the
    full shift.
    """

    symbols: frozenset[int] | None

    @classmethod
    def of(cls, *symbols: int) -> "Root":
        return cls(frozenset(int(s) for s in symbols))

    @classmethod
    def from_iterable(cls, symbols: Iterable[int]) -> "Root":
        return cls(frozenset(int(s) for s in symbols))

    @classmethod
    def all(cls) -> "Root":
        return cls(None)

    @property
    def is_all(self) -> bool:
        return self.symbols is None

    def __contains__(self, j: object) -> bool:
        return self.symbols is None or j in self.symbols

    def as_tuple(self) -> tuple[int, ...]:
        if self.symbols is None:
            raise PreconditionError("the all-symbols root has no finite listing")
        return tuple(sorted(self.symbols))

    def sort_key(self) -> tuple:
        if self.symbols is None:
            return (1, ())
        return (0, self.as_tuple())

    def to_json(self):
        return "all" if self.symbols is None else list(self.as_tuple())

    def __str__(self) -> str:
        if self.symbols is None:
            return "all"
        return "{" + ",".join(map(str, self.as_tuple())) + "}"


def sort_roots(roots: Iterable[Root]) -> list[Root]:
    return sorted(set(roots), key=Root.sort_key)


# ---------------------------------------------------------------------------
# rule lists


@dataclass(frozen=True)
class Affine:
    """The expression ``a*n + b`` in the free variable n."""

    a: int
    b: int

    def __call__(self, n: int) -> int:
        return self.a * n + self.b

    def __str__(self) -> str:
        if self.a == 0:
            return str(self.b)
        head = "n" if self.a == 1 else ("-n" if self.a == -1 else f"{self.a}n")
        if self.b == 0:
            return head
        return f"{head}{'+' if self.b > 0 else '-'}{abs(self.b)}"


def _solve(expr: Affine, value: int) -> int | None:
    """The unique n >= 1 with expr(n) == value, if expr is not constant."""
    diff = value - expr.b
    if diff % expr.a:
        return None
    n = diff // expr.a
    return n if n >= 1 else None


@dataclass(frozen=True)
class Rule:
    """``A(row(n), col(n)) = 1`` for every n >= 1."""

    row: Affine
    col: Affine

    def matches(self, i: int, j: int) -> bool:
        if self.col.a != 0:
            n = _solve(self.col, j)
            return n is not None and self.row(n) == i
        if j != self.col.b:
            return False
        if self.row.a == 0:
            return i == self.row.b
        return _solve(self.row, i) is not None

    def column(self, j: int) -> set[int] | None:
        """Rows hit in column j, or None if infinitely many."""
        if self.col.a != 0:
            n = _solve(self.col, j)
            if n is None:
                return set()
            i = self.row(n)
            return {i} if i >= 1 else set()
        if j != self.col.b:
            return set()
        if self.row.a == 0:
            return {self.row.b} if self.row.b >= 1 else set()
        return None

    def __str__(self) -> str:
        return f"A({self.row},{self.col})=1"


# ---------------------------------------------------------------------------
# periodic block and class report


@dataclass(frozen=True)
class PeriodicBlock:
    """The repeating n_e x m block of the first n_e rows from column ``start``."""

    M: tuple[tuple[int, ...], ...]
    start: int
    period: int
    last_emitter: int

    def root(self, q: int) -> Root:
        """Root encoded by column q (1-based) of M."""
        return Root.from_iterable(k + 1 for k in range(self.last_emitter) if self.M[k][q - 1])

    def roots(self) -> list[Root]:
        return [self.root(q) for q in range(1, self.period + 1)]

    def to_json(self) -> dict:
        return {
            "M": [list(r) for r in self.M],
            "I": self.start,
            "m": self.period,
            "n_e": self.last_emitter,
        }


@dataclass(frozen=True)
class Undecided:
    """Marker for a fact that could not be settled at the given horizon."""

    horizon: int

    def to_json(self):
        return {"undecided": self.horizon}


@dataclass(frozen=True)
class ClassReport:
    single_empty_word: bool | Undecided
    periodic_renewal: bool | Undecided
    column_finite: bool | Undecided
    compact_X_A: bool | Undecided
    irreducible: bool | Undecided
    horizon: int
    block: PeriodicBlock | None = None
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def enc(v):
            return v.to_json() if isinstance(v, Undecided) else v

        return {
            "single_empty_word": enc(self.single_empty_word),
            "periodic_renewal": enc(self.periodic_renewal),
            "column_finite": enc(self.column_finite),
            "compact_X_A": enc(self.compact_X_A),
            "irreducible": enc(self.irreducible),
            "horizon": self.horizon,
            "block": None if self.block is None else self.block.to_json(),
            "evidence": self.evidence,
        }


# ---------------------------------------------------------------------------
# the matrix


@dataclass(frozen=True)
class TransitionMatrix:
    """A countable 0/1 matrix given by a family tag and its parameters.

    Use the constructors :func:`renewal`, :func:`n_renewal`,
    :func:`finite_explicit`, :func:`rule_list` and friends rather than
    instantiating directly.
    """

    family: str
    N: int | None = None
    rows: tuple[tuple[int, ...], ...] | None = None
    rules: tuple[Rule, ...] | None = None

    # -- identity -----------------------------------------------------------

    @property
    def is_builtin(self) -> bool:
        return self.family in BUILTIN_FAMILIES

    @property
    def name(self) -> str:
        if self.family == "n-renewal":
            return f"n-renewal({self.N})"
        return self.family

    def __str__(self) -> str:
        return self.name

    # -- entries ------------------------------------------------------------

    def entry(self, i: int, j: int) -> int:
        if i < 1 or j < 1:
            raise PreconditionError(f"symbols must be positive, got ({i}, {j})")
        f = self.family
        if f == "full":
            return 1
        if f == "finite":
            n = len(self.rows)
            return self.rows[i - 1][j - 1] if i <= n and j <= n else 0
        if f == "rules":
            return int(any(r.matches(i, j) for r in self.rules))
        if f == "ce2":
            return int((i == 1 and j % 2 == 0) or i == j + 1)
        base = i == 1 or i == j + 1
        if f == "renewal":
            return int(base)
        if f == "lazy-renewal":
            return int(base or i == j)
        if f == "pair-renewal":
            return int(base or (i == 2 and j % 2 == 0))
        if f == "prime-renewal":
            return int(base or (is_prime(i) and prime_power_base(j) == i))
        if f == "n-renewal":
            N = self.N
            return int(base or (i <= N and j > N and (j - i) % N == 0))
        if f == "ce1":
            return int(base or (i == 2 and j % 3 != 0))
        if f == "ce3":
            return int(base or (j % 2 == 0 and (i == 2 or i == 2 * j)))
        raise PreconditionError(f"unknown family {f!r}")

    def __call__(self, i: int, j: int) -> int:
        return self.entry(i, j)

    # -- columns ------------------------------------------------------------

    @cached_property
    def column_finite(self) -> bool:
        if self.family == "full":
            return False
        if self.family == "rules":
            return all(not (r.col.a == 0 and r.row.a != 0) for r in self.rules)
        return True

    def column(self, j: int) -> tuple[int, ...]:
        """Sorted rows i with A(i, j) = 1.  Requires a column-finite matrix."""
        if j < 1:
            raise PreconditionError("symbols must be positive")
        f = self.family
        if f == "full":
            raise PreconditionError("the full shift is not column-finite")
        if f == "finite":
            n = len(self.rows)
            return tuple(i for i in range(1, n + 1) if j <= n and self.rows[i - 1][j - 1])
        if f == "rules":
            out: set[int] = set()
            for r in self.rules:
                c = r.column(j)
                if c is None:
                    raise PreconditionError(f"rule {r} makes column {j} infinite")
                out |= c
            return tuple(sorted(out))
        if f == "ce2":
            return tuple(sorted({j + 1} | ({1} if j % 2 == 0 else set())))
        out = {1, j + 1}
        if f == "lazy-renewal":
            out.add(j)
        elif f == "pair-renewal" and j % 2 == 0:
            out.add(2)
        elif f == "prime-renewal":
            p = prime_power_base(j)
            if p is not None:
                out.add(p)
        elif f == "n-renewal" and j > self.N:
            out.add((j - 1) % self.N + 1)
        elif f == "ce1" and j % 3 != 0:
            out.add(2)
        elif f == "ce3" and j % 2 == 0:
            out |= {2, 2 * j}
        return tuple(sorted(out))

    def row_support(self, i: int, upto: int) -> list[int]:
        """Columns j <= upto with A(i, j) = 1."""
        return [j for j in range(1, upto + 1) if self.entry(i, j)]

    @cached_property
    def branching_bound(self) -> int | None:
        """Upper bound on column sizes, or None if unbounded or unknown."""
        f = self.family
        table = {
            "renewal": 2,
            "lazy-renewal": 3,
            "pair-renewal": 3,
            "prime-renewal": 3,
            "n-renewal": 3,
            "ce1": 3,
            "ce2": 2,
            "ce3": 4,
        }
        if f in table:
            return table[f]
        if f == "finite":
            return max((sum(r[j] for r in self.rows) for j in range(len(self.rows))), default=0)
        if f == "rules" and self.column_finite:
            # each rule contributes at most one row per column
            return len(self.rules)
        return None

    @cached_property
    def column_growth(self) -> int | None:
        """g with column(j) contained in [1, j + g] for all j, if such g exists."""
        f = self.family
        if f in ("renewal", "lazy-renewal", "pair-renewal", "prime-renewal", "n-renewal", "ce1", "ce2"):
            return 1
        if f == "finite":
            return len(self.rows)
        if f == "rules" and self.column_finite:
            g = 0
            for r in self.rules:
                if r.col.a == 0:
                    g = max(g, r.row.b - r.col.b)
                    continue
                if r.col.a < 0:
                    # only finitely many columns, bound them directly
                    n = 1
                    while r.col(n) >= 1:
                        g = max(g, r.row(n) - r.col(n))
                        n += 1
                    continue
                if r.row.a > r.col.a:
                    return None
                # row(n) - col(n) is nonincreasing in n, so n = 1 is the worst case
                g = max(g, r.row(1) - r.col(1))
            return max(g, 0)
        return None

    @cached_property
    def dominates_renewal(self) -> bool:
        """True when A(1, n) = A(n+1, n) = 1 for every n."""
        if self.family in ("renewal", "lazy-renewal", "pair-renewal", "prime-renewal", "n-renewal", "full", "ce1", "ce3"):
            return True
        if self.family == "rules":
            rs = set(self.rules)
            return Rule(Affine(0, 1), Affine(1, 0)) in rs and Rule(Affine(1, 1), Affine(1, 0)) in rs
        return False

    # -- declared structure ---------------------------------------------------

    @cached_property
    def declared_block(self) -> PeriodicBlock | None:
        f = self.family
        if f == "renewal":
            return PeriodicBlock(((1,),), start=2, period=1, last_emitter=1)
        if f == "pair-renewal":
            return PeriodicBlock(((1, 1), (0, 1)), start=3, period=2, last_emitter=2)
        if f == "n-renewal":
            N = self.N
            M = tuple(tuple(1 if (k == 0 or k == p) else 0 for p in range(N)) for k in range(N))
            return PeriodicBlock(M, start=N + 1, period=N, last_emitter=N)
        return None


# ---------------------------------------------------------------------------
# constructors


def renewal() -> TransitionMatrix:
    return TransitionMatrix("renewal")


def lazy_renewal() -> TransitionMatrix:
    return TransitionMatrix("lazy-renewal")


def pair_renewal() -> TransitionMatrix:
    return TransitionMatrix("pair-renewal")


def prime_renewal() -> TransitionMatrix:
    return TransitionMatrix("prime-renewal")


def n_renewal(N: int) -> TransitionMatrix:
    if N < 1:
        raise PreconditionError("n-renewal needs N >= 1")
    return TransitionMatrix("n-renewal", N=int(N))


def full_shift() -> TransitionMatrix:
    return TransitionMatrix("full")


def ce1() -> TransitionMatrix:
    """Renewal plus A(2, 3n+1) = A(2, 3n-1) = 1."""
    return TransitionMatrix("ce1")


def ce2() -> TransitionMatrix:
    """A(1, 2n) = A(n+1, n) = 1; the columns at odd indices tend to zero."""
    return TransitionMatrix("ce2")


def ce3() -> TransitionMatrix:
    """Pair renewal plus A(4n, 2n) = 1."""
    return TransitionMatrix("ce3")


def finite_explicit(rows: Sequence[Sequence[int]]) -> TransitionMatrix:
    rows_t = tuple(tuple(int(x) for x in r) for r in rows)
    n = len(rows_t)
    if n == 0 or any(len(r) != n for r in rows_t):
        raise PreconditionError("a finite matrix must be square and nonempty")
    if any(x not in (0, 1) for r in rows_t for x in r):
        raise PreconditionError("finite matrix entries must be 0 or 1")
    return TransitionMatrix("finite", rows=rows_t)


def rule_list(rules: Iterable[Rule]) -> TransitionMatrix:
    rs = tuple(rules)
    if not rs:
        raise PreconditionError("a rule list needs at least one rule")
    return TransitionMatrix("rules", rules=rs)


BUILTINS = {
    "renewal": renewal,
    "lazy-renewal": lazy_renewal,
    "pair-renewal": pair_renewal,
    "prime-renewal": prime_renewal,
    "full": full_shift,
    "ce1": ce1,
    "ce2": ce2,
    "ce3": ce3,
}


# ---------------------------------------------------------------------------
# analyses


def entry(A: TransitionMatrix, i: int, j: int) -> int:
    return A.entry(i, j)


def infinite_emitters(A: TransitionMatrix, horizon: int = 64) -> tuple[int, ...]:
    """Rows with infinitely many ones, in increasing order.

    Families with infinitely many such rows (prime renewal, full shift) are
    cut at ``horizon``.  For rule lists the answer is exact: only rules with
    a constant row and an increasing column produce infinite rows.
    """
    if horizon < 2:
        raise PreconditionError("horizon must be at least 2")
    f = A.family
    if f in ("renewal", "lazy-renewal", "ce2"):
        return (1,)
    if f in ("pair-renewal", "ce1", "ce3"):
        return (1, 2)
    if f == "prime-renewal":
        return tuple([1] + primes_up_to(horizon))
    if f == "n-renewal":
        return tuple(range(1, A.N + 1))
    if f == "full":
        return tuple(range(1, horizon + 1))
    if f == "finite":
        return ()
    out = {r.row.b for r in A.rules if r.row.a == 0 and r.col.a > 0 and r.row.b >= 1}
    return tuple(sorted(out))


def _truncated_columns(A: TransitionMatrix, depth: int, lo: int, hi: int) -> dict[int, frozenset[int]]:
    out = {}
    for j in range(lo, hi + 1):
        if A.column_finite:
            out[j] = frozenset(i for i in A.column(j) if i <= depth)
        else:
            out[j] = frozenset(i for i in range(1, depth + 1) if A.entry(i, j))
    return out


def detection_window(horizon: int) -> tuple[int, int, int, int]:
    """(depth, first column, last column, recurrence threshold) for a horizon."""
    depth = max(2, horizon // 4)
    return depth, depth + 1, depth + 4 * horizon, math.ceil(horizon / 4)


def detect_column_classes(A: TransitionMatrix, horizon: int) -> tuple[list[Root], bool]:
    """Limit points of the column sequence seen through a finite window.

    Columns in the window are truncated to their first ``depth`` coordinates;
    a truncated vector that recurs at least ``ceil(horizon/4)`` times is taken
    as a limit point.  Returns the nonzero limit points and whether the zero
    vector also recurs (which signals a non-compact space).
    """
    depth, lo, hi, threshold = detection_window(horizon)
    counts: dict[frozenset[int], int] = {}
    for v in _truncated_columns(A, depth, lo, hi).values():
        counts[v] = counts.get(v, 0) + 1
    frequent = [v for v, c in counts.items() if c >= threshold]
    if not frequent:
        raise HorizonTooSmall(f"no truncated column recurs {threshold} times within horizon {horizon}")
    zero = frozenset() in frequent
    roots = sort_roots(Root(v) for v in frequent if v)
    if not A.column_finite and any(len(r.symbols) == depth for r in roots):
        roots = [Root.all()]
    return roots, zero


def column_limit_points(A: TransitionMatrix, horizon: int = 64) -> list[Root]:
    """Nonzero limit points of the column sequence, as roots in increasing order."""
    if horizon < 2:
        raise PreconditionError("horizon must be at least 2")
    f = A.family
    if f in ("renewal", "lazy-renewal", "ce2"):
        return [Root.of(1)]
    if f in ("pair-renewal", "ce1", "ce3"):
        return [Root.of(1), Root.of(1, 2)]
    if f == "prime-renewal":
        return [Root.of(1)] + [Root.of(1, p) for p in primes_up_to(horizon)]
    if f == "n-renewal":
        return sort_roots(Root.of(1, k) for k in range(1, A.N + 1))
    if f == "full":
        return [Root.all()]
    if f == "finite":
        return []
    return detect_column_classes(A, horizon)[0]


def has_zero_column_limit(A: TransitionMatrix, horizon: int = 64) -> bool:
    """True when the zero vector is a limit point of the columns."""
    if A.family == "ce2":
        return True
    if A.is_builtin or A.family == "finite":
        return False
    return detect_column_classes(A, horizon)[1]


def is_irreducible_restricted(A: TransitionMatrix, alphabet: Iterable[int]) -> bool:
    """Strong connectivity of the digraph induced on a finite alphabet."""
    syms = sorted(set(int(s) for s in alphabet))
    if not syms:
        raise PreconditionError("alphabet must be nonempty")
    k = len(syms)
    adj = np.array([[A.entry(i, j) for j in syms] for i in syms], dtype=np.int8)
    if k == 1:
        return bool(adj[0, 0])
    n_comp, _ = connected_components(csr_matrix(adj), directed=True, connection="strong")
    return n_comp == 1


# -- class membership --------------------------------------------------------

_BUILTIN_FACTS = {
    # family: (compact, periodic renewal, reason when not periodic renewal)
    "renewal": (True, True, None),
    "lazy-renewal": (True, False, "A(i,i)=1 beyond the infinite emitters"),
    "pair-renewal": (True, True, None),
    "prime-renewal": (True, False, "infinitely many infinite emitters"),
    "n-renewal": (True, True, None),
    "full": (True, False, "infinitely many infinite emitters"),
    "ce1": (True, False, "repeating block has equal columns"),
    "ce2": (False, False, "zero column limit"),
    "ce3": (True, False, "row 4n has a one at column 2n"),
}


def _builtin_report(A: TransitionMatrix, horizon: int) -> ClassReport:
    compact, prc, reason = _BUILTIN_FACTS[A.family]
    cf = A.column_finite
    n_empty = len(column_limit_points(A, horizon))
    if A.family == "prime-renewal":
        n_empty = math.inf
    single = cf and compact and n_empty == 1
    evidence = {
        "source": "builtin",
        "empty_words": "infinite" if n_empty == math.inf else n_empty,
    }
    if not prc:
        evidence["periodic_renewal_fails"] = reason
    if not cf:
        evidence["single_empty_word_fails"] = "not column-finite"
    return ClassReport(
        single_empty_word=single,
        periodic_renewal=prc,
        column_finite=cf,
        compact_X_A=compact,
        irreducible=True,
        horizon=horizon,
        block=A.declared_block if prc else None,
        evidence=evidence,
    )


def detect_periodic_block(A: TransitionMatrix, horizon: int) -> tuple[PeriodicBlock | None, str | None]:
    """Search the window for the repeating block of the first n_e rows.

    Returns the block, or None with the failed condition.
    """
    emitters = infinite_emitters(A, horizon)
    if not emitters:
        return None, "no infinite emitters"
    if A.family == "full" or len(emitters) >= horizon:
        return None, "infinitely many infinite emitters"
    n_e = max(emitters)
    _, lo, hi, threshold = detection_window(horizon)
    lo = max(lo, n_e + 2)
    if any(not A.entry(i + 1, i) for i in range(1, hi + 1)):
        return None, "A(i+1,i)=1 fails"
    cols = {j: tuple(A.entry(k, j) for k in range(1, n_e + 1)) for j in range(lo, hi + 1)}
    found = None
    for m in range(1, (hi - lo + 1) // 2 + 1):
        start = hi - m
        while start >= lo and cols[start] == cols[start + m]:
            start -= 1
        start += 1
        if hi - start + 1 >= max(2 * m, threshold):
            found = (m, start)
            break
    if found is None:
        return None, "no periodic block within the window"
    m, start = found
    M = tuple(tuple(cols[start + p][k] for p in range(m)) for k in range(n_e))
    if len({tuple(M[k][p] for k in range(n_e)) for p in range(m)}) != m:
        return None, "repeating block has equal columns"
    for i in range(n_e + 1, horizon + 1):
        for k in range(1, hi + 1):
            if k != i - 1 and A.entry(i, k):
                return None, f"A({i},{k})=1 beyond the infinite emitters"
    return PeriodicBlock(M, start=start, period=m, last_emitter=n_e), None


def detected_report(A: TransitionMatrix, horizon: int) -> ClassReport:
    """Classification from finite evidence only, ignoring declared facts."""
    cf = A.column_finite
    try:
        roots, zero = detect_column_classes(A, horizon)
    except HorizonTooSmall:
        u = Undecided(horizon)
        return ClassReport(u, u, cf, u, Undecided(horizon), horizon, evidence={"source": "detected"})
    compact = not zero
    block, reason = detect_periodic_block(A, horizon) if compact else (None, "zero column limit")
    evidence = {
        "source": "detected",
        "probable": True,
        "limit_points": [r.to_json() for r in roots],
        "zero_column_limit": zero,
    }
    if block is None:
        evidence["periodic_renewal_fails"] = reason
    if not cf:
        evidence["single_empty_word_fails"] = "not column-finite"
    window = list(range(1, min(horizon, 16) + 1))
    return ClassReport(
        single_empty_word=cf and compact and len(roots) == 1,
        periodic_renewal=block is not None,
        column_finite=cf,
        compact_X_A=compact,
        irreducible=is_irreducible_restricted(A, window),
        horizon=horizon,
        block=block,
        evidence=evidence,
    )


def classify(A: TransitionMatrix, horizon: int = 64) -> ClassReport:
    """Membership in the single empty-word and periodic renewal classes."""
    if A.is_builtin:
        return _builtin_report(A, horizon)
    if A.family == "finite":
        return ClassReport(
            single_empty_word=False,
            periodic_renewal=False,
            column_finite=True,
            compact_X_A=True,
            irreducible=is_irreducible_restricted(A, range(1, len(A.rows) + 1)),
            horizon=horizon,
            evidence={"source": "finite alphabet", "empty_words": 0},
        )
    return detected_report(A, horizon)
