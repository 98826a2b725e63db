"""Spectral radius of weighted endomorphisms through maximum cycle means.

A weight is a scalar multiple of the identity plus finitely many projection
terms (gamma, F).  Each term is the indicator of the configurations with
gamma filled and gamma j^-1 filled for every j in F.  Normal forms rewrite
every term as a sum of positive cylinder indicators plus its values on the
empty-word configurations, so the weight becomes a locally constant function
on a finite subshift.  The logarithm of the spectral radius is then the
larger of the maximum cycle mean of log |weight| on that subshift and the
average of log |weight| along the shift orbit of the empty words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .dynamics import Extendable, extension_verdict
from .errors import AlphabetTooSmall, NonNormalForm, NotExtendableError, PreconditionError, UnsupportedTerm
from .matrix import Root, TransitionMatrix, column_limit_points, infinite_emitters, is_irreducible_restricted
from .words import Word, as_word, format_word, is_admissible

NEG_INF = -math.inf


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class ProjectionTerm:
    gamma: Word
    F: frozenset[int]

    @classmethod
    def of(cls, gamma: Iterable[int], F: Iterable[int] = ()) -> "ProjectionTerm":
        return cls(as_word(gamma), frozenset(int(j) for j in F))

    def __str__(self) -> str:
        return f"e[{format_word(self.gamma)}; {{{','.join(map(str, sorted(self.F)))}}}]"


@dataclass(frozen=True)
class GAElement:
    lambda0: complex = 0j
    terms: tuple[tuple[complex, ProjectionTerm], ...] = ()

    @classmethod
    def build(cls, lambda0: complex = 0, terms: Iterable[tuple[complex, Iterable[int], Iterable[int]]] = ()) -> "GAElement":
        return cls(complex(lambda0), tuple((complex(c), ProjectionTerm.of(g, F)) for c, g, F in terms))

    def scaled(self, c: complex) -> "GAElement":
        return GAElement(self.lambda0 * c, tuple((lam * c, t) for lam, t in self.terms))

    def to_json(self) -> dict:
        return {
            "lambda0": [self.lambda0.real, self.lambda0.imag],
            "terms": [{"gamma": list(t.gamma), "F": sorted(t.F), "lambda": [c.real, c.imag]} for c, t in self.terms],
        }


def ga_element_from_json(obj: dict) -> GAElement:
    def cplx(v) -> complex:
        if isinstance(v, (int, float)):
            return complex(v)
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        raise PreconditionError(f"bad complex number {v!r}")

    lam0 = cplx(obj.get("lambda0", 0))
    terms = tuple((cplx(t.get("lambda", 1)), ProjectionTerm.of(t.get("gamma", []), t.get("F", []))) for t in obj.get("terms", []))
    return GAElement(lam0, terms)


# ---------------------------------------------------------------------------
# normal forms


@dataclass(frozen=True)
class NormalForm:
    """A term as identity, or as positive cylinders plus empty-word roots where it equals 1."""

    identity: bool
    words: tuple[Word, ...]
    empty_roots: tuple[Root, ...]

    @property
    def is_zero(self) -> bool:
        return not self.identity and not self.words and not self.empty_roots


ZERO = NormalForm(False, (), ())
IDENTITY = NormalForm(True, (), ())


def _check_pair(A: TransitionMatrix, gamma: Word, F: frozenset[int]) -> None:
    if not gamma and not F:
        raise NonNormalForm("the pair (e, {}) is not a projection term")
    if not is_admissible(A, gamma):
        raise NonNormalForm(f"gamma {format_word(gamma)} is not admissible")


def _renewal_normal_form(gamma: Word, F: frozenset[int]) -> NormalForm:
    big = sorted(j for j in F if j > 1)
    if len(big) >= 2:
        return ZERO
    if not big:
        return IDENTITY if not gamma else NormalForm(False, (gamma,), ())
    n = big[0]
    # the row of gamma_last must reach n - 1; rows above 1 only reach one symbol
    if gamma and not (gamma[-1] == 1 or gamma[-1] == n):
        return ZERO
    return NormalForm(False, (gamma + (n - 1,),), ())


def _general_normal_form(A: TransitionMatrix, gamma: Word, F: frozenset[int], horizon: int) -> NormalForm:
    if not A.column_finite:
        raise UnsupportedTerm("normal forms need a column-finite matrix")
    if gamma:
        F = F - {gamma[-1]}
        if not F:
            return NormalForm(False, (gamma,), ())
    rows = set(F) | ({gamma[-1]} if gamma else set())
    emitters = set(infinite_emitters(A, horizon))
    roots = column_limit_points(A, horizon)
    empty = tuple(R for R in roots if not gamma and all(j in R for j in F))
    if rows <= emitters:
        if not gamma and len(F) == 1:
            (j,) = F
            if all(A.entry(j, k) for k in range(1, 4 * horizon + 1)) and len(empty) == len(roots):
                return IDENTITY
        raise UnsupportedTerm(f"term ({format_word(gamma)}, {sorted(F)}) has infinite common range")
    finite_row = min(rows - emitters)
    limit = 4 * horizon
    support = [k for k in A.row_support(finite_row, limit)]
    if support and max(support) > limit // 2:
        raise UnsupportedTerm(f"row {finite_row} reaches beyond the horizon {horizon}")
    ks = [k for k in support if all(A.entry(j, k) for j in rows)]
    return NormalForm(False, tuple(gamma + (k,) for k in ks), empty)


def nonzero_term(A: TransitionMatrix, gamma: Sequence[int], F: Iterable[int], horizon: int = 64) -> tuple[bool, NormalForm]:
    """Whether the term is nonzero, with its normal form."""
    gamma = as_word(gamma)
    F = frozenset(int(j) for j in F)
    _check_pair(A, gamma, F)
    if A.family == "renewal":
        nf = _renewal_normal_form(gamma, F)
    else:
        nf = _general_normal_form(A, gamma, F, horizon)
    return (not nf.is_zero), nf


@dataclass(frozen=True)
class NormalizedWeight:
    lambda0: complex
    cylinders: dict  # Word -> complex
    empty: dict  # Root -> complex, contribution beyond lambda0

    @property
    def depth(self) -> int:
        return max((len(w) for w in self.cylinders), default=0)

    @property
    def max_symbol(self) -> int:
        return max((x for w in self.cylinders for x in w), default=0)


def normal_form(a: GAElement, A: TransitionMatrix, horizon: int = 64) -> NormalizedWeight:
    """Merge all terms into cylinder coefficients; identity terms join lambda0."""
    lam0 = a.lambda0
    cyl: dict[Word, complex] = {}
    empty: dict[Root, complex] = {}
    for c, t in a.terms:
        _, nf = nonzero_term(A, t.gamma, t.F, horizon)
        if nf.identity:
            lam0 += c
            continue
        for w in nf.words:
            cyl[w] = cyl.get(w, 0j) + c
        for R in nf.empty_roots:
            empty[R] = empty.get(R, 0j) + c
    cyl = {w: c for w, c in sorted(cyl.items()) if c != 0}
    empty = {R: c for R, c in empty.items() if c != 0}
    return NormalizedWeight(lam0, cyl, empty)


# ---------------------------------------------------------------------------
# cylinder functions


@dataclass(frozen=True)
class CylinderFunction:
    depth: int
    alphabet: tuple[int, ...]
    table: dict  # Word -> complex
    empty_word_values: dict  # Root -> complex

    def value(self, w: Sequence[int]) -> complex:
        return self.table[tuple(w[: max(self.depth, 1)])]


def admissible_words_of_length(A: TransitionMatrix, alphabet: Sequence[int], n: int) -> list[Word]:
    level: list[Word] = [()]
    for _ in range(n):
        level = [w + (x,) for w in level for x in alphabet if not w or A.entry(w[-1], x)]
    return level


def _value_at(nw: NormalizedWeight, w: Word) -> complex:
    v = nw.lambda0
    for k in range(1, len(w) + 1):
        c = nw.cylinders.get(w[:k])
        if c is not None:
            v += c
    return v


def gelfand(a: GAElement | NormalizedWeight, A: TransitionMatrix, alphabet: Iterable[int], horizon: int = 64) -> CylinderFunction:
    """The weight as a table over admissible words of its depth."""
    nw = a if isinstance(a, NormalizedWeight) else normal_form(a, A, horizon)
    alph = tuple(sorted(set(int(x) for x in alphabet)))
    needed = {x for w in nw.cylinders for x in w}
    if not needed <= set(alph):
        raise AlphabetTooSmall(f"alphabet misses symbols {sorted(needed - set(alph))}")
    if not alph or not is_irreducible_restricted(A, alph):
        raise AlphabetTooSmall(f"restriction to {list(alph)} is not irreducible")
    L = nw.depth
    words = admissible_words_of_length(A, alph, max(L, 1))
    table = {w: _value_at(nw, w) for w in words}
    empty_vals = {}
    if A.family != "finite":
        for R in column_limit_points(A, horizon):
            empty_vals[R] = nw.lambda0 + nw.empty.get(R, 0j)
    return CylinderFunction(L, alph, table, empty_vals)


def choose_finite_alphabet(a: GAElement | NormalizedWeight, A: TransitionMatrix, horizon: int = 64, cap: int = 256) -> tuple[int, ...]:
    """{1..M}, or {1..M+1} when the identity coefficient is nonzero, grown until irreducible.

    M is the largest symbol in the cylinder words.  With a nonzero identity
    coefficient the letters outside the cylinders carry the value lambda0,
    and one of them is kept so that cycles through that region are seen.
    """
    nw = a if isinstance(a, NormalizedWeight) else normal_form(a, A, horizon)
    M = nw.max_symbol + (1 if nw.lambda0 != 0 else 0)
    M = max(M, 1)
    while not is_irreducible_restricted(A, range(1, M + 1)):
        M += 1
        if M > cap:
            raise AlphabetTooSmall(f"no irreducible alphabet {{1..M}} with M <= {cap}")
    return tuple(range(1, M + 1))


# ---------------------------------------------------------------------------
# maximum cycle mean


@dataclass(frozen=True)
class MeanCycleGraph:
    """A digraph on vertices 0..n-1 with real edge weights; -inf edges are dropped."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    labels: tuple = ()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]], labels: Sequence = ()) -> "MeanCycleGraph":
        return cls(n, tuple((int(u), int(v), float(w)) for u, v, w in edges if w != NEG_INF), tuple(labels))


@dataclass(frozen=True)
class NoCycle:
    def to_json(self):
        return None


@dataclass(frozen=True)
class CycleMean:
    value: float
    cycle: tuple[int, ...]


def _cycles_in_walk(walk: list[int]) -> list[list[int]]:
    """Simple cycles cut from a walk by repeated-vertex detection."""
    out = []
    stack: list[int] = []
    pos: dict[int, int] = {}
    for v in walk:
        if v in pos:
            k = pos[v]
            out.append(stack[k:])
            for u in stack[k:]:
                del pos[u]
            stack = stack[:k]
        pos[v] = len(stack)
        stack.append(v)
    return out


def _karp_component(nodes: list[int], W: np.ndarray) -> tuple[float, list[int]] | None:
    """Karp's recursion on one strongly connected component given by a dense weight block."""
    n = len(nodes)
    if n == 1:
        w = W[0, 0]
        return (float(w), [nodes[0]]) if w != NEG_INF else None
    D = np.full((n + 1, n), NEG_INF)
    pred = np.zeros((n + 1, n), dtype=np.int64)
    D[0, 0] = 0.0
    for k in range(1, n + 1):
        cand = D[k - 1][:, None] + W
        pred[k] = np.argmax(cand, axis=0)
        D[k] = cand[pred[k], np.arange(n)]
    best_v, best = -1, NEG_INF
    with np.errstate(invalid="ignore"):
        for v in range(n):
            if D[n, v] == NEG_INF:
                continue
            ks = [k for k in range(n) if D[k, v] != NEG_INF]
            m = min((D[n, v] - D[k, v]) / (n - k) for k in ks)
            if m > best:
                best, best_v = m, v
    if best_v < 0:
        return None
    walk = [best_v]
    v = best_v
    for k in range(n, 0, -1):
        v = int(pred[k, v])
        walk.append(v)
    walk.reverse()
    cycles = _cycles_in_walk(walk)
    scored = []
    for c in cycles:
        ws = [W[c[i], c[(i + 1) % len(c)]] for i in range(len(c))]
        scored.append((math.fsum(ws) / len(c), c))
    mean, cyc = max(scored, key=lambda t: t[0])
    if not math.isclose(mean, best, rel_tol=1e-9, abs_tol=1e-9):
        raise RuntimeError(f"critical walk gives cycle mean {mean}, Karp value {best}")
    return mean, [nodes[i] for i in cyc]


def max_mean_cycle(g: MeanCycleGraph) -> CycleMean | NoCycle:
    """Maximum over directed cycles of total weight divided by length."""
    if g.n == 0 or not g.edges:
        return NoCycle()
    W = np.full((g.n, g.n), NEG_INF)
    for u, v, w in g.edges:
        W[u, v] = max(W[u, v], w)
    adj = csr_matrix((np.ones(len(g.edges)), ([e[0] for e in g.edges], [e[1] for e in g.edges])), shape=(g.n, g.n))
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    best: tuple[float, list[int]] | None = None
    for c in range(n_comp):
        nodes = [int(v) for v in np.flatnonzero(labels == c)]
        res = _karp_component(nodes, W[np.ix_(nodes, nodes)])
        if res is not None and (best is None or res[0] > best[0]):
            best = res
    if best is None:
        return NoCycle()
    # rotate so the witness starts at its smallest vertex
    cyc = best[1]
    k = cyc.index(min(cyc))
    return CycleMean(best[0], tuple(cyc[k:] + cyc[:k]))


def simple_cycles(n: int, edges: Iterable[tuple[int, int, float]]) -> list[tuple[list[int], float]]:
    """Every simple cycle with its mean, by exhaustive search from its smallest vertex."""
    W: dict[tuple[int, int], float] = {}
    out_adj: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v, w in edges:
        if w == NEG_INF:
            continue
        if (u, v) not in W:
            out_adj[u].append(v)
            W[(u, v)] = w
        else:
            W[(u, v)] = max(W[(u, v)], w)
    res = []

    def dfs(start: int, path: list[int], total: float) -> None:
        u = path[-1]
        for v in out_adj[u]:
            if v == start:
                res.append((list(path), (total + W[(u, v)]) / len(path)))
            elif v > start and v not in path:
                path.append(v)
                dfs(start, path, total + W[(u, v)])
                path.pop()

    for s in range(n):
        dfs(s, [s], 0.0)
    return res


# ---------------------------------------------------------------------------
# spectral radius


def cycle_graph(f: CylinderFunction, A: TransitionMatrix) -> MeanCycleGraph:
    """Words of length max(L, 1) linked by one-letter shifts, weighted by log |value| at the source."""
    words = sorted(f.table)
    index = {w: k for k, w in enumerate(words)}
    edges = []
    for w in words:
        v = f.table[w]
        if v == 0:
            continue
        lw = math.log(abs(v))
        for x in f.alphabet:
            if A.entry(w[-1], x):
                nxt = w[1:] + (x,)
                if nxt in index and f.table[nxt] != 0:
                    edges.append((index[w], index[nxt], lw))
    return MeanCycleGraph.from_edges(len(words), edges, words)


@dataclass(frozen=True)
class SpectralResult:
    radius: float
    branch: str  # "sigma" or "empty"
    certificate: dict

    def to_json(self) -> dict:
        return {"radius": self.radius, "branch": self.branch, "certificate": self.certificate}


def _geometric_mean(moduli: Sequence[float]) -> float:
    """Geometric mean of nonnegative numbers, exact when they all agree."""
    if not moduli or min(moduli) == 0:
        return 0.0
    if max(moduli) == min(moduli):
        return float(moduli[0])
    p = math.prod(moduli)
    if 0.0 < p < math.inf:
        return p ** (1.0 / len(moduli))
    return math.exp(math.fsum(math.log(v) for v in moduli) / len(moduli))


def _empty_branch(f: CylinderFunction, A: TransitionMatrix, horizon: int) -> tuple[float, list[str]]:
    """Largest geometric mean of |value| over the shift cycles of the empty words."""
    if not f.empty_word_values:
        return 0.0, []
    verdict = extension_verdict(A, horizon)
    if not isinstance(verdict, Extendable):
        raise NotExtendableError(f"{A.name} is not extendable")
    dyn = verdict.empty_word_dynamics
    best, best_orbit = 0.0, []
    seen = set()
    for xi in sorted(dyn, key=lambda c: c.root.sort_key()):
        if xi in seen:
            continue
        orbit = verdict.orbit(xi)
        seen.update(orbit)
        vals = [abs(f.empty_word_values[c.root]) for c in orbit]
        g = _geometric_mean(vals)
        if g > best or not best_orbit:
            best, best_orbit = g, [str(c) for c in orbit]
    return best, best_orbit


def spectral_radius(a: GAElement, A: TransitionMatrix, horizon: int = 64, alphabet: Iterable[int] | None = None) -> SpectralResult:
    """Spectral radius of the weighted endomorphism with weight a."""
    verdict = extension_verdict(A, horizon)
    if not isinstance(verdict, Extendable):
        raise NotExtendableError(f"{A.name} is not extendable at horizon {horizon}")
    nw = normal_form(a, A, horizon)
    alph = tuple(alphabet) if alphabet is not None else choose_finite_alphabet(nw, A, horizon)
    f = gelfand(nw, A, alph, horizon)
    g = cycle_graph(f, A)
    res = max_mean_cycle(g)
    sigma = 0.0 if isinstance(res, NoCycle) else _geometric_mean([abs(f.table[g.labels[v]]) for v in res.cycle])
    empty, orbit = _empty_branch(f, A, horizon)
    cert = {
        "alphabet": list(alph),
        "depth": f.depth,
        "sigma_value": sigma,
        "empty_value": empty,
        "cycle": None if isinstance(res, NoCycle) else [format_word(g.labels[v]) for v in res.cycle],
        "empty_orbit": orbit,
    }
    if empty > sigma:
        return SpectralResult(empty, "empty", cert)
    return SpectralResult(sigma, "sigma", cert)


def _periodic_words(A: TransitionMatrix, alphabet: Sequence[int], max_len: int):
    """Cyclically admissible words up to rotation, with lengths 1..max_len."""
    alph = sorted(alphabet)
    for n in range(1, max_len + 1):

        def extend(w: list[int]):
            if len(w) == n:
                if A.entry(w[-1], w[0]):
                    yield tuple(w)
                return
            for x in alph:
                if x >= w[0] and A.entry(w[-1], x):
                    w.append(x)
                    yield from extend(w)
                    w.pop()

        for first in alph:
            yield from extend([first])


def brute_force_radius(a: GAElement, A: TransitionMatrix, max_len: int, horizon: int = 64, alphabet: Iterable[int] | None = None) -> float:
    """Largest geometric mean of |weight| over periodic orbits of period at most max_len."""
    if max_len > 12:
        raise PreconditionError("max_len is limited to 12")
    nw = normal_form(a, A, horizon)
    alph = tuple(alphabet) if alphabet is not None else choose_finite_alphabet(nw, A, horizon)
    L = max(nw.depth, 1)
    best = 0.0
    for p in _periodic_words(A, alph, max_len):
        n = len(p)
        ext = p * (L // n + 2)
        best = max(best, _geometric_mean([abs(_value_at(nw, ext[i : i + L])) for i in range(n)]))
    f_empty = {R: nw.lambda0 + nw.empty.get(R, 0j) for R in column_limit_points(A, horizon)} if A.family != "finite" else {}
    if f_empty:
        f = CylinderFunction(nw.depth, alph, {}, f_empty)
        best = max(best, _empty_branch(f, A, horizon)[0])
    return best
