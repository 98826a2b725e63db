"""Empty words, finite-stem configurations, the shift, and extendability.

The shift drops the first stem letter.  It is undefined on empty-word
configurations, and whether it extends continuously to them is decided here:
either by class membership (single empty-word class gives a fixed point,
periodic renewal class gives a cycle) or by exhibiting two sequences of
configurations with a common limit whose shifts have different limits.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import EmptyStem, EnumerationTooLarge, PreconditionError, UnsupportedRoot
from .matrix import (
    PeriodicBlock,
    Root,
    TransitionMatrix,
    classify,
    column_limit_points,
    detection_window,
)
from .words import Configuration, InfiniteStem, Word

ENUMERATION_LIMIT = 2_000_000


# ---------------------------------------------------------------------------
# empty words and finite stems


def empty_words(A: TransitionMatrix, horizon: int = 64) -> list[Configuration]:
    """One empty-stem configuration per nonzero column limit point."""
    return [Configuration((), R) for R in column_limit_points(A, horizon)]


def _check_root(A: TransitionMatrix, root: Root, horizon: int) -> None:
    if root.is_all:
        raise UnsupportedRoot("the all-symbols root cannot be enumerated")
    if root not in column_limit_points(A, horizon):
        raise PreconditionError(f"{root} is not a column limit point of {A.name}")


def enumerate_finite_words(
    A: TransitionMatrix, root: Root, n: int, horizon: int = 64, limit: int = ENUMERATION_LIMIT
) -> list[Configuration]:
    """All configurations with stem length n in the family of the given root.

    These are the n-fold shift preimages of the empty word (e, root): stems
    ending in a symbol of the root, extended to the left along columns.
    Sorted lexicographically by stem.
    """
    _check_root(A, root, horizon)
    if n < 0 or n > 20:
        raise EnumerationTooLarge("stem length must lie in [0, 20]")
    level: list[Word] = [()]
    for step in range(n):
        if step == 0:
            level = [(r,) for r in root.as_tuple()]
        else:
            level = [(y,) + w for w in level for y in A.column(w[0])]
        if len(level) > limit:
            raise EnumerationTooLarge(f"more than {limit} stems of length {step + 1}")
    return [Configuration(w, root) for w in sorted(level)]


def count_stems(A: TransitionMatrix, root: Root, n: int, horizon: int = 64) -> int:
    """Number of stems of length n for the root, by a count over first letters."""
    _check_root(A, root, horizon)
    if n < 0 or n > 24:
        raise PreconditionError("exact counting is offered for 0 <= n <= 24")
    if n == 0:
        return 1
    counts = Counter({r: 1 for r in root.as_tuple()})
    for _ in range(n - 1):
        nxt: Counter = Counter()
        for x, c in counts.items():
            for y in A.column(x):
                nxt[y] += c
        counts = nxt
    return sum(counts.values())


def shift(xi: Configuration) -> Configuration:
    """Drop the first stem letter; the root is unchanged."""
    if xi.is_finite:
        if not xi.stem:
            raise EmptyStem("the shift is not defined on an empty stem")
        return Configuration(xi.stem[1:], xi.root)
    return Configuration(xi.stem.shifted())


# ---------------------------------------------------------------------------
# limits of sequences with diverging first letters


def column_class(A: TransitionMatrix, j: int, depth: int) -> frozenset[int]:
    """Column j truncated to its first ``depth`` coordinates."""
    if A.column_finite:
        return frozenset(i for i in A.column(j) if i <= depth)
    return frozenset(i for i in range(1, depth + 1) if A.entry(i, j))


def _as_root(A: TransitionMatrix, v: frozenset[int], depth: int) -> Root:
    if not A.column_finite and len(v) == depth:
        return Root.all()
    return Root(v)


def continuation(A: TransitionMatrix, h: int, max_len: int = 10_000) -> InfiniteStem:
    """A canonical infinite admissible word starting at h.

    Stay at h when it carries a self loop.  Otherwise walk down the chain
    x -> x-1 while it is admissible, and from a letter without that step
    stay on a self loop or take the smallest successor, until a letter
    repeats.
    """
    if A.entry(h, h):
        return InfiniteStem((), (h,))
    path: list[int] = []
    seen: dict[int, int] = {}
    x = h
    while x not in seen:
        if len(path) > max_len:
            raise PreconditionError(f"no eventually periodic continuation from {h}")
        seen[x] = len(path)
        path.append(x)
        if x > 1 and A.entry(x, x - 1):
            x -= 1
            continue
        if A.entry(x, x):
            return InfiniteStem(tuple(path[:-1]), (x,))
        y = 1
        while not A.entry(x, y):
            y += 1
            if y > max_len:
                raise PreconditionError(f"symbol {x} has no successor below {max_len}")
        x = y
    k = seen[x]
    return InfiniteStem(tuple(path[:k]), tuple(path[k:]))


@dataclass(frozen=True)
class Outcome:
    """Where the shifted sequence goes: a point, an empty word, or nowhere."""

    kind: str  # "point", "empty", "diverges"
    letter: int | None = None
    root: Root | None = None

    def sort_key(self) -> tuple:
        if self.kind == "point":
            return (0, self.letter)
        if self.kind == "empty":
            return (1, self.root.sort_key())
        return (2,)

    def __str__(self) -> str:
        if self.kind == "point":
            return f"point starting with {self.letter}"
        if self.kind == "empty":
            return f"(e, {self.root})"
        return "no limit in X_A"


@dataclass(frozen=True)
class SequenceFamily:
    """Sample members of a sequence of configurations with diverging first letter."""

    limit: Root
    shift_limit: Outcome
    stems: tuple[InfiniteStem, ...]
    first_letter_classes: tuple[Root, ...]
    second_letter_outcomes: tuple[Outcome, ...]

    def to_json(self) -> dict:
        return {
            "limit": f"(e, {self.limit})",
            "shift_limit": str(self.shift_limit),
            "stems": [str(s) for s in self.stems],
            "first_letters": [s[0] for s in self.stems],
            "evaluated_limits": [f"(e, {r})" for r in self.first_letter_classes],
            "evaluated_shift_limits": [str(o) for o in self.second_letter_outcomes],
        }


@dataclass(frozen=True)
class ShiftSurvey:
    """For each empty-word class, the observed limits of shifted sequences."""

    horizon: int
    depth: int
    outcomes: dict  # Root -> {Outcome: [(g, h), ...]}

    def consistent_map(self) -> dict[Root, Outcome] | None:
        out = {}
        for R, obs in self.outcomes.items():
            if len(obs) != 1:
                return None
            out[R] = next(iter(obs))
        return out


def survey_shift_limits(A: TransitionMatrix, horizon: int = 64, min_hits: int = 2) -> ShiftSurvey:
    """Record where sequences g_n h_n ... go under the shift.

    First letters g run through the detection window; their truncated
    columns name the empty word they converge to.  The second letter h is
    either small (the shifted sequence converges to a point of the ordinary
    shift space), or large, in which case its truncated column names the
    limit empty word, the empty vector meaning that no limit exists.
    Outcomes seen fewer than ``min_hits`` times are discarded.
    """
    depth, lo, hi, _ = detection_window(horizon)
    classes = {R.symbols for R in column_limit_points(A, horizon) if not R.is_all}
    all_root = any(R.is_all for R in column_limit_points(A, horizon))
    raw: dict[Root, dict[Outcome, list[tuple[int, int]]]] = {}
    h_max = hi + horizon
    for g in range(lo, hi + 1):
        vg = column_class(A, g, depth)
        R = _as_root(A, vg, depth)
        if not (R.is_all and all_root) and vg not in classes:
            continue
        for h in range(1, h_max + 1):
            if not A.entry(g, h):
                continue
            o = _outcome(A, h, depth)
            raw.setdefault(R, {}).setdefault(o, []).append((g, h))
    outcomes = {}
    for R, obs in raw.items():
        kept = {o: pairs for o, pairs in obs.items() if len({g for g, _ in pairs}) >= min_hits}
        if kept:
            outcomes[R] = dict(sorted(kept.items(), key=lambda kv: kv[0].sort_key()))
    return ShiftSurvey(horizon, depth, outcomes)


def _outcome(A: TransitionMatrix, h: int, depth: int) -> Outcome:
    if h <= depth:
        return Outcome("point", letter=h)
    vh = column_class(A, h, depth)
    return Outcome("diverges") if not vh else Outcome("empty", root=_as_root(A, vh, depth))


def _family(A: TransitionMatrix, R: Root, pairs: list[tuple[int, int]], depth: int, k: int = 3) -> SequenceFamily:
    firsts: dict[int, int] = {}
    for g, h in pairs:
        firsts.setdefault(g, h)
    sample = sorted(firsts.items())[:k]
    stems = []
    for g, h in sample:
        tail = continuation(A, h)
        stems.append(InfiniteStem((g,) + tail.head, tail.cycle))
    first = tuple(_as_root(A, column_class(A, s[0], depth), depth) for s in stems)
    second = tuple(_outcome(A, s[1], depth) for s in stems)
    return SequenceFamily(R, second[0], tuple(stems), first, second)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Extendable:
    kind: str  # "fixed_point", "cycle", "finite_alphabet"
    empty_word_dynamics: dict  # Configuration -> Configuration
    horizon: int

    def orbit(self, start: Configuration) -> list[Configuration]:
        out = [start]
        x = self.empty_word_dynamics[start]
        while x != start:
            out.append(x)
            x = self.empty_word_dynamics[x]
        return out

    def to_json(self) -> dict:
        return {
            "verdict": "Extendable",
            "kind": self.kind,
            "horizon": self.horizon,
            "empty_word_dynamics": [
                {"from": str(a), "to": str(b)} for a, b in sorted(self.empty_word_dynamics.items(), key=lambda kv: kv[0].root.sort_key())
            ],
        }


@dataclass(frozen=True)
class Witness:
    first: SequenceFamily
    second: SequenceFamily | None
    reason: str

    def to_json(self) -> dict:
        return {
            "reason": self.reason,
            "first": self.first.to_json(),
            "second": None if self.second is None else self.second.to_json(),
        }


@dataclass(frozen=True)
class NotExtendable:
    witness: Witness
    horizon: int

    def to_json(self) -> dict:
        return {"verdict": "NotExtendable", "horizon": self.horizon, "witness": self.witness.to_json()}


@dataclass(frozen=True)
class UndecidedVerdict:
    horizon: int
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": "Undecided", "horizon": self.horizon, "evidence": self.evidence}


ExtensionVerdict = Extendable | NotExtendable | UndecidedVerdict


def _cycle_dynamics(block: PeriodicBlock) -> dict[Configuration, Configuration]:
    m = block.period
    out = {}
    for q in range(1, m + 1):
        target = q - 1 if q > 1 else m
        out[Configuration((), block.root(q))] = Configuration((), block.root(target))
    return out


def find_witness(A: TransitionMatrix, horizon: int = 64) -> Witness | None:
    """A pair of sequences with a common limit and different shift limits."""
    survey = survey_shift_limits(A, horizon)
    for R in sorted(survey.outcomes, key=Root.sort_key):
        obs = survey.outcomes[R]
        items = list(obs.items())
        if len(items) >= 2:
            (_, p1), (_, p2) = items[0], items[1]
            return Witness(
                _family(A, R, p1, survey.depth),
                _family(A, R, p2, survey.depth),
                "shifted sequences converge to different limits",
            )
        (o, p), = items
        if o.kind == "diverges":
            return Witness(_family(A, R, p, survey.depth), None, "shifted sequence has no limit in X_A")
    return None


def extension_verdict(A: TransitionMatrix, horizon: int = 64) -> ExtensionVerdict:
    """Decide whether the shift extends continuously to the empty words."""
    if A.family == "finite":
        return Extendable("finite_alphabet", {}, horizon)
    report = classify(A, horizon)
    if report.single_empty_word is True:
        (xi0,) = empty_words(A, horizon)
        return Extendable("fixed_point", {xi0: xi0}, horizon)
    if report.periodic_renewal is True and report.block is not None:
        return Extendable("cycle", _cycle_dynamics(report.block), horizon)
    w = find_witness(A, horizon)
    if w is not None:
        return NotExtendable(w, horizon)
    survey = survey_shift_limits(A, horizon)
    evidence = {str(R): [str(o) for o in obs] for R, obs in survey.outcomes.items()}
    return UndecidedVerdict(horizon, {"observed_shift_limits": evidence})


# ---------------------------------------------------------------------------
# the weighted endomorphism on empty-word generators


@dataclass(frozen=True)
class PassOrWitness:
    passed: bool
    F: tuple[int, ...]
    horizon: int
    witness: tuple[SequenceFamily, SequenceFamily] | None = None
    values: tuple[int, int] | None = None

    def to_json(self) -> dict:
        d = {"passed": self.passed, "F": list(self.F), "horizon": self.horizon}
        if self.witness is not None:
            d["witness"] = [f.to_json() for f in self.witness]
            d["values"] = list(self.values)
        return d


def alpha0_value(A: TransitionMatrix, F: Iterable[int], stem) -> int:
    """Image of the empty-word generator with set F, evaluated at a point of the shift space.

    It is the indicator that every j in F satisfies A(j, second letter).
    """
    return int(all(A.entry(j, stem[1]) for j in F))


def alpha0_continuity_check(A: TransitionMatrix, F: Iterable[int], horizon: int = 64) -> PassOrWitness:
    """Compare the image of e_{e,F} along sequences converging to the same empty word."""
    F = tuple(sorted(set(int(j) for j in F)))
    if not F:
        raise PreconditionError("F must be nonempty")
    if not A.column_finite:
        raise PreconditionError("the check needs a column-finite matrix")
    depth, lo, hi, _ = detection_window(horizon)
    classes = {R.symbols: R for R in column_limit_points(A, horizon)}
    groups: dict[Root, dict[int, list[tuple[int, int]]]] = {}
    for g in range(lo, hi + 1):
        vg = column_class(A, g, depth)
        if vg not in classes:
            continue
        for h in range(1, hi + horizon + 1):
            if A.entry(g, h):
                v = int(all(A.entry(j, h) for j in F))
                groups.setdefault(classes[vg], {}).setdefault(v, []).append((g, h))
    for R in sorted(groups, key=Root.sort_key):
        vals = {v: p for v, p in groups[R].items() if len({g for g, _ in p}) >= 2}
        if len(vals) == 2:
            fams = [_family(A, R, vals[v], depth) for v in (1, 0)]
            return PassOrWitness(False, F, horizon, (fams[0], fams[1]), (1, 0))
    return PassOrWitness(True, F, horizon)
