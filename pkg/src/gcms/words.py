"""Words, reduced group elements, configurations and generalized cylinders.

A point of the compactified shift space is a 0/1 configuration on the free
group over the positive integers.  Every configuration the package handles is
described by a *stem* (the filled positive word, finite or infinite) and, for
a finite stem, a *root* (the symbols j such that stem * j^-1 is filled).  The
:func:`filled` predicate turns a (stem, root) pair back into the full
configuration, one group element at a time.

Words are plain tuples of positive integers; the empty word is ``()``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DepthExceeded, ParseError, PreconditionError
from .matrix import Root, TransitionMatrix, column_limit_points

Word = tuple[int, ...]

DEFAULT_DEPTH = 64


# ---------------------------------------------------------------------------
# words


def as_word(letters: Iterable[int]) -> Word:
    w = tuple(int(x) for x in letters)
    if any(x < 1 for x in w):
        raise PreconditionError(f"letters must be positive: {w}")
    return w


def parse_word(text: str) -> Word:
    """Parse space separated positive integers; ``e`` is the empty word."""
    s = text.strip()
    if s in ("", "e"):
        return ()
    out = []
    col = 1
    for tok in s.split():
        col = text.find(tok, col - 1) + 1
        if not tok.isdigit() or int(tok) < 1:
            raise ParseError(f"bad letter {tok!r}", 1, col)
        out.append(int(tok))
        col += len(tok)
    return tuple(out)


def format_word(w: Sequence[int]) -> str:
    return " ".join(map(str, w)) if len(w) else "e"


def subwords(w: Sequence[int]) -> list[Word]:
    """The prefixes of w, from the empty word up to w itself."""
    w = tuple(w)
    return [w[:k] for k in range(len(w) + 1)]


def is_admissible(A: TransitionMatrix, w: Sequence[int]) -> bool:
    return all(A.entry(a, b) for a, b in zip(w, w[1:]))


# ---------------------------------------------------------------------------
# infinite stems


@dataclass(frozen=True)
class InfiniteStem:
    """The eventually periodic word ``head + cycle + cycle + ...``."""

    head: Word
    cycle: Word

    def __post_init__(self):
        if not self.cycle:
            raise PreconditionError("an infinite stem needs a nonempty cycle")

    def prefix(self, n: int) -> Word:
        out = list(self.head[:n])
        k = 0
        while len(out) < n:
            out.append(self.cycle[k % len(self.cycle)])
            k += 1
        return tuple(out)

    def __getitem__(self, k: int) -> int:
        if k < len(self.head):
            return self.head[k]
        return self.cycle[(k - len(self.head)) % len(self.cycle)]

    def shifted(self) -> "InfiniteStem":
        if self.head:
            return InfiniteStem(self.head[1:], self.cycle)
        return InfiniteStem((), self.cycle[1:] + self.cycle[:1])

    def is_admissible(self, A: TransitionMatrix) -> bool:
        w = self.head + self.cycle + self.cycle[:1]
        return is_admissible(A, w)

    def __str__(self) -> str:
        return f"{format_word(self.head)} ({format_word(self.cycle)})^inf" if self.head else f"({format_word(self.cycle)})^inf"


def descending(n: int) -> InfiniteStem:
    """n (n-1) ... 2 1 1 1 ..."""
    return InfiniteStem(tuple(range(n, 0, -1)), (1,))


def constant(n: int, h: int) -> InfiniteStem:
    """n h h h ..."""
    return InfiniteStem((n,), (h,))


# ---------------------------------------------------------------------------
# group elements


@dataclass(frozen=True)
class GroupElement:
    """The element alpha * gamma^-1 of the free group."""

    alpha: Word = ()
    gamma: Word = ()

    @property
    def is_reduced(self) -> bool:
        return not (self.alpha and self.gamma and self.alpha[-1] == self.gamma[-1])

    @property
    def length(self) -> int:
        return len(self.alpha) + len(self.gamma)

    def __str__(self) -> str:
        return f"{format_word(self.alpha)} / {format_word(self.gamma)}"


def parse_group_element(text: str) -> GroupElement:
    if "/" in text:
        a, _, g = text.partition("/")
        return GroupElement(parse_word(a), parse_word(g))
    return GroupElement(parse_word(text), ())


def reduce_cylinder(alpha: Sequence[int], gamma: Sequence[int]) -> GroupElement:
    """Canonical index of the cylinder of alpha gamma^-1.

    The cylinder only depends on alpha and the last letter of gamma (the
    letter adjacent to alpha) once gamma is admissible.
    """
    alpha, gamma = tuple(alpha), tuple(gamma)
    return GroupElement(alpha, gamma[-1:])


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class Configuration:
    """A stem with its root (finite stem) or an infinite stem (root None)."""

    stem: Word | InfiniteStem
    root: Root | None = None

    def __post_init__(self):
        if isinstance(self.stem, InfiniteStem):
            if self.root is not None:
                raise PreconditionError("infinite stems carry no root")
        elif self.root is None:
            raise PreconditionError("a finite stem needs a root")

    @property
    def is_finite(self) -> bool:
        return not isinstance(self.stem, InfiniteStem)

    @property
    def is_empty_word(self) -> bool:
        return self.is_finite and len(self.stem) == 0

    def first_letter(self) -> int:
        if self.is_finite and not self.stem:
            raise PreconditionError("the empty stem has no first letter")
        return self.stem[0]

    def stem_prefix(self, n: int) -> Word:
        if self.is_finite:
            return self.stem[:n]
        return self.stem.prefix(n)

    def to_json(self) -> dict:
        if self.is_finite:
            return {"stem": list(self.stem), "root": self.root.to_json()}
        return {"stem": list(self.stem.head), "root": "infinite:" + format_word(self.stem.cycle)}

    def __str__(self) -> str:
        if self.is_finite:
            return f"({format_word(self.stem)}, {self.root})"
        return str(self.stem)


def configuration_from_json(obj: dict) -> Configuration:
    stem = as_word(obj.get("stem", []))
    root = obj.get("root")
    if root == "all":
        return Configuration(stem, Root.all())
    if isinstance(root, str) and root.startswith("infinite:"):
        return Configuration(InfiniteStem(stem, parse_word(root[len("infinite:") :])))
    if isinstance(root, list):
        return Configuration(stem, Root.from_iterable(root))
    raise ParseError(f"bad root {root!r}", 1, 1)


def is_valid_configuration(A: TransitionMatrix, xi: Configuration, horizon: int = 64) -> bool:
    """Admissible stem; for finite stems a limit-point root containing the last letter."""
    if not xi.is_finite:
        return xi.stem.is_admissible(A)
    if not is_admissible(A, xi.stem):
        return False
    if xi.root not in column_limit_points(A, horizon):
        return False
    return not xi.stem or xi.stem[-1] in xi.root


# ---------------------------------------------------------------------------
# the filled predicate


def filled(A: TransitionMatrix, xi: Configuration, g: GroupElement, depth: int = DEFAULT_DEPTH) -> int:
    """Value of the configuration at the group element g = alpha gamma^-1.

    Positive words are filled exactly when they are prefixes of the stem.
    Walking the inverse letters of gamma away from alpha, the first step
    j^-1 is allowed when A(j, k) = 1 for the next stem letter k, or, when
    alpha is the whole finite stem, when j lies in the root.  Each later
    step is forced by the previous letter, so gamma must be admissible.
    Non-reduced inputs are never filled.
    """
    if g.length > depth:
        raise DepthExceeded(f"|alpha|+|gamma| = {g.length} exceeds depth {depth}")
    if not g.is_reduced:
        return 0
    alpha, gamma = g.alpha, g.gamma
    n = len(alpha)
    if xi.is_finite:
        if n > len(xi.stem) or xi.stem[:n] != alpha:
            return 0
    elif xi.stem.prefix(n) != alpha:
        return 0
    if not gamma:
        return 1
    if not is_admissible(A, gamma):
        return 0
    j = gamma[-1]
    if xi.is_finite and n == len(xi.stem):
        return int(j in xi.root)
    return A.entry(j, xi.stem[n])


def in_cylinder(A: TransitionMatrix, xi: Configuration, g: GroupElement, depth: int = DEFAULT_DEPTH) -> bool:
    return bool(filled(A, xi, g, depth))


# ---------------------------------------------------------------------------
# cylinder decomposition


@dataclass(frozen=True)
class Decomposition:
    """C_{alpha j^-1} as boundary configurations plus child positive cylinders."""

    alpha: Word
    j: int
    boundary: tuple[Configuration, ...]
    children: tuple[Word, ...]
    children_infinite: bool
    horizon: int

    @property
    def is_empty(self) -> bool:
        return not self.boundary and not self.children

    def to_json(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "j": self.j,
            "boundary": [c.to_json() for c in self.boundary],
            "children": [list(w) for w in self.children],
            "children_infinite": self.children_infinite,
            "horizon": self.horizon,
        }


def decompose_inverse_cylinder(A: TransitionMatrix, alpha: Sequence[int], j: int, horizon: int = 64) -> Decomposition:
    """Split C_{alpha j^-1} into finite-stem points and positive cylinders.

    The boundary part holds the configurations with stem alpha whose root
    contains j.  The children are the nonempty cylinders C_{alpha k} with
    A(j, k) = 1 and k <= horizon.  ``children_infinite`` is a finite-evidence
    flag: some admissible child lies in the upper half of the horizon.
    """
    alpha = as_word(alpha)
    if not is_admissible(A, alpha):
        raise PreconditionError(f"alpha {format_word(alpha)} is not admissible")
    if alpha and alpha[-1] == j:
        raise PreconditionError("alpha j^-1 must be reduced")
    boundary = []
    for R in column_limit_points(A, horizon):
        if j in R and (not alpha or alpha[-1] in R):
            boundary.append(Configuration(alpha, R))
    children = []
    for k in range(1, horizon + 1):
        if A.entry(j, k) and (not alpha or A.entry(alpha[-1], k)):
            children.append(alpha + (k,))
    infinite = any(w[-1] > horizon // 2 for w in children)
    return Decomposition(alpha, j, tuple(boundary), tuple(children), infinite, horizon)
