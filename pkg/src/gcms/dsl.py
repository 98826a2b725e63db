"""Text format for transition matrices.

Three forms are accepted::

    builtin: renewal            (or lazy-renewal, pair-renewal, prime-renewal,
                                 n-renewal(N), full, ce1, ce2, ce3)

    finite:
    0110
    1001
    ...

    rules:
    A(1,n)=1
    A(n+1,n)=1
    A(2,2n)=1

Rule expressions are affine in the single free variable ``n`` (which ranges
over the positive integers).  Entries not produced by any rule are zero.
Lines may also be separated by ``;`` so a whole matrix fits on one line.
"""

from __future__ import annotations

import re

from .errors import ParseError, PreconditionError
from .matrix import BUILTINS, Affine, Rule, TransitionMatrix, finite_explicit, n_renewal, rule_list

_NRENEWAL = re.compile(r"n-renewal\((\d+)\)$")


def _split_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.replace(";", "\n").splitlines(), start=1):
        out.append((lineno, raw))
    return out


def parse_affine(src: str, line: int, col0: int) -> Affine:
    """Parse expressions such as ``n``, ``2n``, ``3n-1``, ``4*n+2``, ``7``."""
    s = src.replace(" ", "")
    if not s:
        raise ParseError("empty expression", line, col0)
    a = b = 0
    pos = 0
    # offset of the stripped text inside the raw text, for error columns
    raw_positions = [k for k, ch in enumerate(src) if ch != " "]

    def where(p: int) -> int:
        return col0 + (raw_positions[p] if p < len(raw_positions) else len(src))

    first = True
    while pos < len(s):
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise ParseError(f"expected '+' or '-' but found {s[pos]!r}", line, where(pos))
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        coeff = int(s[start:pos]) if pos > start else None
        if pos < len(s) and s[pos] == "*":
            if coeff is None:
                raise ParseError("'*' needs a numeric factor", line, where(pos))
            pos += 1
            if pos >= len(s) or s[pos] != "n":
                raise ParseError("expected 'n' after '*'", line, where(pos))
        if pos < len(s) and s[pos] == "n":
            pos += 1
            a += sign * (1 if coeff is None else coeff)
        elif coeff is None:
            found = s[pos] if pos < len(s) else "end of expression"
            raise ParseError(f"expected a number or 'n' but found {found!r}", line, where(pos))
        else:
            b += sign * coeff
        first = False
    return Affine(a, b)


_RULE = re.compile(r"^\s*A\s*\((?P<body>.*)\)\s*=\s*1\s*$")


def _parse_rule(raw: str, line: int, offset: int = 0) -> Rule:
    m = _RULE.match(raw)
    if not m:
        col = raw.find("A") + 1 if "A" in raw else len(raw) - len(raw.lstrip()) + 1
        raise ParseError("expected a rule of the form A(expr, expr) = 1", line, offset + col)
    body = m.group("body")
    body_col = offset + m.start("body") + 1
    depth = 0
    comma = -1
    for k, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            if comma >= 0:
                raise ParseError("too many arguments to A(...)", line, body_col + k)
            comma = k
    if comma < 0:
        raise ParseError("A(...) needs two arguments", line, body_col + len(body))
    row = parse_affine(body[:comma], line, body_col)
    col = parse_affine(body[comma + 1 :], line, body_col + comma + 1)
    return Rule(row, col)


def parse_matrix(text: str) -> TransitionMatrix:
    """Parse the matrix text format.  Raises :class:`ParseError` with position."""
    lines = [(n, l) for n, l in _split_lines(text) if l.strip() and not l.strip().startswith("#")]
    if not lines:
        raise ParseError("empty matrix description", 1, 1)
    head_line, head = lines[0]
    if ":" not in head:
        raise ParseError("expected 'builtin:', 'finite:' or 'rules:'", head_line, 1)
    kind, _, rest = head.partition(":")
    kind = kind.strip()
    rest_col = len(head) - len(rest) + 1
    body = ([(head_line, rest)] if rest.strip() else []) + lines[1:]
    if kind == "builtin":
        if len(body) != 1:
            raise ParseError("builtin takes exactly one name", body[1][0] if len(body) > 1 else head_line, 1)
        ln, name_raw = body[0]
        name = name_raw.strip()
        col = (rest_col if ln == head_line else 1) + len(name_raw) - len(name_raw.lstrip())
        if name in BUILTINS:
            return BUILTINS[name]()
        m = _NRENEWAL.match(name)
        if m:
            try:
                return n_renewal(int(m.group(1)))
            except PreconditionError as exc:
                raise ParseError(str(exc), ln, col) from None
        raise ParseError(f"unknown builtin {name!r}", ln, col)
    if kind == "finite":
        rows = []
        for ln, raw in body:
            row = []
            for k, ch in enumerate(raw):
                if ch in "01":
                    row.append(int(ch))
                elif not ch.isspace():
                    c = (rest_col if ln == head_line else 1) + k
                    raise ParseError(f"unexpected character {ch!r} in finite row", ln, c)
            rows.append(row)
        if not rows or any(len(r) != len(rows) for r in rows):
            ln = body[-1][0] if body else head_line
            raise ParseError("finite matrix must be square", ln, 1)
        return finite_explicit(rows)
    if kind == "rules":
        if not body:
            raise ParseError("rules: needs at least one rule", head_line, rest_col)
        rules = [_parse_rule(raw, ln, rest_col - 1 if ln == head_line else 0) for ln, raw in body]
        return rule_list(rules)
    raise ParseError(f"unknown matrix kind {kind!r}", head_line, 1)


def format_matrix(A: TransitionMatrix) -> str:
    """Inverse of :func:`parse_matrix`."""
    if A.is_builtin:
        return f"builtin: {A.name}"
    if A.family == "finite":
        return "finite:\n" + "\n".join("".join(map(str, r)) for r in A.rows)
    return "rules:\n" + "\n".join(str(r) for r in A.rules)
