"""Command-line front end.

Every run writes one document (JSON or CSV) that starts by echoing the fully
resolved configuration.  Exit codes: 0 on success, 2 on precondition or input
errors (with a JSON error object), 1 on internal failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import re
import sys
from pathlib import Path
from typing import Any, Sequence

from . import conformal as cf
from . import convergence as cv
from . import dynamics as dy
from . import spectral as sp
from .dsl import format_matrix, parse_matrix
from .errors import GCMSError, ParseError, PreconditionError, UnknownSubcommand
from .matrix import Root, TransitionMatrix, classify, column_limit_points
from .words import Configuration, format_word, parse_word

SUBCOMMANDS = ("classify", "enumerate", "extend-check", "conformal", "verify", "spectral", "converge")
DEFAULT_HORIZON = 64


# ---------------------------------------------------------------------------
# serialization


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, bool)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_document(config: dict, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for k, v in config.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def read_csv_document(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`csv_document`: the echoed configuration and the data rows."""
    config = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            config[k] = v
        else:
            body.append(line)
    return config, list(csv.DictReader(body))


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401
        raise PreconditionError(message)


def _horizon_default() -> int:
    raw = os.environ.get("GCMS_HORIZON")
    if raw is None:
        return DEFAULT_HORIZON
    try:
        return int(raw)
    except ValueError:
        raise PreconditionError(f"GCMS_HORIZON must be an integer, got {raw!r}") from None


def load_matrix(source: str) -> TransitionMatrix:
    """A DSL string, or a path to a file holding one."""
    try:
        is_file = "\n" not in source and Path(source).is_file()
    except (OSError, ValueError):
        is_file = False
    return parse_matrix(Path(source).read_text(encoding="utf-8") if is_file else source)


def parse_root(text: str) -> Root:
    s = text.strip().strip("{}")
    if s == "all":
        return Root.all()
    try:
        syms = [int(t) for t in re.split(r"[,\s]+", s) if t]
    except ValueError:
        raise ParseError(f"bad root {text!r}", 1, 1) from None
    if not syms or min(syms) < 1:
        raise ParseError(f"bad root {text!r}", 1, 1)
    return Root.from_iterable(syms)


def parse_potential(text: str) -> cf.Potential:
    if text == "logratio":
        return cf.LogRatio()
    if text.startswith("const:"):
        try:
            return cf.Constant(float(text[len("const:") :]))
        except ValueError:
            raise ParseError(f"bad constant in {text!r}", 1, len("const:") + 1) from None
    if text.startswith("first:"):
        path = Path(text[len("first:") :])
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise PreconditionError(f"cannot read potential file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad potential JSON: {exc.msg}", exc.lineno, exc.colno) from None
        return cf.FirstLetter.from_mapping(obj.get("values", {}), obj.get("default", 0.0))
    raise ParseError(f"unknown potential {text!r}", 1, 1)


def parse_range(text: str) -> list[int]:
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if m:
        return list(range(int(m.group(1)), int(m.group(2)) + 1))
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"bad length list {text!r}", 1, 1) from None


def parse_betas(text: str) -> list[float]:
    m = re.fullmatch(r"\s*auto\(\s*log2\s*,\s*\+?([0-9.eE+-]+)\s*,\s*(\d+)\s*(?:steps)?\s*\)\s*", text)
    if m:
        return cv.auto_betas(float(m.group(1)), int(m.group(2)))
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "log2":
            out.append(math.log(2.0))
            continue
        mm = re.fullmatch(r"log2\s*\+\s*([0-9.eE+-]+)", tok)
        try:
            out.append(math.log(2.0) + float(mm.group(1)) if mm else float(tok))
        except ValueError:
            raise ParseError(f"bad beta {tok!r}", 1, text.find(tok) + 1) from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gcms", description="Generalized countable Markov shifts: enumeration, extension, conformal measures, spectral radii.")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized corpora")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp_: argparse.ArgumentParser, matrix: bool = True, fmt: tuple[str, ...] = ("json",)):
        if matrix:
            sp_.add_argument("--matrix", required=True, help="matrix DSL text or a file holding it")
        sp_.add_argument("--horizon", type=int, default=None)
        sp_.add_argument("--format", "--out", dest="format", choices=fmt, default=fmt[0])
        sp_.add_argument("--output", default=None, help="write the document here instead of standard output")
        sp_.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    c = sub.add_parser("classify", help="class membership of a matrix")
    common(c)

    e = sub.add_parser("enumerate", help="finite-stem configurations of one empty-word family")
    common(e, fmt=("json", "csv"))
    e.add_argument("--root", required=True)
    e.add_argument("--length", type=int, required=True)

    x = sub.add_parser("extend-check", help="continuous extendability of the shift")
    common(x)
    x.add_argument("--alpha0", default=None, help="also test the image of e_{e,F}; F as comma list")

    for name in ("conformal", "verify"):
        k = sub.add_parser(name, help="atomic conformal measure" if name == "conformal" else "conformality checks")
        common(k, fmt=("json", "csv"))
        k.add_argument("--potential", default="const:1")
        k.add_argument("--beta", type=float, default=None)
        k.add_argument("--root", default=None)
        k.add_argument("--tol", type=float, default=cf.DEFAULT_TOL)
        k.add_argument("--max-atoms", type=int, default=cf.DEFAULT_MAX_ATOMS)
        if name == "conformal":
            k.add_argument("--scan", default=None, help="beta grid for the phase-transition scan")
        else:
            k.add_argument("--check-tol", type=float, default=1e-10)
            k.add_argument("--cylinder-length", type=int, default=4)
            k.add_argument("--max-n", type=int, default=3)
            k.add_argument("--perturb", default=None, help="STEM:DELTA, add DELTA to one atom first")

    s = sub.add_parser("spectral", help="spectral radius of a weighted endomorphism")
    common(s)
    s.add_argument("--weight", required=True, help="weight JSON, inline or a file")
    s.add_argument("--brute-force", type=int, default=None, help="also run the periodic-orbit oracle to this period")

    v = sub.add_parser("converge", help="cylinder values as beta decreases to log 2")
    common(v, matrix=False, fmt=("csv", "json"))
    v.add_argument("--lengths", default="1..6")
    v.add_argument("--betas", default="auto(log2,+0.3,8 steps)")
    v.add_argument("--tol", type=float, default=cf.DEFAULT_TOL)
    return p


# ---------------------------------------------------------------------------
# subcommands


def _config(args: argparse.Namespace, horizon: int, **extra) -> dict:
    d = {"subcommand": args.command}
    if getattr(args, "matrix", None) is not None:
        d["matrix"] = format_matrix(args.matrix_obj).replace("\n", "; ")
    d["horizon"] = horizon
    d["format"] = args.format
    d["seed"] = args.seed
    d.update(extra)
    return d


def _cmd_classify(args, A, H):
    rep = classify(A, H)
    return {"config": _config(args, H), "report": rep.to_json()}


def _cmd_enumerate(args, A, H):
    root = parse_root(args.root)
    confs = dy.enumerate_finite_words(A, root, args.length, H)
    cfg = _config(args, H, root=str(root), length=args.length)
    if args.format == "csv":
        return csv_document(cfg, ["stem", "root"], [[format_word(c.stem), str(c.root)] for c in confs])
    return {"config": cfg, "count": len(confs), "configurations": [c.to_json() for c in confs]}


def _cmd_extend(args, A, H):
    verdict = dy.extension_verdict(A, H)
    out = {"config": _config(args, H, alpha0=args.alpha0), "verdict": verdict.to_json()}
    if args.alpha0:
        F = [int(t) for t in args.alpha0.split(",") if t.strip()]
        out["alpha0"] = dy.alpha0_continuity_check(A, F, H).to_json()
    return out


def _measure_setup(args, A, H):
    F = parse_potential(args.potential)
    if args.beta is None and getattr(args, "scan", None) is None:
        raise PreconditionError("--beta is required")
    root = parse_root(args.root) if args.root else None
    return F, root


def _cmd_conformal(args, A, H):
    F, root = _measure_setup(args, A, H)
    if args.scan is not None:
        scan = cf.critical_beta_scan(A, F, parse_betas(args.scan), root, horizon=H)
        cfg = _config(args, H, potential=F.spec(), scan=args.scan, root=str(scan.root))
        if args.format == "csv":
            rows = [[r.beta, r.status, r.c_empty[0] if r.c_empty else "", r.c_empty[1] if r.c_empty else "", r.threshold if r.threshold is not None else ""] for r in scan.rows]
            return csv_document(cfg, ["beta", "status", "c_empty_lo", "c_empty_hi", "threshold"], rows)
        return {"config": cfg, "scan": scan.to_json()}
    if root is None:
        root = column_limit_points(A, H)[0]
    res = cf.normalize(A, F, args.beta, root, args.tol, args.max_atoms, H)
    cfg = _config(args, H, potential=F.spec(), beta=args.beta, root=str(root), tol=args.tol, max_atoms=args.max_atoms)
    if not isinstance(res, cf.AtomicMeasure):
        if args.format == "csv":
            return csv_document(dict(cfg, status=res.to_json()["status"]), ["stem", "root", "weight"], [])
        return {"config": cfg, "measure": res.to_json()}
    if args.format == "csv":
        rows = [[format_word(k.stem), str(k.root), v] for k, v in sorted(res.atoms.items(), key=lambda kv: (len(kv[0].stem), kv[0].stem))]
        return csv_document(dict(cfg, c_empty=format(res.c_empty, ".17g"), tail_bound=format(res.tail_bound, ".17g")), ["stem", "root", "weight"], rows)
    m = res.to_json()
    m["status"] = "Measure"
    lo, hi = cf.total_mass(res)
    m["total_mass"] = [lo, hi]
    m["checks"] = [r.to_json() for r in cf.run_all_checks(A, res, F, args.beta, 1e-10)]
    return {"config": cfg, "measure": m}


def _cmd_verify(args, A, H):
    F, root = _measure_setup(args, A, H)
    if root is None:
        root = column_limit_points(A, H)[0]
    res = cf.normalize(A, F, args.beta, root, args.tol, args.max_atoms, H)
    cfg = _config(
        args, H, potential=F.spec(), beta=args.beta, root=str(root), tol=args.tol, check_tol=args.check_tol,
        cylinder_length=args.cylinder_length, max_n=args.max_n, perturb=args.perturb,
    )
    if not isinstance(res, cf.AtomicMeasure):
        raise PreconditionError(f"no normalized measure at beta = {args.beta}: {res.to_json()['status']}")
    if args.perturb:
        stem_txt, _, delta = args.perturb.rpartition(":")
        res = cf.perturb(res, Configuration(parse_word(stem_txt), root), float(delta))
    reports = cf.run_all_checks(A, res, F, args.beta, args.check_tol, args.cylinder_length, args.max_n)
    if args.format == "csv":
        return csv_document(cfg, ["check", "passed", "worst", "worst_at", "checked"], [[r.name, r.passed, r.worst, r.worst_at or "", r.checked] for r in reports])
    return {"config": cfg, "all_passed": all(r.passed for r in reports), "checks": [r.to_json() for r in reports]}


def _load_weight(text: str) -> sp.GAElement:
    p = Path(text)
    raw = p.read_text(encoding="utf-8") if not text.lstrip().startswith("{") and p.is_file() else text
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad weight JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return sp.ga_element_from_json(obj)


def _cmd_spectral(args, A, H):
    a = _load_weight(args.weight)
    res = sp.spectral_radius(a, A, H)
    out = {"config": _config(args, H, weight=a.to_json(), brute_force=args.brute_force), **res.to_json()}
    if args.brute_force:
        out["brute_force_radius"] = sp.brute_force_radius(a, A, args.brute_force, H)
    return out


def _cmd_converge(args, A, H):
    lengths = parse_range(args.lengths)
    betas = parse_betas(args.betas)
    rep = cv.converge_report(cv.renewal_cylinders(lengths), betas, args.tol)
    cfg = _config(args, H, lengths=args.lengths, betas=" ".join(format(b, ".17g") for b in betas), tol=args.tol)
    if args.format == "csv":
        return csv_document(cfg, ["alpha", "beta", "mu_beta", "nu", "gap"], list(rep.rows()))
    return {"config": cfg, "report": rep.to_json()}


HANDLERS = {
    "classify": _cmd_classify,
    "enumerate": _cmd_enumerate,
    "extend-check": _cmd_extend,
    "conformal": _cmd_conformal,
    "verify": _cmd_verify,
    "spectral": _cmd_spectral,
    "converge": _cmd_converge,
}


def _first_positional(argv: Sequence[str]) -> str | None:
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--seed":
            skip = True
            continue
        if tok.startswith("-"):
            continue
        return tok
    return None


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Execute one command; returns the exit code and the output document."""
    try:
        cmd = _first_positional(argv)
        if cmd is None:
            raise UnknownSubcommand(f"missing subcommand; expected one of {', '.join(SUBCOMMANDS)}")
        if cmd not in SUBCOMMANDS:
            raise UnknownSubcommand(f"unknown subcommand {cmd!r}; expected one of {', '.join(SUBCOMMANDS)}")
        args = build_parser().parse_args(list(argv))
        random.seed(args.seed)
        H = args.horizon if args.horizon is not None else _horizon_default()
        if H < 2:
            raise PreconditionError("horizon must be at least 2")
        A = load_matrix(args.matrix) if getattr(args, "matrix", None) is not None else None
        args.matrix_obj = A
        doc = HANDLERS[args.command](args, A, H)
        text = doc if isinstance(doc, str) else dumps(doc) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            return 0, ""
        return 0, text
    except GCMSError as exc:
        return 2, dumps({"error": exc.to_dict()}) + "\n"
    except Exception as exc:  # noqa: BLE001
        return 1, dumps({"error": {"type": "InternalError", "message": f"{type(exc).__name__}: {exc}"}}) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, text = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
