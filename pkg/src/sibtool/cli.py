"""``sibtool`` command line.

Every verb prints a human-readable answer, or with ``--json`` one report
object ``{"command", "verb", "result", "timing", "warnings"}``.  Structures
are always emitted in the canonical text serialization.

Exit codes: 0 success (negative answers included), 1 internal check failure,
2 usage error, 3 input error, 4 time guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field

import jsonschema

from . import builders
from .cliques import enumerate_maximal_kcliques
from .embed import census, find_embedding, is_isomorphic, same_age_up_to
from .errors import InternalCheckError, SearchTimeout, SibtoolError
from .mutalg import component_census, ma_bound, ma_components, max_disjoint_realizations, parse_conjunction
from .presentations import (
    CellularPresentation,
    ComponentChainSpec,
    GridPresentation,
    classify,
    dump_presentation,
    generate_Mstar_ell,
    generate_Nf,
    generate_NS,
    load_presentation,
    separate,
)
from .structure import Structure, parse_structure, serialize_structure

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2, 3, 4

_STR = {"type": "string"}
_INT = {"type": "integer"}
_BOOL = {"type": "boolean"}
_INTS = {"type": "array", "items": _INT}
_MAP = {"oneOf": [_INTS, {"type": "null"}]}


def _obj(**props):
    return {"type": "object", "required": sorted(props), "properties": props}


RESULT_SCHEMAS = {
    "parse": _obj(size=_INT, language={"type": "array", "items": _STR}, facts=_INT, structure=_STR),
    "cliques": _obj(k=_INT, cliques={"type": "array", "items": {"type": "array", "items": _INTS}},
                    census={"type": "object", "additionalProperties": _INT}),
    "ma": _obj(bounds={"type": "object", "additionalProperties": _INT}),
    "components": _obj(components={"type": "array", "items": _INTS},
                       classes={"type": "array", "items": _obj(representative=_STR, multiplicity=_INT,
                                                                components={"type": "array", "items": _INTS})}),
    "pack": _obj(formula=_STR, cap=_INT, value=_INT),
    "embed": _obj(embeds=_BOOL, map=_MAP),
    "iso": _obj(isomorphic=_BOOL, map=_MAP),
    "census": _obj(blocks={"type": "array", "items": _obj(
        representative=_STR, members={"type": "array", "items": _STR},
        sub_blocks={"type": "array", "items": {"type": "array", "items": _STR}})}),
    "age": _obj(same_age=_BOOL, s=_INT),
    "validate": _obj(kind=_STR, valid=_BOOL, t=_INT, checks=_INT, problems={"type": "array", "items": _STR}),
    "classify": _obj(kind=_STR, verdict={"enum": ["ONE", "ALEPH0", "CONTINUUM"]}, justification=_STR),
    "truncate": _obj(structure=_STR),
    "separate": _obj(presentation={"type": "object"}, changed=_BOOL),
    "generate": _obj(generator=_STR, structure=_STR),
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "verb", "result", "timing", "warnings"],
    "properties": {
        "command": {"type": "array", "items": _STR},
        "verb": {"enum": sorted(RESULT_SCHEMAS)},
        "result": {"type": "object"},
        "timing": _obj(seconds={"type": "number", "minimum": 0}),
        "warnings": {"type": "array", "items": _STR},
    },
    "additionalProperties": False,
}


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` unless ``doc`` is a well-formed report."""
    jsonschema.validate(doc, REPORT_SCHEMA)
    jsonschema.validate(doc["result"], RESULT_SCHEMAS[doc["verb"]])


@dataclass
class Report:
    command: list
    verb: str
    result: dict
    seconds: float = 0.0
    warnings: list = field(default_factory=list)
    text: str = ""  # human-readable rendering

    def as_json(self) -> dict:
        return {
            "command": list(self.command),
            "verb": self.verb,
            "result": self.result,
            "timing": {"seconds": round(self.seconds, 6)},
            "warnings": list(self.warnings),
        }


class UsageError(Exception):
    pass


class _Collect(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.messages = []

    def emit(self, record):
        self.messages.append(record.getMessage())


# -- argument parsing ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p):
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit a JSON report")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker threads (accepted; results do not depend on it)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized helpers")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _common(common)
    parser = _Parser(prog="sibtool", parents=[common],
                     description="Exchangeability, cliques, mutual algebraicity and sibling generators.")
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser)
    sub.required = True

    def verb(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = verb("parse", "parse and re-serialize a structure")
    p.add_argument("file")
    p = verb("cliques", "maximal k-cliques")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--pool", help="file with one k-tuple per line")
    p.add_argument("file")
    p = verb("ma", "mutual-algebraicity bounds per relation")
    p.add_argument("file")
    p.add_argument("--relation")
    p = verb("components", "MA-connected components and their census")
    p.add_argument("file")
    p = verb("pack", "maximum number of pairwise disjoint realizations")
    p.add_argument("file")
    p.add_argument("--formula", required=True)
    p.add_argument("--cap", type=int, default=32)
    p = verb("embed", "find an embedding of A into B")
    p.add_argument("a")
    p.add_argument("b")
    p = verb("iso", "find an isomorphism between A and B")
    p.add_argument("a")
    p.add_argument("b")
    p = verb("census", "partition structures by bi-embeddability")
    p.add_argument("files", nargs="+")
    p = verb("age", "compare small induced substructures")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--s", type=int, required=True)
    p = verb("validate", "check a presentation on a truncation")
    p.add_argument("pres")
    p.add_argument("--t", type=int)
    p = verb("classify", "number of siblings of a presented structure")
    p.add_argument("pres")
    p = verb("truncate", "finite truncation of a presentation")
    p.add_argument("pres")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("-o", "--output")
    p = verb("separate", "split families until separated")
    p.add_argument("pres")
    p.add_argument("--t", type=int)
    p.add_argument("-o", "--output")

    gen = verb("generate", "sibling-family generators")
    gsub = gen.add_subparsers(dest="generator", parser_class=_Parser)
    gsub.required = True

    def generator(name, help_):
        g = gsub.add_parser(name, parents=[common], help=help_)
        g.add_argument("-o", "--output")
        return g

    g = generator("eqrel", "equivalence relation with given class sizes")
    g.add_argument("--classes", required=True)
    g = generator("nf", "grid truncation with cliques cut to sizes")
    g.add_argument("--spec", required=True)
    g.add_argument("--cut", default="")
    g.add_argument("--t", type=int, required=True)
    g = generator("mstar", "strand the first members of a family")
    g.add_argument("--spec", required=True)
    g.add_argument("--family", required=True)
    g.add_argument("--ell", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g = generator("ns", "chain links selected by index")
    g.add_argument("--spec", required=True)
    g.add_argument("--s", default="")
    g.add_argument("--t", type=int, required=True)
    return parser


# -- helpers ----------------------------------------------------------------------------------


def _read_structure(path) -> Structure:
    try:
        with open(path, "rb") as fh:
            return parse_structure(fh.read())
    except SibtoolError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _read_presentation(path, kinds=None):
    p = load_presentation(path)
    if kinds and not isinstance(p, kinds):
        from .errors import PresentationError

        raise PresentationError(f"{path}: expected a {' or '.join(k.kind for k in kinds)} presentation")
    return p


def _int_list(raw, what):
    raw = raw.strip()
    if not raw:
        return []
    try:
        return [int(x) for x in raw.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers") from None


def _cut(raw):
    out = {}
    for item in filter(None, (x.strip() for x in raw.split(","))):
        label, sep, size = item.partition("=")
        if not sep or not size.strip().lstrip("-").isdigit():
            raise UsageError(f"bad --cut entry {item!r}; use label=SIZE")
        if label in out:
            raise UsageError(f"label {label!r} cut twice")
        out[label.strip()] = int(size)
    return out


def _read_pool(path, k):
    from .errors import StructureError

    pool = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                tup = tuple(int(x) for x in line.split())
            except ValueError:
                raise StructureError(f"{path}: line {lineno}: pool lines hold integers") from None
            if len(tup) != k:
                raise StructureError(f"{path}: line {lineno}: expected {k} entries")
            pool.append(tup)
    return pool


def _write(text, out_path):
    """Write ``text`` to ``out_path`` if given; returns what to print."""
    if not out_path:
        return text
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return f"wrote {out_path}\n"


def _map(w):
    return list(w.mapping) if w is not None else None


# -- verbs ------------------------------------------------------------------------------------


def _do(args):
    v = args.verb
    if v == "parse":
        m = _read_structure(args.file)
        text = serialize_structure(m)
        res = {"size": m.size, "language": [f"{n}/{a}" for n, a in m.signature], "facts": len(m.facts),
               "structure": text}
        return res, text
    if v == "cliques":
        m = _read_structure(args.file)
        if args.k < 1:
            raise UsageError("--k must be at least 1")
        pool = _read_pool(args.pool, args.k) if args.pool else None
        cl = enumerate_maximal_kcliques(m, args.k, pool=pool)
        census_ = {}
        for c in cl:
            census_[str(c.size)] = census_.get(str(c.size), 0) + 1
        census_ = dict(sorted(census_.items(), key=lambda kv: int(kv[0])))
        res = {"k": args.k, "cliques": [[list(t) for t in c.sorted_members()] for c in cl], "census": census_}
        lines = [f"{len(cl)} maximal {args.k}-cliques; sizes " +
                 ", ".join(f"{s}x{n}" for s, n in census_.items())]
        lines += [f"  size {c.size}: " + " ".join("(" + ",".join(map(str, t)) + ")" for t in c.sorted_members())
                  for c in cl]
        return res, "\n".join(lines) + "\n"
    if v == "ma":
        m = _read_structure(args.file)
        names = [args.relation] if args.relation else list(m.signature.names)
        bounds = {n: ma_bound(m, n) for n in names}
        return {"bounds": bounds}, "".join(f"{n}: bounded with K={k}\n" for n, k in bounds.items())
    if v == "components":
        m = _read_structure(args.file)
        comps = ma_components(m)
        classes = component_census(m)
        res = {"components": [list(c) for c in comps],
               "classes": [{"representative": serialize_structure(c.representative),
                            "multiplicity": c.multiplicity,
                            "components": [list(x) for x in c.components]} for c in classes]}
        text = f"{len(comps)} components in {len(classes)} isomorphism classes\n"
        text += "".join(f"  x{c.multiplicity} size {c.representative.size}: {[list(x) for x in c.components]}\n"
                        for c in classes)
        return res, text
    if v == "pack":
        m = _read_structure(args.file)
        phi = parse_conjunction(args.formula)
        if args.cap < 1:
            raise UsageError("--cap must be at least 1")
        value = max_disjoint_realizations(m, phi, args.cap)
        return {"formula": str(phi), "cap": args.cap, "value": value}, f"{value}\n"
    if v in ("embed", "iso"):
        a, b = _read_structure(args.a), _read_structure(args.b)
        w = find_embedding(a, b) if v == "embed" else is_isomorphic(a, b)
        key = "embeds" if v == "embed" else "isomorphic"
        text = f"{key}: {'yes' if w else 'no'}\n" + (f"map: {list(w.mapping)}\n" if w else "")
        return {key: w is not None, "map": _map(w)}, text
    if v == "census":
        ss = [_read_structure(f) for f in args.files]
        part = census(ss)
        blocks = [{"representative": b.representative,
                   "members": [args.files[i] for i in b.members],
                   "sub_blocks": [[args.files[i] for i in sb] for sb in b.sub_blocks]} for b in part.blocks]
        text = f"{len(blocks)} blocks\n" + "".join(f"  {' '.join(b['members'])}\n" for b in blocks)
        return {"blocks": blocks}, text
    if v == "age":
        if args.s < 1:
            raise UsageError("--s must be at least 1")
        a, b = _read_structure(args.a), _read_structure(args.b)
        same = same_age_up_to(a, b, args.s)
        return {"same_age": same, "s": args.s}, f"same age up to {args.s}: {'yes' if same else 'no'}\n"
    if v == "validate":
        p = _read_presentation(args.pres)
        if args.t is not None and args.t < 3 and not isinstance(p, ComponentChainSpec):
            raise UsageError("--t must be at least 3")
        rep = p.validate(args.t)
        res = {"kind": p.kind, "valid": rep.valid, "t": rep.t, "checks": rep.checks, "problems": rep.problems}
        text = f"{'valid' if rep.valid else 'INVALID'} ({rep.checks} checks at t={rep.t})\n"
        text += "".join(f"  {x}\n" for x in rep.problems)
        return res, text
    if v == "classify":
        p = _read_presentation(args.pres)
        verdict = classify(p)
        res = {"kind": p.kind, "verdict": verdict.verdict.name, "justification": verdict.justification}
        return res, f"{verdict.verdict.name}: {verdict.justification}\n"
    if v == "truncate":
        if args.t < 0:
            raise UsageError("--t must be non-negative")
        p = _read_presentation(args.pres)
        text = serialize_structure(p.truncate(args.t))
        return {"structure": text}, _write(text, args.output)
    if v == "separate":
        p = _read_presentation(args.pres, (CellularPresentation,))
        q = separate(p, args.t)
        doc = q.to_json()
        text = _write(dump_presentation(q), args.output)
        return {"presentation": doc, "changed": q is not p}, text
    if v == "generate":
        g = args.generator
        if g == "eqrel":
            sizes = _int_list(args.classes, "--classes")
            if any(x < 1 for x in sizes):
                raise UsageError("class sizes must be positive")
            s = builders.eqrel(sizes)
        elif g == "nf":
            grid = _read_presentation(args.spec, (GridPresentation,))
            s = generate_Nf(grid, _cut(args.cut), args.t)
        elif g == "mstar":
            p = _read_presentation(args.spec, (CellularPresentation,))
            fam = int(args.family) if args.family.isdigit() else args.family
            s = generate_Mstar_ell(p, fam, args.ell, args.t).structure
        else:
            c = _read_presentation(args.spec, (ComponentChainSpec,))
            s = generate_NS(c, _int_list(args.s, "--s"), args.t)
        text = serialize_structure(s)
        return {"generator": g, "structure": text}, _write(text, args.output)
    raise UsageError(f"unknown verb {v!r}")


def run(argv) -> Report:
    """Parse ``argv`` and execute one verb.  Errors propagate."""
    argv = list(argv)
    args = build_parser().parse_args(argv)
    threads = getattr(args, "threads", 1)
    if threads is not None and threads < 1:
        raise UsageError("--threads must be at least 1")
    collect = _Collect()
    root = logging.getLogger("sibtool")
    root.addHandler(collect)
    start = time.perf_counter()
    try:
        result, text = _do(args)
    finally:
        root.removeHandler(collect)
    return Report(argv, args.verb, result, time.perf_counter() - start, collect.messages, text)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    want_json = "--json" in argv
    try:
        report = run(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SearchTimeout as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except InternalCheckError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (SibtoolError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if want_json:
        print(json.dumps(report.as_json(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report.text)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
