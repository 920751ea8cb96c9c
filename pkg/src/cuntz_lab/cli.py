"""Command line interface and the JSON document formats.

Three document kinds share ``format_version`` 1:

* descriptor documents (``"kind": "descriptor"``) for algebra descriptors;
* Cu documents (``"kind": "cu"``) holding a single Cu object;
* diagram documents (``"kind": "diagram"``) holding finite stages, connecting
  maps and optionally a cone, or the built-in coordinate diagram.

Serialisation is canonical: sorted keys, decimal integers, two-space indent.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import jsonschema

from . import fixtures
from .abelian import FgAbGroup, GroupElement, IntMatrix
from .common import Check, Decision
from .cu_core import (
    DEFAULT_BUDGET,
    DEFAULT_DEPTH,
    INF,
    CuMap,
    Ek,
    check_axioms,
    cu_from_json,
    cu_to_json,
    decode_element,
    encode_element,
    positively_directed,
    weak_cancellation,
)
from .cu_limits import (
    Diagram,
    check_factorisation,
    check_uniqueness,
    coordinate_diagram,
    frozen_target,
    EvSeq,
    increasing_sequences_reaching,
    is_eventually_increasing,
    limit_object,
    universal_map,
    unreachable_from_earlier_stages,
)
from .errors import CuntzLabError, NotInCuU, SchemaError, ValidationError
from .total_cu import (
    TotalCu,
    alpha_map,
    check_alpha_order_iso,
    check_k_pure_exactness,
    gr_report_for,
    make_descriptor,
    recover_kstar,
    recover_total_k,
    total_cu_isomorphic,
    validate_descriptor,
)

FORMAT_VERSION = 1
EXIT = {"pass": 0, "fail": 1, "undecided": 2, "error": 3}

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
_group = {
    "type": "object",
    "required": ["generators", "relations"],
    "properties": {"generators": {"type": "integer", "minimum": 0}, "relations": _matrix},
}
DESCRIPTOR_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "name", "flags", "cu", "ideals", "deltas", "k0",
                 "unit", "support"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "descriptor"},
        "name": {"type": "string"},
        "flags": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "cu": {"type": "object", "required": ["kind"]},
        "support": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "ideals": {
            "type": "array", "minItems": 1,
            "items": {"type": "object", "required": ["name", "generator", "K0", "K1"],
                      "properties": {"name": {"type": "string"}, "K0": _group, "K1": _group}},
        },
        "deltas": {
            "type": "array",
            "items": {"type": "object", "required": ["from", "to", "K0", "K1"],
                      "properties": {
                          "from": {"type": "string"}, "to": {"type": "string"},
                          "K0": _matrix, "K1": _matrix,
                          "mods": {"type": "array", "items": {
                              "type": "object", "required": ["degree", "n", "matrix"],
                              "properties": {"degree": {"enum": [0, 1]},
                                             "n": {"type": "integer"},
                                             "matrix": _matrix}}}}},
        },
        "k0": _matrix,
        "quotients": {
            "type": "array",
            "items": {"type": "object", "required": ["ideal", "K0", "K1", "pi0", "pi1"],
                      "properties": {"ideal": {"type": "string"}, "K0": _group, "K1": _group,
                                     "pi0": _matrix, "pi1": _matrix}},
        },
    },
}
CU_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "name", "cu"],
    "properties": {"format_version": {"const": FORMAT_VERSION}, "kind": {"const": "cu"},
                   "name": {"type": "string"}, "cu": {"type": "object", "required": ["kind"]}},
}
_table = {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}}
DIAGRAM_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "name"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "diagram"},
        "name": {"type": "string"},
        "builtin": {"enum": ["coordinate"]},
        "N": {"type": "integer", "minimum": 2},
        "stages": {"type": "array", "items": {"type": "object"}},
        "maps": {"type": "array", "items": _table},
        "tail": {"enum": ["identity"]},
        "cone": {"type": "object", "required": ["target", "maps"],
                 "properties": {"target": {"type": "object"},
                                "maps": {"type": "array", "items": _table}}},
    },
}
SCHEMAS = {"descriptor": DESCRIPTOR_SCHEMA, "cu": CU_SCHEMA, "diagram": DIAGRAM_SCHEMA}


# -- serialisation ----------------------------------------------------------------

def _group_json(G):
    return {"generators": G.num_generators, "relations": G.relations.to_lists()}


def _group_from(obj):
    return FgAbGroup(obj["generators"], obj["relations"])


def descriptor_to_json(d):
    index = {i: I.name for i, I in enumerate(d.ideals)}
    deltas = []
    for (i, j), h in sorted(d.deltas.items()):
        mods = [{"degree": k, "n": n, "matrix": h.mods[(k, n)].matrix.to_lists()}
                for n in d.support for k in (0, 1)]
        deltas.append({"from": index[i], "to": index[j], "K0": h.f[0].matrix.to_lists(),
                       "K1": h.f[1].matrix.to_lists(), "mods": mods})
    quotients = [{"ideal": index[i], "K0": _group_json(Q.K.K0), "K1": _group_json(Q.K.K1),
                  "pi0": Q.pi.f[0].matrix.to_lists(), "pi1": Q.pi.f[1].matrix.to_lists()}
                 for i, Q in sorted(d.quotients.items())]
    return {
        "format_version": FORMAT_VERSION,
        "kind": "descriptor",
        "name": d.name,
        "flags": dict(d.flags),
        "support": list(d.support),
        "cu": cu_to_json(d.cu),
        "ideals": [{"name": I.name, "generator": encode_element(I.generator),
                    "K0": _group_json(I.K.K0), "K1": _group_json(I.K.K1)} for I in d.ideals],
        "deltas": deltas,
        "k0": d.k0.matrix.to_lists(),
        "unit": None if d.unit is None else encode_element(d.unit),
        "quotients": quotients,
    }


def descriptor_from_json(obj):
    _schema_check(obj, "descriptor")
    names = [I["name"] for I in obj["ideals"]]
    for k, delta in enumerate(obj["deltas"]):
        for end in ("from", "to"):
            if delta[end] not in names:
                raise SchemaError(f"deltas[{k}].{end}: unknown ideal {delta[end]!r}")
    for k, q in enumerate(obj.get("quotients", [])):
        if q["ideal"] not in names:
            raise SchemaError(f"quotients[{k}].ideal: unknown ideal {q['ideal']!r}")
    try:
        cu = cu_from_json(obj["cu"])
        ideals = [(I["name"], decode_element(I["generator"]), _group_from(I["K0"]),
                   _group_from(I["K1"])) for I in obj["ideals"]]
        deltas = {(e["from"], e["to"]): (e["K0"], e["K1"]) for e in obj["deltas"]}
        mods = {(e["from"], e["to"]): {(m["degree"], m["n"]): m["matrix"]
                                        for m in e.get("mods", [])} for e in obj["deltas"]}
        quotients = {q["ideal"]: (_group_from(q["K0"]), _group_from(q["K1"]), q["pi0"],
                                  q["pi1"]) for q in obj.get("quotients", [])}
        unit = None if obj["unit"] is None else decode_element(obj["unit"])
        return make_descriptor(obj["name"], cu, ideals, deltas, obj["k0"], unit=unit,
                               flags=obj["flags"], support=obj["support"],
                               quotients=quotients, mods=mods)
    except (KeyError, ValueError, TypeError, CuntzLabError) as exc:
        if isinstance(exc, (SchemaError, ValidationError)):
            raise
        raise SchemaError(f"descriptor {obj.get('name')!r}: {exc}") from exc


def cu_document(name, S):
    return {"format_version": FORMAT_VERSION, "kind": "cu", "name": name, "cu": cu_to_json(S)}


def diagram_document(name, D=None, cone=None, builtin=None, N=None):
    doc = {"format_version": FORMAT_VERSION, "kind": "diagram", "name": name}
    if builtin:
        doc.update({"builtin": builtin, "N": N})
        return doc
    doc["stages"] = [cu_to_json(S) for S in D.prefix]
    doc["maps"] = [_table_json(m) for m in D.maps]
    doc["tail"] = "identity"
    if cone is not None:
        T, psi = cone
        doc["cone"] = {"target": cu_to_json(T),
                       "maps": [_table_json(psi(i)) for i in range(1, D.N + 1)]}
    return doc


def _table_json(m):
    return [[encode_element(x), encode_element(m(x))] for x in m.source.all_elements()]


def _table_map(S, T, rows):
    table = {decode_element(a): decode_element(b) for a, b in rows}
    missing = [x for x in S.all_elements() if x not in table]
    if missing:
        raise SchemaError(f"map table misses {missing[0]!r}")
    return CuMap.from_table(S, T, table)


def serialize(doc):
    """Canonical text of a JSON document."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_document(path):
    """Read and schema-check a document; returns (kind, object)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from exc
    if not text.strip():
        raise SchemaError(f"{path}: empty file")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict) or obj.get("kind") not in SCHEMAS:
        raise SchemaError(f"{path}: top-level 'kind' must be one of {sorted(SCHEMAS)}")
    _schema_check(obj, obj["kind"])
    if obj["kind"] == "descriptor":
        return "descriptor", descriptor_from_json(obj)
    if obj["kind"] == "cu":
        try:
            return "cu", (obj["name"], cu_from_json(obj["cu"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"{path}: cu: {exc}") from exc
    return "diagram", obj


def _schema_check(obj, kind):
    try:
        jsonschema.validate(obj, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None


def parse_descriptor(path, validate=True):
    """Descriptor from a file; with ``validate`` a ValidationError names the first failure."""
    kind, d = load_document(path)
    if kind != "descriptor":
        raise SchemaError(f"{path}: expected a descriptor document, got {kind!r}")
    if validate:
        report = validate_descriptor(d)
        if not report:
            raise ValidationError(f"{report.failed_at}: {_jsonable(report.witness)}",
                                  report.notes.get("failures", ()))
    return d


# -- reports ------------------------------------------------------------------------

def _jsonable(x):
    if x is INF:
        return "inf"
    if isinstance(x, Decision):
        return x.value
    if isinstance(x, Check):
        return {"status": x.status.value, "failed_at": x.failed_at,
                "witness": _jsonable(x.witness)}
    if isinstance(x, GroupElement):
        return list(x.coords)
    if isinstance(x, FgAbGroup):
        return x.describe()
    if isinstance(x, IntMatrix):
        return x.to_lists()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return repr(x)


def _status(*decisions):
    out = "pass"
    for d in decisions:
        if isinstance(d, Check):
            d = d.status
        if isinstance(d, bool):
            d = Decision.of(d)
        if d is Decision.FALSE:
            return "fail"
        if d is Decision.UNDECIDED:
            out = "undecided"
    return out


class Report:
    def __init__(self, command, status, witnesses=None, details=None):
        self.command = command
        self.status = status
        self.witnesses = witnesses or {}
        self.details = details or {}
        self.seconds = 0.0

    def as_dict(self):
        return {"command": self.command, "status": self.status,
                "witnesses": _jsonable(self.witnesses), "details": _jsonable(self.details),
                "timings": {"seconds": round(self.seconds, 4)}}

    def text(self):
        lines = [f"{self.command}: {self.status.upper()}"]
        for key, val in self.details.items():
            lines.append(f"  {key}: {json.dumps(_jsonable(val))}")
        for key, val in self.witnesses.items():
            lines.append(f"  witness {key}: {json.dumps(_jsonable(val))}")
        lines.append(f"  time: {self.seconds:.3f}s")
        return "\n".join(lines) + "\n"


# -- commands -------------------------------------------------------------------------

def _sample(budget):
    return max(4, min(10, int(round(budget ** 0.2))))


def cmd_validate(paths, opts):
    kind, d = load_document(paths[0])
    if kind != "descriptor":
        raise SchemaError("validate expects a descriptor document")
    report = validate_descriptor(d)
    failures = report.notes.get("failures", [])
    return Report("validate", _status(report),
                  {name: w for name, w in failures},
                  {"descriptor": d.name, "failures": [name for name, _ in failures]})


def _object_for(paths):
    kind, obj = load_document(paths[0])
    if kind == "descriptor":
        require = validate_descriptor(obj)
        if not require:
            raise ValidationError(f"{require.failed_at}: {_jsonable(require.witness)}")
        return obj.name, TotalCu(obj)
    if kind == "cu":
        return obj
    raise SchemaError("expected a descriptor or Cu document")


def cmd_axioms(paths, opts):
    name, S = _object_for(paths)
    axioms = check_axioms(S, budget=opts.budget, depth=opts.depth)
    wc = weak_cancellation(S, budget=opts.budget)
    pd = positively_directed(S, budget=opts.budget)
    witnesses = {k: c.witness for k, c in
                 (("axioms", axioms), ("weak_cancellation", wc), ("positively_directed", pd))
                 if c.status is not Decision.TRUE}
    details = {"object": name, "axioms": axioms, "weak_cancellation": wc,
               "positively_directed": pd}
    return Report("axioms", _status(axioms, wc, pd), witnesses, details)


def cmd_invariants(paths, opts):
    d = parse_descriptor(paths[0])
    n = _sample(opts.budget)
    details, witnesses, decisions = {"descriptor": d.name}, {}, []
    for mode in ("cu1", "total"):
        T = TotalCu(d, mode)
        a = alpha_map(T, budget=n)
        details[f"alpha_{mode}"] = {"injective": a["injective"], "surjective": a["surjective"],
                                    "exhaustive": a["exhaustive"]}
        if a["collision"]:
            witnesses[f"alpha_{mode}_collision"] = a["collision"]
        if a["missing"]:
            witnesses[f"alpha_{mode}_missing"] = a["missing"]
        decisions += [a["injective"], a["surjective"]]
    T = TotalCu(d)
    if d.unit is not None:
        try:
            rec = recover_total_k(T, budget=n)
            star = recover_kstar(d, budget=n)
            details["gr_compacts"] = rec["group"]
            details["recover_total_k"] = rec["matches"]
            details["recover_kstar"] = star["matches"]
            decisions += [rec["matches"], star["matches"]]
        except NotInCuU as exc:
            witnesses["recover"] = {"condition": exc.condition, "witness": exc.witness}
            decisions.append(False)
    if d.flags.get("k_pure") and d.flags.get("real_rank_zero"):
        order = check_alpha_order_iso(T, budget=n)
        details["alpha_order_iso"] = order
        decisions.append(order)
    if len(d.quotients) + 2 >= len(d):
        try:
            pure = check_k_pure_exactness(d)
            details["k_pure_exactness"] = pure
            if not pure:
                witnesses["k_pure_exactness"] = [pure.failed_at, pure.witness]
            if d.flags.get("k_pure"):
                decisions.append(pure)
        except CuntzLabError as exc:
            details["k_pure_exactness"] = str(exc)
    return Report("invariants", _status(*decisions), witnesses, details)


def cmd_limit(paths, opts):
    kind, doc = load_document(paths[0])
    if kind != "diagram":
        raise SchemaError("limit expects a diagram document")
    if doc.get("builtin") == "coordinate":
        return _coordinate_report(doc.get("N", 6), opts)
    try:
        stages = [cu_from_json(s) for s in doc["stages"]]
        maps = [_table_map(a, b, rows) for a, b, rows in zip(stages, stages[1:], doc["maps"])]
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"diagram: {exc}") from exc
    if len(maps) != len(stages) - 1:
        raise SchemaError("diagram: need one map per consecutive pair of stages")
    D = Diagram(stages, maps, depth=opts.depth)
    L = limit_object(D, opts.depth)
    details = {"stages": len(stages), "classes": len(L.classes())}
    if "cone" not in doc:
        return Report("limit", "pass", {}, details)
    T = cu_from_json(doc["cone"]["target"])
    tables = [_table_map(S, T, rows) for S, rows in zip(stages, doc["cone"]["maps"])]
    psi = lambda i: tables[min(i, len(tables)) - 1]
    omega = universal_map(D, T, psi, opts.depth)
    fac = check_factorisation(D, omega, psi)
    uni = check_uniqueness(D, T, psi, omega)
    details.update({"factorisation": fac, "uniqueness": uni,
                    "omega": [omega(c) for c in L.classes()]})
    witnesses = {k: c.witness for k, c in (("factorisation", fac), ("uniqueness", uni))
                 if not c}
    return Report("limit", _status(fac, uni), witnesses, details)


def _coordinate_report(N, opts):
    D = coordinate_diagram(N, depth=opts.depth)
    rows, decisions, witnesses = [], [], {}
    for j in range(2, N + 1):
        s = frozen_target(j)
        unreachable = unreachable_from_earlier_stages(D, j, s)
        ev = is_eventually_increasing(EvSeq(D, j, [s]))
        reaching = increasing_sequences_reaching(D, j, s)
        rows.append({"j": j, "unreachable": unreachable, "constant_push": ev,
                     "increasing_sequences_reaching": len(reaching)})
        decisions += [unreachable, ev, not reaching]
        if reaching:
            witnesses[f"reaching_{j}"] = reaching[0]
    return Report("limit", _status(*decisions), witnesses, {"coordinate": rows})


def cmd_compare(paths, opts):
    if len(paths) != 2:
        raise SchemaError("compare expects two documents")
    objs = [_object_for([p]) for p in paths]
    result = total_cu_isomorphic(objs[0][1], objs[1][1], bound=opts.budget)
    status = {"found": "pass", "not_found": "fail", "undecided": "undecided"}[result["status"]]
    details = {"left": objs[0][0], "right": objs[1][0], "result": result["status"]}
    if "iso" in result and isinstance(result["iso"], dict) and "f0" in result["iso"]:
        details["lambda_top"] = result["iso"]
    if "reason" in result:
        details["reason"] = result["reason"]
    return Report("compare", status, {}, details)


def cmd_recover(paths, opts):
    kind, obj = load_document(paths[0])
    n = _sample(opts.budget)
    if kind == "cu":
        name, S = obj
        rep = gr_report_for(S, budget=n)
        witnesses = {} if rep["trivial"] else {"symmetric_part": rep["witness"]}
        return Report("recover", "pass" if rep["trivial"] else "fail", witnesses,
                      {"object": name, **{k: v for k, v in rep.items() if k != "witness"}})
    if kind != "descriptor":
        raise SchemaError("recover expects a descriptor or Cu document")
    d = obj
    try:
        rec = recover_total_k(TotalCu(d), budget=n)
        star = recover_kstar(d, budget=n)
    except NotInCuU as exc:
        return Report("recover", "fail", {exc.condition: exc.witness}, {"descriptor": d.name})
    details = {"descriptor": d.name, "group": rec["group"], "unit": rec["unit"],
               "iso": rec["iso"].matrix, "matches": rec["matches"],
               "kstar_matches": star["matches"]}
    return Report("recover", _status(rec["matches"], star["matches"]), {}, details)


def builtin_documents():
    """Built-in examples as (file name, document)."""
    docs = [("elliott_thomsen_E.json", descriptor_to_json(fixtures.elliott_thomsen_E()))]
    for k in range(1, 6):
        docs.append((f"e_{k}.json", cu_document(f"e_{k}", Ek(k))))
    docs.append(("z_infty.json", cu_document("z_infty", fixtures.z_infty())))
    docs.append(("coordinate_diagram.json",
                 diagram_document("coordinate_diagram", builtin="coordinate", N=6)))
    docs.append(("kpure_rr0_sample.json", descriptor_to_json(fixtures.block_descriptor(2))))
    docs.append(("circle_z2.json", descriptor_to_json(fixtures.circle_descriptor(2))))
    docs.append(("circle_z2_alt.json",
                 descriptor_to_json(fixtures.circle_descriptor(2, alt=True))))
    return docs


def cmd_fixtures(paths, opts):
    out = Path(opts.out or (paths[0] if paths else "fixtures"))
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, doc in builtin_documents():
        (out / name).write_text(serialize(doc))
        written.append(name)
    return Report("fixtures", "pass", {}, {"directory": str(out), "files": written})


COMMANDS = {
    "validate": cmd_validate,
    "axioms": cmd_axioms,
    "invariants": cmd_invariants,
    "limit": cmd_limit,
    "compare": cmd_compare,
    "recover": cmd_recover,
    "fixtures": cmd_fixtures,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="cuntz-lab",
                                     description="Cuntz semigroup and total K-theory checks.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("paths", nargs="*")
    parser.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    parser.add_argument("--json", action="store_true", help="print the JSON report")
    parser.add_argument("--out", default=None,
                        help="report file (fixtures: output directory)")
    return parser


def run(command, paths, opts):
    start = time.perf_counter()
    report = COMMANDS[command](paths, opts)
    report.seconds = time.perf_counter() - start
    return report


def main(argv=None):
    opts = build_parser().parse_args(argv)
    if opts.command != "fixtures" and not opts.paths:
        print(f"{opts.command}: a document path is required", file=sys.stderr)
        return EXIT["error"]
    try:
        report = run(opts.command, opts.paths, opts)
    except (SchemaError, ValidationError) as exc:
        print(f"{opts.command}: input error: {exc}", file=sys.stderr)
        return EXIT["error"]
    rendered = (json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n"
                if opts.json else report.text())
    if opts.out and opts.command != "fixtures":
        Path(opts.out).write_text(rendered)
    else:
        sys.stdout.write(rendered)
    return EXIT[report.status]


if __name__ == "__main__":
    sys.exit(main())
