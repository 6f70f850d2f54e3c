"""
Text schemas for elements, modules, groups, complexes and formula records.

Every file is one JSON object whose "schema" field names the format version;
a missing or unknown tag is rejected. An element may also be written as its
bare coefficient list, e.g. [3, 1] for 3 + T.
"""
import json
import logging
from typing import Any

from src.coeff import PrecisionContext
from src.complex import PerfectComplex, validate_complex
from src.config import SCHEMA_ELEMENT, SCHEMA_MODULE, SCHEMA_GROUP, SCHEMA_COMPLEX, SCHEMA_FORMULA
from src.errors import SchemaError
from src.group_ring import PGroup, GroupRingMatrix, validate_group, cyclic_group, product_group, trivial_group
from src.iwasawa_module import LambdaModule
from src.iwasawa_ring import IwasawaElement
from src.kida_formulas import PrimeDatum, FORMULA_FIELDS, resolve_formula
from src.linalg import LambdaMatrix

logger = logging.getLogger(__name__)

# camelCase schema field -> keyword used by the evaluators
FORMULA_KEYS = {
    "degree": "degree",
    "delta": "delta",
    "lambdaBase": "lambda_base",
    "lambdaSelBase": "lambda_sel_base",
    "lambdaH0ABase": "lambda_h0a_base",
    "deltaBase": "delta_base",
    "lambdaH0ATop": "lambda_h0a_top",
    "deltaTop": "delta_top",
    "reductionType": "reduction_type",
    "hasPTorsionPoint": "has_p_torsion_point",
    "xs": "xs",
    "cm": "cm",
    "variant": "variant",
    "epsilon": "epsilon",
    "primes": "primes",
}
_BOOL_KEYS = {"xs", "cm", "hasPTorsionPoint"}
_STR_KEYS = {"variant", "epsilon", "reductionType"}
_PRIME_KEYS = {"e": "e", "f": "f", "count": "count", "label": "label",
               "localLambdaBase": "local_lambda_base", "localLambdaTop": "local_lambda_top"}


def load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


def dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _document(text_or_obj: str | dict, tag: str) -> dict:
    obj = load_json(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if not isinstance(obj, dict):
        raise SchemaError(f"expected a JSON object for {tag}, got {type(obj).__name__}")
    if "schema" not in obj:
        raise SchemaError(f"missing 'schema' tag, expected '{tag}'", expected=tag)
    found = obj["schema"]
    if found != tag:
        raise SchemaError(f"unsupported schema '{found}', expected '{tag}'", expected=tag, found=found)
    return obj


def _field(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'", field=key)
    return obj[key]


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected an integer, got {value!r}")
    return value


def _int_list(value: Any, where: str) -> list[int]:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a list of integers, got {value!r}")
    return [_int(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a list, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Elements and Lambda-modules
# ---------------------------------------------------------------------------

def parse_element(text: str | list | dict, ctx: PrecisionContext) -> IwasawaElement:
    """A bare coefficient list [3, 1] or a tagged {"coefficients": [...]} object."""
    obj = load_json(text) if isinstance(text, str) else text
    if isinstance(obj, list):
        return IwasawaElement.polynomial(ctx, _int_list(obj, "element"))
    obj = _document(obj, SCHEMA_ELEMENT)
    coeffs = _int_list(_field(obj, "coefficients", "element"), "coefficients")
    return IwasawaElement.polynomial(ctx, coeffs)


def serialize_element(f: IwasawaElement) -> dict[str, Any]:
    return {"schema": SCHEMA_ELEMENT, "coefficients": f.lift()}


def parse_module(text: str | dict, ctx: PrecisionContext) -> LambdaModule:
    """{"generators": g, "relations": g rows of coefficient lists, "columns": optional}."""
    obj = _document(text, SCHEMA_MODULE)
    g = _int(_field(obj, "generators", "module"), "generators")
    rows = _list(_field(obj, "relations", "module"), "relations")
    if len(rows) != g:
        raise SchemaError(f"module: {len(rows)} relation rows for {g} generators")
    widths = {len(_list(r, f"relations[{i}]")) for i, r in enumerate(rows)}
    cols = _int(obj["columns"], "columns") if "columns" in obj else (widths.pop() if len(widths) == 1 else 0)
    if widths and widths != {cols}:
        raise SchemaError(f"module: relation rows have lengths {sorted(widths)}, expected {cols}")
    lists = [[_int_list(e, f"relations[{i}][{j}]") for j, e in enumerate(r)] for i, r in enumerate(rows)]
    entries = [[IwasawaElement.polynomial(ctx, c) for c in r] for r in lists]
    try:
        return LambdaModule(g, LambdaMatrix.from_rows(ctx, entries, cols))
    except ValueError as exc:
        raise SchemaError(f"module: {exc}") from exc


def serialize_module(M: LambdaModule) -> dict[str, Any]:
    return {"schema": SCHEMA_MODULE, "generators": M.generators, "columns": M.relations.cols,
            "relations": M.relations.to_lists()}


# ---------------------------------------------------------------------------
# Groups and complexes
# ---------------------------------------------------------------------------

def parse_group(text: str | dict, p: int) -> PGroup:
    """Either a Cayley "table" or "cyclic": [n1, n2, ...] for a product of cyclic groups."""
    return _group(_document(text, SCHEMA_GROUP), p)


def _group(obj: dict, p: int) -> PGroup:
    if "table" in obj:
        table = [_int_list(r, f"table[{i}]") for i, r in enumerate(_list(obj["table"], "table"))]
        G = validate_group(table, p)
    elif "cyclic" in obj:
        orders = _int_list(obj["cyclic"], "cyclic")
        G = trivial_group(p)
        for n in orders:
            G = product_group(G, cyclic_group(n, p)) if G.order > 1 else cyclic_group(n, p)
    else:
        raise SchemaError("group: expected a 'table' or 'cyclic' field")
    if "order" in obj and _int(obj["order"], "order") != G.order:
        raise SchemaError(f"group: declared order {obj['order']} but the group has order {G.order}",
                          declared=obj["order"], actual=G.order)
    return G


def serialize_group(G: PGroup) -> dict[str, Any]:
    return {"schema": SCHEMA_GROUP, **G.to_dict()}


def parse_complex(text: str | dict, ctx: PrecisionContext) -> PerfectComplex:
    obj = _document(text, SCHEMA_COMPLEX)
    group_obj = _field(obj, "group", "complex")
    if not isinstance(group_obj, dict):
        raise SchemaError("complex: 'group' must be an object")
    G = _group(group_obj, ctx.p)
    a = _int(obj.get("minDegree", 0), "minDegree")
    ranks = _int_list(_field(obj, "ranks", "complex"), "ranks")
    raw = _list(_field(obj, "boundaries", "complex"), "boundaries")
    if len(raw) != max(len(ranks) - 1, 0):
        raise SchemaError(f"complex: {len(ranks)} terms need {len(ranks) - 1} boundaries, got {len(raw)}")
    boundaries = []
    for k, d in enumerate(raw):
        rows = _list(d, f"boundaries[{k}]")
        parsed = [[[_int_list(c, f"boundaries[{k}][{i}][{j}][{h}]") for h, c in enumerate(_list(e, "entry"))]
                   for j, e in enumerate(_list(r, "row"))] for i, r in enumerate(rows)]
        try:
            boundaries.append(GroupRingMatrix.from_lists(ctx, G, parsed, ranks[k]))
        except ValueError as exc:
            raise SchemaError(f"boundaries[{k}]: {exc}") from exc
    return validate_complex(a, ranks, boundaries, G, ctx)


def serialize_complex(C: PerfectComplex) -> dict[str, Any]:
    return {"schema": SCHEMA_COMPLEX, **C.to_dict()}


# ---------------------------------------------------------------------------
# Formula records
# ---------------------------------------------------------------------------

def _prime(obj: Any, where: str) -> PrimeDatum:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(obj) - set(_PRIME_KEYS)
    if unknown:
        raise SchemaError(f"{where}: unknown fields {sorted(unknown)}")
    kwargs = {_PRIME_KEYS[k]: (v if k == "label" else _int(v, f"{where}.{k}")) for k, v in obj.items()}
    try:
        return PrimeDatum(**kwargs)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def parse_formula(text: str | dict) -> tuple[str, dict[str, Any]]:
    """(canonical tag, evaluator keywords) of a formula record."""
    obj = _document(text, SCHEMA_FORMULA)
    tag = resolve_formula(_field(obj, "formula", "formula record"))
    for key in FORMULA_FIELDS[tag]:
        _field(obj, key, tag)
    unknown = set(obj) - set(FORMULA_KEYS) - {"schema", "formula"}
    if unknown:
        raise SchemaError(f"{tag}: unknown fields {sorted(unknown)}")
    data: dict[str, Any] = {}
    for key, value in obj.items():
        if key in ("schema", "formula"):
            continue
        if key == "primes":
            value = tuple(_prime(w, f"primes[{i}]") for i, w in enumerate(_list(value, "primes")))
        elif key in _BOOL_KEYS:
            if not isinstance(value, bool):
                raise SchemaError(f"{key}: expected true or false")
        elif key in _STR_KEYS:
            if not isinstance(value, str):
                raise SchemaError(f"{key}: expected a string")
        else:
            value = _int(value, key)
        data[FORMULA_KEYS[key]] = value
    return tag, data


def serialize_formula(tag: str, data: dict[str, Any]) -> dict[str, Any]:
    names = {v: k for k, v in FORMULA_KEYS.items()}
    out: dict[str, Any] = {"schema": SCHEMA_FORMULA, "formula": tag}
    for key, value in data.items():
        out[names[key]] = [w.to_dict() for w in value] if key == "primes" else value
    return out
