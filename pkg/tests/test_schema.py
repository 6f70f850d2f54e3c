import unittest
import json
import os
import sys
from pathlib import Path

# Add project root to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.coeff import PrecisionContext
from src.config import SCHEMA_ELEMENT, SCHEMA_MODULE, SCHEMA_GROUP, SCHEMA_COMPLEX, SCHEMA_FORMULA
from src.complex import lambda_of_complex
from src.errors import SchemaError, UnknownFormula, NotAComplex
from src.group_ring import cyclic_group, product_group
from src.kida_formulas import PrimeDatum
from src.schema import (
    load_json, dump, parse_element, serialize_element, parse_module, serialize_module, parse_group,
    serialize_group, parse_complex, serialize_complex, parse_formula, serialize_formula,
)

FIXTURES = Path(__file__).parent / "fixtures"
CTX = PrecisionContext(3, 8, 32)


def module_doc(**fields):
    return {"schema": SCHEMA_MODULE, **fields}


def formula_doc(**fields):
    return {"schema": SCHEMA_FORMULA, **fields}


class TestElementsAndModules(unittest.TestCase):
    def test_element(self):
        f = parse_element('{"schema": "iwalab-element-1", "coefficients": [3, 1, 0]}', CTX)
        self.assertEqual(f.lift(), [3, 1])
        self.assertEqual(serialize_element(f), {"schema": "iwalab-element-1", "coefficients": [3, 1]})

    def test_bare_coefficient_list(self):
        self.assertEqual(parse_element("[3, 1]", CTX).lift(), [3, 1])
        self.assertEqual(parse_element([0, 3, 3, 1], CTX).lift(), [0, 3, 3, 1])
        with self.assertRaises(SchemaError):
            parse_element("[1, 2.5]", CTX)

    def test_negative_coefficients_round_trip(self):
        f = parse_element([-1, 0, -3], CTX)
        self.assertEqual(parse_element(serialize_element(f), CTX).lift(), [-1, 0, -3])

    def test_module_fixture(self):
        M = parse_module((FIXTURES / "t_plus_3_module.json").read_text(encoding="utf-8"), CTX)
        self.assertEqual((M.generators, M.relations.cols), (1, 1))
        self.assertEqual(serialize_module(M)["relations"], [[[3, 1]]])

    def test_module_shapes(self):
        M = parse_module(module_doc(generators=2, relations=[[[0, 1], [3]], [[], [0, 1]]]), CTX)
        self.assertEqual((M.relations.rows, M.relations.cols), (2, 2))
        free = parse_module(module_doc(generators=1, relations=[[]]), CTX)
        self.assertEqual(free.relations.cols, 0)
        with self.assertRaises(SchemaError):
            parse_module(module_doc(generators=2, relations=[[[1]]]), CTX)
        with self.assertRaises(SchemaError):
            parse_module(module_doc(generators=2, relations=[[[1]], [[1], [2]]]), CTX)

    def test_bad_types(self):
        tag = {"schema": SCHEMA_ELEMENT}
        with self.assertRaises(SchemaError):
            parse_element({**tag, "coefficients": [1, "2"]}, CTX)
        with self.assertRaises(SchemaError):
            parse_element({**tag, "coefficients": [True]}, CTX)
        with self.assertRaises(SchemaError):
            parse_element({**tag, "coeffs": [1]}, CTX)
        with self.assertRaises(SchemaError):
            parse_element('"3 + T"', CTX)


class TestDocuments(unittest.TestCase):
    def test_malformed_json_position(self):
        with self.assertRaises(SchemaError) as cm:
            load_json('{\n  "coefficients": [1, 2,\n}')
        self.assertEqual(cm.exception.details["line"], 3)
        self.assertIn("line 3", str(cm.exception))

    def test_unknown_schema_tag(self):
        with self.assertRaises(SchemaError) as cm:
            parse_element({"schema": "iwalab-element-2", "coefficients": [1]}, CTX)
        self.assertEqual(cm.exception.details["found"], "iwalab-element-2")

    def test_missing_schema_tag(self):
        for parse, doc in [
            (lambda d: parse_element(d, CTX), {"coefficients": [3, 1]}),
            (lambda d: parse_module(d, CTX), {"generators": 1, "relations": [[[3, 1]]]}),
            (lambda d: parse_group(d, 3), {"cyclic": [3]}),
            (parse_formula, {"formula": "kida-classical", "degree": 3, "delta": 1, "lambdaBase": 2}),
        ]:
            with self.subTest(doc=doc):
                with self.assertRaises(SchemaError) as cm:
                    parse(doc)
                self.assertIn("missing 'schema'", str(cm.exception))

    def test_dump_is_sorted(self):
        text = dump({"b": 1, "a": [1, 2]})
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertTrue(text.endswith("\n"))


class TestGroupsAndComplexes(unittest.TestCase):
    def test_group(self):
        G = parse_group({"schema": SCHEMA_GROUP, "cyclic": [3, 3]}, 3)
        self.assertEqual(G, product_group(cyclic_group(3, 3), cyclic_group(3, 3)))
        self.assertEqual(parse_group(serialize_group(G), 3), G)
        with self.assertRaises(SchemaError):
            parse_group({"schema": SCHEMA_GROUP, "order": 3}, 3)

    def test_declared_order_must_match(self):
        with self.assertRaises(SchemaError):
            parse_group({"schema": SCHEMA_GROUP, "order": 9, "cyclic": [3]}, 3)
        base = json.loads((FIXTURES / "anchor_complex.json").read_text(encoding="utf-8"))
        with self.assertRaises(SchemaError) as cm:
            parse_complex({**base, "group": {"order": 9, "cyclic": [3]}}, CTX)
        self.assertEqual(cm.exception.details["actual"], 3)
        C = parse_complex({**base, "group": {"order": 3, "cyclic": [3]}}, CTX)
        self.assertEqual(C.group.order, 3)

    def test_anchor_fixture(self):
        C = parse_complex((FIXTURES / "anchor_complex.json").read_text(encoding="utf-8"), CTX)
        self.assertEqual((C.min_degree, C.ranks, C.group.order), (0, (1, 1), 3))
        self.assertEqual(lambda_of_complex(C), -3)
        again = parse_complex(json.loads(json.dumps(serialize_complex(C))), CTX)
        self.assertEqual(again.to_dict(), C.to_dict())

    def test_complex_errors(self):
        base = {"schema": SCHEMA_COMPLEX, "group": {"cyclic": [1]}, "minDegree": 0, "ranks": [1, 1, 1]}
        with self.assertRaises(SchemaError):
            parse_complex({**base, "boundaries": [[[[[0, 1]]]]]}, CTX)
        with self.assertRaises(NotAComplex):
            parse_complex({**base, "boundaries": [[[[[0, 1]]]], [[[[1]]]]]}, CTX)


class TestFormulas(unittest.TestCase):
    def test_parse(self):
        text = ('{"schema": "iwalab-formula-1", "formula": "kida-cm-unramified", "degree": 3, "delta": 1,'
                ' "lambdaBase": 2, "primes": [{"e": 3, "count": 2}]}')
        tag, data = parse_formula(text)
        self.assertEqual(tag, "kida-classical")
        self.assertEqual(data, {"degree": 3, "delta": 1, "lambda_base": 2, "primes": (PrimeDatum(e=3, count=2),)})
        self.assertEqual(parse_formula(serialize_formula(tag, data)), (tag, data))

    def test_missing_and_unknown_fields(self):
        with self.assertRaises(SchemaError):
            parse_formula(formula_doc(formula="cm-split", degree=3, lambdaBase=1))
        with self.assertRaises(SchemaError):
            parse_formula(formula_doc(formula="totally-real", degree=3, lambdaBase=1, conductor=11))
        with self.assertRaises(SchemaError):
            parse_formula(formula_doc(formula="totally-real", degree=3, lambdaBase=1, primes=[{"g": 1}]))
        with self.assertRaises(SchemaError):
            parse_formula(formula_doc(formula="lie-rank", lambdaBase=1, cm="yes"))

    def test_unknown_formula(self):
        with self.assertRaises(UnknownFormula):
            parse_formula(formula_doc(formula="analytic-class-number"))

    def test_elliptic_labels(self):
        tag, data = parse_formula(formula_doc(formula="elliptic-ordinary", degree=3, lambdaBase=2,
                                              primes=[{"e": 3, "label": "good"}]))
        self.assertEqual(data["primes"][0].label, "good")
        with self.assertRaises(SchemaError):
            parse_formula(formula_doc(formula="elliptic-ordinary", degree=3, lambdaBase=2,
                                      primes=[{"e": 3, "label": "additive"}]))


if __name__ == '__main__':
    unittest.main()
