import unittest
import os
import random
import sys

# Add project root to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.errors import MissingLocalData, UnknownFormula
from src.kida_formulas import (
    PrimeDatum, GenericOrdInput, LieRankInput, eval_main_ord, eval_totally_real, eval_cm_split,
    eval_kida_classical, eval_sigma_ramified, local_rank_hm1, elliptic_local_pair, eval_elliptic_ordinary,
    eval_elliptic_supersingular, eval_lie_rank, translate_elliptic, compose_tower, selmer_rank_balance,
    evaluate, resolve_formula, formula_tags,
)


class TestGoldenValues(unittest.TestCase):
    def test_kida_classical(self):
        self.assertEqual(eval_kida_classical(3, 1, 2, [PrimeDatum(e=3, count=2)]), 8)

    def test_cm_split(self):
        self.assertEqual(eval_cm_split(3, 1, 2, [PrimeDatum(e=3, count=2)]), 8)
        self.assertEqual(eval_cm_split(9, 0, 0, [PrimeDatum(e=9)]), 8)
        # inertia counts for the split formula but not for the classical one
        self.assertEqual(eval_cm_split(9, 0, 0, [PrimeDatum(e=3, f=3)]), 8)
        self.assertEqual(eval_kida_classical(9, 0, 0, [PrimeDatum(e=3, f=3)]), 2)

    def test_totally_real(self):
        self.assertEqual(eval_totally_real(3, 1), 1)
        self.assertEqual(eval_totally_real(3, 1, [PrimeDatum(e=3, count=2)]), 5)
        self.assertEqual(eval_totally_real(3, 1, [PrimeDatum(e=3, count=2)], xs=True), 1)

    def test_sigma_ramified(self):
        self.assertEqual(eval_sigma_ramified(3, 1, [PrimeDatum(e=3, count=2)]), 5)

    def test_main_ord(self):
        w = PrimeDatum(e=3, local_lambda_base=1, local_lambda_top=1)
        for lam in range(4):
            self.assertEqual(eval_main_ord(GenericOrdInput(3, lam, primes=(w,))), 3 * lam + 2)

    def test_local_ranks(self):
        self.assertEqual(local_rank_hm1("good", True), 2)
        self.assertEqual(local_rank_hm1("good", False), 0)
        self.assertEqual(local_rank_hm1("split", False), 1)
        self.assertEqual(local_rank_hm1("other", True), 0)
        self.assertEqual(elliptic_local_pair("pot_good"), (0, 2))
        self.assertEqual(elliptic_local_pair("pot_split"), (0, 1))

    def test_elliptic(self):
        self.assertEqual(eval_elliptic_ordinary(3, 2, [PrimeDatum(e=3, label="good")]), 10)
        self.assertEqual(eval_elliptic_ordinary(3, 2, [PrimeDatum(e=3, label="pot_good")]), 4)
        self.assertEqual(eval_elliptic_supersingular(3, 2, [PrimeDatum(e=3, label="good")], epsilon="+-"), 10)

    def test_lie_rank(self):
        self.assertEqual(eval_lie_rank(LieRankInput(4, delta=1, primes=(PrimeDatum(count=2),)), cm=True), 5)
        self.assertEqual(eval_lie_rank(LieRankInput(4)), 4)
        w = PrimeDatum(count=2, local_lambda_base=1)
        self.assertEqual(eval_lie_rank(LieRankInput(4, lambda_h0a_base=1, primes=(w,)), variant="unramified"), 5)


def random_fiber(rng, degree):
    """Primes above one prime, with sum count*e == degree."""
    fiber, left = [], degree
    while left:
        e = rng.choice([q for q in (1, 3, 9) if q <= left])
        count = rng.randint(1, left // e)
        fiber.append(PrimeDatum(e=e, count=count))
        left -= e * count
    return fiber


class TestIdentities(unittest.TestCase):
    def test_degree_one(self):
        for lam in range(5):
            self.assertEqual(eval_totally_real(1, lam), lam)
            self.assertEqual(eval_cm_split(1, 1, lam), lam)
            self.assertEqual(eval_kida_classical(1, 0, lam), lam)
            self.assertEqual(eval_sigma_ramified(1, lam), lam)
            self.assertEqual(eval_elliptic_ordinary(1, lam), lam)
            inp = GenericOrdInput(1, lam + 2, lambda_h0a_base=1, delta_base=1, lambda_h0a_top=1, delta_top=1)
            self.assertEqual(eval_main_ord(inp), lam + 2)

    def test_tower_transitivity(self):
        lower = [PrimeDatum(e=3, count=2), PrimeDatum(count=1)]
        fibers = [[PrimeDatum(e=3)], [PrimeDatum(count=3)]]
        composed, upper = compose_tower(lower, fibers, 3)
        lam_mid = eval_kida_classical(3, 1, 2, lower)
        self.assertEqual(lam_mid, 8)
        self.assertEqual(eval_kida_classical(3, 1, lam_mid, upper), eval_kida_classical(9, 1, 2, composed))
        self.assertEqual(eval_kida_classical(9, 1, 2, composed), 26)
        self.assertEqual(eval_cm_split(3, 1, eval_cm_split(3, 1, 2, lower), upper),
                         eval_cm_split(9, 1, 2, composed))
        self.assertEqual(eval_totally_real(3, eval_totally_real(3, 2, lower), upper),
                         eval_totally_real(9, 2, composed))

    def test_tower_with_inertia(self):
        lower = [PrimeDatum(f=3)]
        fibers = [[PrimeDatum(e=3)]]
        composed, upper = compose_tower(lower, fibers, 3)
        self.assertEqual(composed, (PrimeDatum(e=3, f=3),))
        self.assertEqual(eval_cm_split(3, 0, eval_cm_split(3, 0, 1, lower), upper),
                         eval_cm_split(9, 0, 1, composed))

    def test_fiber_must_exhaust_degree(self):
        with self.assertRaises(ValueError):
            compose_tower([PrimeDatum()], [[PrimeDatum(e=3, count=2)]], 3)
        with self.assertRaises(ValueError):
            compose_tower([PrimeDatum()], [], 3)

    def test_generic_subsumes_elliptic(self):
        primes = [PrimeDatum(e=3, label="good"), PrimeDatum(e=9, count=2, label="split"),
                  PrimeDatum(label="pot_good"), PrimeDatum(count=3, label="pot_split"), PrimeDatum(label="other")]
        for lam in range(3):
            for k in range(len(primes) + 1):
                with self.subTest(lam=lam, primes=k):
                    self.assertEqual(eval_main_ord(translate_elliptic(9, lam, primes[:k])),
                                     eval_elliptic_ordinary(9, lam, primes[:k]))

    def test_random_towers(self):
        rng = random.Random(0)
        for trial in range(200):
            d1, d2 = rng.choice((3, 9)), rng.choice((3, 9))
            lower = [PrimeDatum(e=rng.choice((1, 3, 9)), count=rng.randint(1, 3)) for _ in range(rng.randint(0, 3))]
            fibers = [random_fiber(rng, d2) for _ in lower]
            composed, upper = compose_tower(lower, fibers, d2)
            lam, delta = rng.randint(1, 6), rng.randint(0, 1)
            with self.subTest(trial=trial):
                self.assertEqual(eval_kida_classical(d2, delta, eval_kida_classical(d1, delta, lam, lower), upper),
                                 eval_kida_classical(d1 * d2, delta, lam, composed))
                self.assertEqual(eval_cm_split(d2, delta, eval_cm_split(d1, delta, lam, lower), upper),
                                 eval_cm_split(d1 * d2, delta, lam, composed))
                self.assertEqual(eval_sigma_ramified(d2, eval_sigma_ramified(d1, lam, lower), upper),
                                 eval_sigma_ramified(d1 * d2, lam, composed))

    def test_random_generic_subsumes_elliptic(self):
        rng = random.Random(1)
        labels = ("good", "split", "pot_good", "pot_split", "other")
        for trial in range(200):
            degree = rng.choice((1, 3, 9, 27))
            lam = rng.randint(0, 5)
            primes = [PrimeDatum(e=rng.choice((1, 3, 9)), count=rng.randint(1, 3), label=rng.choice(labels))
                      for _ in range(rng.randint(0, 4))]
            with self.subTest(trial=trial):
                self.assertEqual(eval_main_ord(translate_elliptic(degree, lam, primes)),
                                 eval_elliptic_ordinary(degree, lam, primes))

    def test_rank_balance(self):
        self.assertTrue(selmer_rank_balance([(2, 1)], [1, 1], []).balanced)
        balance = selmer_rank_balance([(2, 1)], [1], [])
        self.assertFalse(balance.balanced)
        self.assertEqual(balance.to_dict(), {"pAdic": 2, "archimedean": 1, "balanced": False})


class TestValidation(unittest.TestCase):
    def test_bad_inputs(self):
        with self.assertRaises(ValueError):
            eval_cm_split(6, 0, 1)
        with self.assertRaises(ValueError):
            PrimeDatum(e=0)
        with self.assertRaises(ValueError):
            PrimeDatum(label="additive")
        with self.assertRaises(ValueError):
            LieRankInput(3, delta=2)
        with self.assertRaises(ValueError):
            eval_lie_rank(LieRankInput(3), variant="abelian")

    def test_missing_local_data(self):
        with self.assertRaises(MissingLocalData):
            eval_main_ord(GenericOrdInput(3, 1, primes=(PrimeDatum(e=3),)))
        with self.assertRaises(MissingLocalData):
            eval_elliptic_ordinary(3, 1, [PrimeDatum(e=3)])


class TestDispatch(unittest.TestCase):
    def test_evaluate(self):
        result = evaluate("kida-classical", {"degree": 3, "delta": 1, "lambda_base": 2,
                                             "primes": (PrimeDatum(e=3, count=2),)})
        self.assertEqual(result.to_dict(), {"lambdaTop": 8, "warnings": []})

    def test_alias(self):
        self.assertEqual(resolve_formula("kida-cm-unramified"), "kida-classical")
        result = evaluate("kida-cm-unramified", {"degree": 1, "delta": 0, "lambda_base": 4})
        self.assertEqual(result.lambda_top, 4)

    def test_negative_result_warns(self):
        data = {"degree": 3, "lambda_base": 0, "primes": (PrimeDatum(label="pot_good"),)}
        with self.assertLogs("src.kida_formulas", level="WARNING"):
            result = evaluate("elliptic-ordinary", data)
        self.assertEqual(result.lambda_top, -2)
        self.assertEqual(len(result.warnings), 1)

    def test_unknown_formula(self):
        with self.assertRaises(UnknownFormula) as cm:
            resolve_formula("riemann-hurwitz")
        for tag in formula_tags():
            self.assertIn(tag, str(cm.exception))


if __name__ == '__main__':
    unittest.main()
