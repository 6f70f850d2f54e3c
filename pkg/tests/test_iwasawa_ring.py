import unittest
import os
import random
import sys

# Add project root to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.coeff import PrecisionContext
from src.errors import NotDistinguished, PrecisionExhausted, TDepthExhausted
from src.iwasawa_ring import (
    IwasawaElement, weierstrass_prepare, weierstrass_divide, is_distinguished, omega, invariants_of_element,
)


def random_polynomial(rng: random.Random, ctx: PrecisionContext) -> IwasawaElement:
    p = ctx.p
    while True:
        coeffs = [rng.randint(-p * p, p * p) for _ in range(rng.randint(1, 5))]
        if any(c % p for c in coeffs):
            return IwasawaElement.polynomial(ctx, coeffs) * (p ** rng.randint(0, 2))


class TestElements(unittest.TestCase):
    def setUp(self):
        self.ctx = PrecisionContext(3, 8, 32)

    def test_polynomial_is_exact(self):
        f = IwasawaElement.polynomial(self.ctx, [3, 1, 0, 0])
        self.assertTrue(f.is_exact)
        self.assertEqual(f.degree(), 1)
        self.assertEqual(f.lift(), [3, 1])
        self.assertEqual(IwasawaElement.polynomial(self.ctx, [-1]).lift(), [-1])

    def test_long_polynomial_is_truncated(self):
        f = IwasawaElement.polynomial(self.ctx, [1] * 40)
        self.assertFalse(f.is_exact)

    def test_unit_inverse(self):
        u = IwasawaElement.polynomial(self.ctx, [1, 1])
        self.assertEqual(u * u.inverse(), IwasawaElement.one(self.ctx))

    def test_shift(self):
        f = IwasawaElement.polynomial(self.ctx, [2, 1]).shift(2)
        self.assertEqual(f.lift(), [0, 0, 2, 1])


class TestWeierstrassPreparation(unittest.TestCase):
    def setUp(self):
        self.ctx = PrecisionContext(3, 8, 32)

    def test_distinguished_input(self):
        prep = weierstrass_prepare(IwasawaElement.polynomial(self.ctx, [3, 1]))
        self.assertEqual((prep.mu, prep.lambda_), (0, 1))
        self.assertEqual(prep.distinguished.lift(), [3, 1])
        self.assertEqual(prep.unit, IwasawaElement.one(self.ctx))

    def test_pure_p_power(self):
        self.assertEqual(invariants_of_element(IwasawaElement.polynomial(self.ctx, [9])), (0, 2))

    def test_unit_has_trivial_invariants(self):
        self.assertEqual(invariants_of_element(IwasawaElement.polynomial(self.ctx, [1, 1])), (0, 0))

    def test_zero_is_undecidable(self):
        with self.assertRaises(PrecisionExhausted):
            weierstrass_prepare(IwasawaElement.zero(self.ctx))

    def test_recomposition(self):
        for p in (2, 3, 5):
            ctx = PrecisionContext(p, 8, 32)
            rng = random.Random(p)
            for trial in range(60):
                f = random_polynomial(rng, ctx)
                with self.subTest(p=p, trial=trial, f=f.lift()):
                    prep = weierstrass_prepare(f)
                    self.assertTrue(is_distinguished(prep.distinguished))
                    self.assertTrue(prep.unit.is_unit())
                    self.assertEqual(prep.recompose(), f)

    def test_multiplicativity(self):
        rng = random.Random(7)
        for trial in range(40):
            f, g = random_polynomial(rng, self.ctx), random_polynomial(rng, self.ctx)
            with self.subTest(trial=trial):
                lf, mf = invariants_of_element(f)
                lg, mg = invariants_of_element(g)
                self.assertEqual(invariants_of_element(f * g), (lf + lg, mf + mg))


class TestWeierstrassDivision(unittest.TestCase):
    def setUp(self):
        self.ctx = PrecisionContext(3, 8, 32)

    def test_division(self):
        f = IwasawaElement.polynomial(self.ctx, [1, 2, 3, 4])
        P = IwasawaElement.polynomial(self.ctx, [3, 3, 1])
        q, r = weierstrass_divide(f, P)
        self.assertLess(r.degree(), 2)
        self.assertEqual(q * P + r, f)

    def test_division_from_initial_guess(self):
        f = IwasawaElement.polynomial(self.ctx, [5, 0, 1, 7, 2])
        P = IwasawaElement.polynomial(self.ctx, [6, 1])
        expected = weierstrass_divide(f, P)
        self.assertEqual(weierstrass_divide(f, P, initial=IwasawaElement.one(self.ctx)), expected)

    def test_rejects_non_distinguished(self):
        f = IwasawaElement.polynomial(self.ctx, [1, 2])
        with self.assertRaises(NotDistinguished):
            weierstrass_divide(f, IwasawaElement.polynomial(self.ctx, [1, 1]))


class TestOmega(unittest.TestCase):
    def test_first_layer(self):
        ctx = PrecisionContext(3, 8, 32)
        self.assertEqual(omega(1, ctx).lift(), [0, 3, 3, 1])
        self.assertEqual(omega(0, ctx).lift(), [0, 1])

    def test_degree_beyond_window(self):
        with self.assertRaises(TDepthExhausted):
            omega(4, PrecisionContext(3, 8, 32))


if __name__ == '__main__':
    unittest.main()
