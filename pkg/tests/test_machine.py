"""
线性机器与线性化测试
"""

import pytest

from cohnseries.core.errors import NotSigmaInvertible, SpecMismatch
from cohnseries.graded_ring import ArithKind, RingElement, RingMatrix, RingSpec
from cohnseries.machine import (
    Add, Atom, IntScalar, Inv, LinearMachine, Mul, Sub, canonicalize, combine_expr,
    evaluate_expr, linearize, machine_combine, machine_expand, machine_inverse, polynomial_machine,
)
from cohnseries.ncseries import Polynomial, TruncatedSeries
from generators import random_expr, random_polynomial


def fsg_machine(spec):
    """(f, s, g) 的一维机器，展开为 Σ f sᵏ g xᵏ"""
    f, s, g = (RingElement.symbol(spec, name) for name in "fsg")
    return LinearMachine(RingMatrix(spec, [[f]]), (RingMatrix(spec, [[s]]),), RingMatrix(spec, [[g]]))


def one_minus_x(spec, mu=1, index=1):
    return Sub(IntScalar(1, spec, mu), Atom(Polynomial.variable(spec, mu, index)))


class TestCounterexampleMachine:
    def test_vanishes_over_limit_ring(self, S):
        assert machine_expand(fsg_machine(S), 20).is_zero()

    @pytest.mark.parametrize("m", range(5))
    def test_first_survivor_over_stage(self, m):
        spec = RingSpec.stage(m)
        series = machine_expand(fsg_machine(spec), m + 3)
        assert series.low_order() == m + 1
        expected = RingElement.word(spec, ("f",) + ("s",) * (m + 1) + ("g",))
        assert series.coefficient((1,) * (m + 1)) == expected

    def test_coefficient_matches_expansion(self, S2):
        machine = fsg_machine(S2)
        series = machine_expand(machine, 5)
        for k in range(6):
            assert machine.coefficient((1,) * k) == series.coefficient((1,) * k)


class TestMachineAlgebra:
    def test_constant_machine(self, Z):
        assert machine_expand(LinearMachine.constant(Z, 2, 7), 3) == TruncatedSeries.constant(Z, 2, 3, 7)

    def test_geometric_series(self, Z):
        machine = linearize(Inv(one_minus_x(Z)))
        expected = TruncatedSeries(Z, 1, 6, {(1,) * k: 1 for k in range(7)})
        assert machine_expand(machine, 6) == expected

    def test_combine_matches_series_arithmetic(self, rng, S1):
        for _ in range(10):
            p = random_polynomial(rng, S1, 2)
            q = random_polynomial(rng, S1, 2, max_degree=2)
            a, b = polynomial_machine(p), polynomial_machine(q)
            for kind in (ArithKind.ADD, ArithKind.SUB, ArithKind.MUL):
                combined = machine_expand(machine_combine(a, b, kind), 4)
                ps, qs = p.to_series(4), q.to_series(4)
                expected = {ArithKind.ADD: ps + qs, ArithKind.SUB: ps - qs, ArithKind.MUL: ps * qs}[kind]
                assert combined == expected
            assert machine_expand(machine_combine(a, None, ArithKind.NEG), 4) == -p.to_series(4)

    def test_inverse_machine(self, S0):
        gf = RingElement.word(S0, ("g", "f"))
        poly = Polynomial(S0, 1, {(): 1 - gf, (1,): RingElement.symbol(S0, "s")})
        inverse = machine_expand(machine_inverse(polynomial_machine(poly)), 5)
        assert inverse * poly.to_series(5) == TruncatedSeries.one(S0, 1, 5)

    def test_not_sigma_invertible(self, Z):
        expr = Inv(Add(IntScalar(2, Z, 1), Atom(Polynomial.variable(Z, 1, 1))))
        with pytest.raises(NotSigmaInvertible):
            linearize(expr)
        with pytest.raises(NotSigmaInvertible):
            evaluate_expr(expr, 3)

    def test_mu_mismatch(self, Z):
        with pytest.raises(SpecMismatch):
            machine_combine(LinearMachine.constant(Z, 1, 1), LinearMachine.constant(Z, 2, 1), ArithKind.ADD)

    def test_shape_validation(self, Z):
        with pytest.raises(ValueError):
            LinearMachine(RingMatrix(Z, [[1, 0]]), (RingMatrix.zero(Z, 2, 2),), RingMatrix(Z, [[1]]))


class TestLinearize:
    def test_random_expressions(self, rng, Z, S1):
        for spec in (Z, S1):
            for _ in range(50):
                mu = rng.randint(1, 3)
                expr = random_expr(rng, spec, mu)
                assert machine_expand(linearize(expr), 5) == evaluate_expr(expr, 5)

    def test_noncommutative_product(self, Z):
        x1 = Atom(Polynomial.variable(Z, 2, 1))
        x2 = Atom(Polynomial.variable(Z, 2, 2))
        expr = Mul(Inv(one_minus_x(Z, 2, 1)), x2)
        series = machine_expand(linearize(expr), 3)
        assert series.coefficient((1, 2)) == 1
        assert series.coefficient((2, 1)) == 0
        assert machine_expand(linearize(Mul(x1, x2)), 2) != machine_expand(linearize(Mul(x2, x1)), 2)


class TestCanonicalAst:
    def test_leaf_pairs_fold(self, Z):
        x = Atom(Polynomial.variable(Z, 1, 1))
        folded = combine_expr(ArithKind.SUB, IntScalar(1, Z, 1), x)
        assert isinstance(folded, Atom)
        assert folded.poly == Polynomial(Z, 1, {(): 1, (1,): -1})

    def test_integer_constants_become_scalars(self, Z):
        assert combine_expr(ArithKind.MUL, IntScalar(2, Z, 1), IntScalar(-3, Z, 1)) == IntScalar(-6, Z, 1)
        assert canonicalize(Atom(Polynomial.constant(Z, 1, 4))) == IntScalar(4, Z, 1)

    def test_canonicalize_keeps_inverse_nodes(self, Z):
        expr = Mul(Inv(one_minus_x(Z)), Add(IntScalar(1, Z, 1), IntScalar(1, Z, 1)))
        assert canonicalize(expr) == Mul(Inv(Atom(Polynomial(Z, 1, {(): 1, (1,): -1}))), IntScalar(2, Z, 1))
