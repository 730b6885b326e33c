"""
Magnus 嵌入与群环测试
"""

import pytest

from cohnseries.core.errors import NotSquare, NotUnit, SpecMismatch
from cohnseries.graded_ring import ArithKind, RingElement
from cohnseries.machine import machine_expand
from cohnseries.magnus import (
    GroupRingElement, format_group_word, group_augmentation, group_ring_arith, group_to_machine,
    invert_word, magnus_expand, magnus_expand_matrix, polynomial_to_group_ring, psi_check, reduce_word,
)
from cohnseries.ncseries import Polynomial, SeriesMatrix, TruncatedSeries, series_mat_inverse
from generators import random_group_element, random_polynomial


def z(spec, mu, index, power=1):
    return GroupRingElement.generator(spec, mu, index, power)


class TestGroupWords:
    def test_free_reduction(self):
        assert reduce_word([1, 2, -2, -1, 3]) == (3,)
        assert reduce_word([1, -1, 1]) == (1,)
        with pytest.raises(ValueError):
            reduce_word([0])

    def test_inverse_and_format(self):
        assert invert_word((1, -2)) == (2, -1)
        assert format_group_word((1, -2)) == "z1 z2^-1"


class TestGroupRing:
    def test_str(self, Z, S0):
        assert str(z(Z, 1, 1) + 1) == "1 + z1"
        assert str(GroupRingElement(Z, 2, {(1, 2): 3})) == "3*z1 z2"
        assert str(GroupRingElement(Z, 2, {(1, -2): -1})) == "-z1 z2^-1"
        f, s = RingElement.symbol(S0, "f"), RingElement.symbol(S0, "s")
        assert str(GroupRingElement(S0, 1, {(1,): f + s})) == "(f + s)*z1"
        assert str(GroupRingElement(Z, 1)) == "0"

    def test_inverse_letters_cancel(self, Z):
        assert z(Z, 2, 1) * z(Z, 2, 1, -1) == GroupRingElement.constant(Z, 2, 1)
        assert z(Z, 2, 1, 2) == z(Z, 2, 1) * z(Z, 2, 1)

    def test_noncommutative_product(self, Z):
        assert z(Z, 2, 1) * z(Z, 2, 2) != z(Z, 2, 2) * z(Z, 2, 1)

    def test_augmentation(self, Z):
        element = GroupRingElement(Z, 2, {(): 2, (1, -2): 3, (2,): -1})
        assert group_augmentation(element) == 4

    def test_letter_out_of_range(self, Z):
        with pytest.raises(ValueError):
            GroupRingElement(Z, 1, {(2,): 1})

    def test_rank_mismatch(self, Z):
        with pytest.raises(SpecMismatch):
            z(Z, 1, 1) + z(Z, 2, 1)


class TestGroupRingArith:
    def test_generator_times_inverse(self, Z):
        product = group_ring_arith(z(Z, 1, 1), z(Z, 1, 1, -1), ArithKind.MUL)
        assert product == GroupRingElement.constant(Z, 1, 1)

    def test_difference_of_squares(self, Z):
        one = GroupRingElement.constant(Z, 1, 1)
        left = group_ring_arith(one, z(Z, 1, 1), ArithKind.ADD)
        right = group_ring_arith(one, z(Z, 1, 1), ArithKind.SUB)
        expected = group_ring_arith(one, z(Z, 1, 1, 2), ArithKind.SUB)
        assert group_ring_arith(left, right, ArithKind.MUL) == expected

    def test_negation(self, S1):
        a = z(S1, 2, 1) + z(S1, 2, 2, -1)
        negated = group_ring_arith(a, None, ArithKind.NEG)
        assert group_ring_arith(a, negated, ArithKind.ADD) == GroupRingElement(S1, 2)

    def test_spec_mismatch(self, Z, S1):
        with pytest.raises(SpecMismatch):
            group_ring_arith(z(Z, 1, 1), z(S1, 1, 1), ArithKind.ADD)

    def test_rank_mismatch(self, Z):
        with pytest.raises(SpecMismatch):
            group_ring_arith(z(Z, 1, 1), z(Z, 2, 1), ArithKind.MUL)

    def test_binary_needs_operand(self, Z):
        with pytest.raises(ValueError):
            group_ring_arith(z(Z, 1, 1), None, ArithKind.ADD)


class TestMagnusExpansion:
    def test_inverse_generator(self, Z):
        expected = TruncatedSeries(Z, 1, 3, {(): 1, (1,): -1, (1, 1): 1, (1, 1, 1): -1})
        assert magnus_expand(z(Z, 1, 1, -1), 3) == expected

    def test_commutator(self, Z):
        commutator = z(Z, 2, 1) * z(Z, 2, 2) * z(Z, 2, 1, -1) * z(Z, 2, 2, -1)
        expected = TruncatedSeries(Z, 2, 2, {(): 1, (1, 2): 1, (2, 1): -1})
        assert magnus_expand(commutator, 2) == expected

    def test_unit_product(self, Z):
        product = magnus_expand(z(Z, 1, 1), 8) * magnus_expand(z(Z, 1, 1, -1), 8)
        assert product == TruncatedSeries.one(Z, 1, 8)

    def test_homomorphism(self, rng, Z, S1):
        for spec in (Z, S1):
            for _ in range(10):
                a = random_group_element(rng, spec, 2)
                b = random_group_element(rng, spec, 2)
                assert magnus_expand(a * b, 4) == magnus_expand(a, 4) * magnus_expand(b, 4)
                assert magnus_expand(a - b, 4) == magnus_expand(a, 4) - magnus_expand(b, 4)

    def test_polynomial_round_trip(self, rng, Z, S1):
        for spec in (Z, S1):
            for _ in range(10):
                poly = random_polynomial(rng, spec, 2, terms=3, max_degree=3)
                assert magnus_expand(polynomial_to_group_ring(poly), 4) == poly.to_series(4)

    def test_machine_matches_expansion(self, rng, Z):
        for _ in range(50):
            a = random_group_element(rng, Z, rng.randint(1, 3), max_len=3)
            assert machine_expand(group_to_machine(a), 6) == magnus_expand(a, 6)

    def test_zero_element(self, Z):
        zero = GroupRingElement(Z, 1)
        assert machine_expand(group_to_machine(zero), 3).is_zero()
        assert polynomial_to_group_ring(Polynomial(Z, 1)) == zero


class TestPsi:
    def test_examples(self, Z):
        assert psi_check([[z(Z, 1, 1)]])
        assert not psi_check([[GroupRingElement.constant(Z, 1, 2)]])
        matrix = [[z(Z, 2, 1) + 1, GroupRingElement.constant(Z, 2, 1)],
                  [GroupRingElement(Z, 2), z(Z, 2, 2, -1)]]
        assert not psi_check(matrix)

    def test_not_square(self, Z):
        with pytest.raises(NotSquare):
            psi_check([[z(Z, 1, 1), z(Z, 1, 1)]])

    def test_psi_decides_invertibility(self, rng, Z):
        for _ in range(30):
            matrix = [[random_group_element(rng, Z, 2, max_len=2) for _ in range(2)] for _ in range(2)]
            expansion = magnus_expand_matrix(matrix, 3)
            if psi_check(matrix):
                inverse = series_mat_inverse(expansion)
                assert expansion * inverse == SeriesMatrix.identity(Z, 2, 3, 2)
            else:
                with pytest.raises(NotUnit):
                    series_mat_inverse(expansion)

    def test_triangular_units(self, rng, Z):
        for _ in range(10):
            corner = random_group_element(rng, Z, 2)
            matrix = [[z(Z, 2, 1, rng.choice([1, -1])), corner], [GroupRingElement(Z, 2), z(Z, 2, 2, -1)]]
            assert psi_check(matrix)
            expansion = magnus_expand_matrix(matrix, 3)
            assert series_mat_inverse(expansion) * expansion == SeriesMatrix.identity(Z, 2, 3, 2)
