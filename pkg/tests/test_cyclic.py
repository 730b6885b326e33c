"""
循环商、χ 与 T 映射测试
"""

import pytest

from cohnseries.core.errors import InvalidOrder, MultiVariable, NotSquare
from cohnseries.cyclic import (
    NecklaceElement, add_necklace_lists, canonical_necklace, characteristic_matrix, chi,
    least_rotation, necklace_list_str, necklace_trace, project_necklace, sub_necklace_lists, tmap,
)
from cohnseries.graded_ring import RingElement, RingMatrix, RingSpec, mat_inverse_graded
from cohnseries.ncseries import SeriesMatrix, TruncatedSeries, series_mat_inverse
from generators import (
    random_element, random_graded_invertible, random_invertible_series_matrix, random_ring_matrix,
    random_unimodular,
)


def word(text):
    return tuple(text.split())


class TestNecklaces:
    def test_least_rotation(self):
        assert least_rotation([2, 1, 0, 1]) == 2
        assert least_rotation("bca") == 2
        assert least_rotation([]) == 0
        assert least_rotation([1, 1, 1]) in (0, 1, 2)

    def test_least_rotation_matches_naive(self, rng):
        for _ in range(200):
            seq = [rng.randint(0, 2) for _ in range(rng.randint(1, 8))]
            k = least_rotation(seq)
            rotations = [seq[i:] + seq[:i] for i in range(len(seq))]
            assert seq[k:] + seq[:k] == min(rotations)

    def test_canonical_uses_alphabet_order(self, S):
        assert canonical_necklace(word("g f s"), S) == word("f s g")
        assert canonical_necklace(word("s s g f s"), S) == word("f s s s g")

    def test_project_surviving_necklace(self, S2):
        element = project_necklace(RingElement.word(S2, word("g f s s s")))
        assert element == NecklaceElement(S2, {word("f s s s g"): 1})
        assert str(element) == "1·[f s s s g]"

    def test_rotation_into_forbidden_factor_vanishes(self, S0):
        gsf = RingElement.word(S0, word("g s f"))
        assert not gsf.is_zero()
        assert project_necklace(gsf).is_zero()

    def test_commutators_vanish(self):
        spec = RingSpec.free(["a", "b"])
        a, b = RingElement.symbol(spec, "a"), RingElement.symbol(spec, "b")
        assert project_necklace(a * b - b * a).is_zero()
        assert project_necklace(a * b * b - b * a * b).is_zero()
        assert not project_necklace(a * b).is_zero()

    def test_integer_part_and_str(self, S0):
        element = NecklaceElement(S0, {(): 3, word("s"): -2, word("g s"): 1})
        assert element.coefficient(word("s g")) == 1
        assert str(element) == "3 - 2·[s] + 1·[s g]"
        assert NecklaceElement(S0, {(): 2}) == 2
        assert str(NecklaceElement.zero(S0)) == "0"

    def test_list_helpers(self, Z):
        a = [NecklaceElement(Z, {(): 1}), NecklaceElement(Z, {(): 2})]
        b = [NecklaceElement(Z, {(): 1}), NecklaceElement.zero(Z)]
        assert add_necklace_lists(a, b) == [2, 2]
        assert sub_necklace_lists(a, b) == [0, 2]
        assert necklace_list_str(a) == ["x^1: 1", "x^2: 2"]
        with pytest.raises(InvalidOrder):
            add_necklace_lists(a, b[:1])


class TestChi:
    def test_integer_example(self, Z):
        assert chi(RingMatrix(Z, [[1, 1], [0, 1]]), 3) == [2, 2, 2]

    def test_single_symbol(self, S0):
        values = chi(RingMatrix(S0, [[RingElement.symbol(S0, "s")]]), 2)
        assert [str(v) for v in values] == ["1·[s]", "1·[s s]"]

    def test_zero_matrix(self, Z):
        assert all(v.is_zero() for v in chi(RingMatrix.zero(Z, 3, 3), 6))
        assert chi(RingMatrix(Z, [[1]]), 0) == []

    def test_not_square(self, Z):
        with pytest.raises(NotSquare):
            chi(RingMatrix(Z, [[1, 2]]), 2)

    def test_trace_cyclicity(self, rng, S2):
        for _ in range(25):
            n = rng.randint(1, 3)
            a = random_ring_matrix(rng, S2, n)
            b = random_ring_matrix(rng, S2, n)
            assert necklace_trace(a * b) == necklace_trace(b * a)

    def test_conjugation_invariance(self, rng, Z, S1, S2):
        for spec in (Z, S1, S2):
            for _ in range(9):
                n = rng.randint(1, 3)
                alpha = random_ring_matrix(rng, spec, n, terms=1)
                p = random_graded_invertible(rng, spec, n)
                conjugated = p * alpha * mat_inverse_graded(p)
                assert chi(conjugated, 6) == chi(alpha, 6)

    def test_block_triangular_additivity(self, rng, Z, S1, S2):
        for spec in (Z, S1, S2):
            for _ in range(9):
                na, nb = rng.randint(1, 2), rng.randint(1, 2)
                alpha = random_ring_matrix(rng, spec, na, terms=1)
                beta = random_ring_matrix(rng, spec, nb, terms=1)
                gamma = RingMatrix(spec, [[random_element(rng, spec, terms=1) for _ in range(nb)]
                                          for _ in range(na)])
                zero = RingElement.zero(spec)
                rows = [a_row + g_row for a_row, g_row in zip(alpha.to_lists(), gamma.to_lists())]
                rows += [[zero] * na + b_row for b_row in beta.to_lists()]
                block = RingMatrix(spec, rows)
                assert chi(block, 6) == add_necklace_lists(chi(alpha, 6), chi(beta, 6))


class TestTmap:
    def test_scalar_example(self, Z):
        one_minus_x = TruncatedSeries(Z, 1, 2, {(): 1, (1,): -1})
        zero = TruncatedSeries.zero(Z, 1, 2)
        matrix = SeriesMatrix([[one_minus_x, zero], [zero, one_minus_x]])
        assert tmap(matrix) == [2, 2]

    def test_constant_matrix_is_zero(self, Z):
        matrix = SeriesMatrix.from_ring_matrix(RingMatrix(Z, [[2, 1], [1, 1]]), 1, 4)
        assert all(v.is_zero() for v in tmap(matrix))

    def test_order_argument(self, rng, Z):
        matrix = random_invertible_series_matrix(rng, Z, 2, 4)
        assert tmap(matrix, order=2) == tmap(matrix)[:2]

    def test_rejects_multivariable(self, Z):
        with pytest.raises(MultiVariable):
            tmap(SeriesMatrix.identity(Z, 2, 3, 1))

    def test_rejects_non_square(self, Z):
        with pytest.raises(NotSquare):
            tmap(SeriesMatrix.zero(Z, 1, 3, 1, 2))

    @pytest.mark.parametrize("stage", [None, 2])
    def test_characteristic_matrix_matches_chi(self, rng, stage):
        spec = RingSpec.integers() if stage is None else RingSpec.stage(stage)
        for _ in range(50):
            n = rng.randint(1, 3)
            alpha = random_ring_matrix(rng, spec, n, terms=1)
            assert tmap(characteristic_matrix(alpha, 6)) == chi(alpha, 6)

    def test_additive_on_products(self, rng, Z, S1):
        for spec in (Z, S1):
            for _ in range(13):
                n = rng.randint(1, 2)
                a = random_invertible_series_matrix(rng, spec, n, 6, density=0.5)
                b = random_invertible_series_matrix(rng, spec, n, 6, density=0.5)
                assert tmap(a * b) == add_necklace_lists(tmap(a), tmap(b))

    def test_conjugation_invariance(self, rng, S1):
        for _ in range(25):
            n = rng.randint(1, 2)
            m = random_invertible_series_matrix(rng, S1, n, 3, density=0.5)
            p = SeriesMatrix.from_ring_matrix(RingMatrix(S1, random_unimodular(rng, n)), 1, 3)
            assert tmap(p * m * series_mat_inverse(p)) == tmap(m)

    def test_block_additivity(self, rng, Z, S1):
        for _ in range(25):
            spec = rng.choice([Z, S1])
            a = random_invertible_series_matrix(rng, spec, rng.randint(1, 2), 3, density=0.5)
            b = random_invertible_series_matrix(rng, spec, rng.randint(1, 2), 3, density=0.5)
            block = SeriesMatrix.block([
                [a, SeriesMatrix.zero(spec, 1, 3, a.rows, b.cols)],
                [SeriesMatrix.zero(spec, 1, 3, b.rows, a.cols), b],
            ])
            assert tmap(block) == add_necklace_lists(tmap(a), tmap(b))
