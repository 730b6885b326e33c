"""
Gauss 约化、Witt 分解与反例恒等式链测试
"""

import pytest

from cohnseries.core.errors import MultiVariable, NotCommutative, NotUnit
from cohnseries.cyclic import tmap
from cohnseries.graded_ring import RingElement, RingMatrix, integer_det
from cohnseries.machine import Atom, IntScalar, Inv, LinearMachine, Mul, Sub, linearize
from cohnseries.models.files import SeriesMatrixFile
from cohnseries.ncseries import Polynomial, SeriesMatrix, TruncatedSeries
from cohnseries.whitehead import (
    ElementaryOp, OpKind, check_op_invariance, det_series, elementary_matrix, first_discrepancy,
    gaussian_reduce, verify_counterexample_chain, verify_linearizing_step,
    verify_stabilization_identity, witt_split,
)
from generators import random_invertible_series_matrix, random_series


def series(spec, order, coeffs):
    return TruncatedSeries(spec, 1, order, coeffs)


def is_diagonal(matrix):
    return all(matrix[i, j].is_zero() for i in range(matrix.rows) for j in range(matrix.cols) if i != j)


class TestGaussianReduction:
    def test_two_by_two_example(self, Z):
        x = series(Z, 4, {(1,): 1})
        one = TruncatedSeries.one(Z, 1, 4)
        reduction = gaussian_reduce(SeriesMatrix([[one, x], [x, one]]))
        assert len(reduction.log.ops) == 2
        assert reduction.diagonal == (one, series(Z, 4, {(): 1, (1, 1): -1}))
        assert reduction.log.verify()

    def test_identity_needs_no_ops(self, Z):
        reduction = gaussian_reduce(SeriesMatrix.identity(Z, 1, 3, 3))
        assert reduction.log.ops == ()
        assert reduction.diagonal_product() == TruncatedSeries.one(Z, 1, 3)

    def test_pencil_over_limit_ring(self, S):
        f, s, g = (RingElement.symbol(S, name) for name in "fsg")
        one = TruncatedSeries.one(S, 1, 5)
        pencil = SeriesMatrix([[one, TruncatedSeries.constant(S, 1, 5, f)],
                               [TruncatedSeries.constant(S, 1, 5, -g), series(S, 5, {(): 1, (1,): -s})]])
        reduction = gaussian_reduce(pencil)
        assert reduction.log.verify()
        assert is_diagonal(reduction.diagonal_matrix())
        assert all(entry.augment() == 1 for entry in reduction.diagonal)
        assert reduction.log.undo(reduction.diagonal_matrix()) == reduction.log.initial

    def test_random_integer_matrices(self, rng, Z):
        for _ in range(25):
            matrix = random_invertible_series_matrix(rng, Z, 3, 8, density=0.5)
            reduction = gaussian_reduce(matrix)
            assert reduction.log.verify()
            assert is_diagonal(reduction.diagonal_matrix())
            assert all(entry.augment() == 1 for entry in reduction.diagonal)
            det_normalizer = integer_det(reduction.normalizer.epsilon_matrix())
            assert reduction.diagonal_product() == det_series(matrix) * det_normalizer
            assert tmap(matrix) == tmap(reduction.diagonal_matrix())

    def test_not_unit(self, Z):
        with pytest.raises(NotUnit):
            gaussian_reduce(SeriesMatrix([[series(Z, 3, {(): 2, (1,): 1})]]))

    def test_multivariable(self, Z):
        with pytest.raises(MultiVariable):
            gaussian_reduce(SeriesMatrix.identity(Z, 2, 3, 2))


class TestWittSplit:
    def test_unit_and_witt_parts(self, Z):
        split = witt_split(SeriesMatrix([[series(Z, 4, {(): -1, (1,): 1})]]))
        assert split.unit_part == RingMatrix(Z, [[-1]])
        assert split.witt_part == series(Z, 4, {(): 1, (1,): -1})

    def test_non_unit_constant(self, Z):
        with pytest.raises(NotUnit):
            witt_split(SeriesMatrix([[series(Z, 4, {(): 2, (1,): 1})]]))

    def test_recombine(self, rng, Z, S1):
        for spec in (Z, S1):
            for _ in range(8):
                matrix = random_invertible_series_matrix(rng, spec, rng.randint(1, 3), 4, density=0.5)
                split = witt_split(matrix)
                assert split.recombine() == matrix
                assert split.witt_part.augment() == 1


class TestDeterminant:
    def test_two_by_two(self, Z):
        x = series(Z, 4, {(1,): 1})
        one = TruncatedSeries.one(Z, 1, 4)
        assert det_series(SeriesMatrix([[one, x], [x, one]])) == series(Z, 4, {(): 1, (1, 1): -1})

    def test_multiplicative(self, rng, Z):
        for _ in range(10):
            a = random_invertible_series_matrix(rng, Z, 3, 4)
            b = random_invertible_series_matrix(rng, Z, 3, 4)
            assert det_series(a * b) == det_series(a) * det_series(b)

    def test_noncommutative_ring(self, S0):
        with pytest.raises(NotCommutative):
            det_series(SeriesMatrix.identity(S0, 1, 2, 2))


class TestElementaryOps:
    def test_row_and_column_ops_are_matrix_products(self, rng, S1):
        matrix = random_invertible_series_matrix(rng, S1, 3, 3, density=0.5)
        a = random_series(rng, S1, 1, 3)
        row_op = ElementaryOp(OpKind.ROW_ADD, 2, 0, a)
        col_op = ElementaryOp(OpKind.COL_ADD, 0, 1, a)
        assert row_op.apply(matrix) == elementary_matrix(matrix, 2, 0, a) * matrix
        assert col_op.apply(matrix) == matrix * elementary_matrix(matrix, 0, 1, a)
        assert row_op.inverse().apply(row_op.apply(matrix)) == matrix

    def test_same_index_rejected(self, Z):
        with pytest.raises(ValueError):
            ElementaryOp(OpKind.ROW_ADD, 1, 1, TruncatedSeries.one(Z, 1, 2))

    def test_tmap_invariance(self, rng, Z, S1):
        for spec in (Z, S1):
            for _ in range(6):
                matrix = random_invertible_series_matrix(rng, spec, 2, 6, density=0.5)
                kind = rng.choice([OpKind.ROW_ADD, OpKind.COL_ADD])
                op = ElementaryOp(kind, 0, 1, random_series(rng, spec, 1, 6))
                assert check_op_invariance(matrix, op)

    def test_tmap_invariance_along_reduction_log(self, rng, Z, S1):
        for spec in (Z, S1):
            matrix = random_invertible_series_matrix(rng, spec, 3, 6, density=0.5)
            log = gaussian_reduce(matrix).log
            current = log.initial
            for op in log.ops:
                assert check_op_invariance(current, op)
                current = op.apply(current)
            assert current == log.final

    def test_first_discrepancy(self, Z):
        a = SeriesMatrix([[series(Z, 2, {(): 1, (1,): 2})]])
        b = SeriesMatrix([[series(Z, 2, {(): 1, (1,): 3})]])
        assert first_discrepancy(a, a) is None
        assert first_discrepancy(a, b) == "entry (0,0) [x1]: 2 ≠ 3"


class TestCounterexampleChain:
    @pytest.mark.parametrize("m", range(5))
    def test_stages_pass(self, m):
        report = verify_counterexample_chain(m, m + 2)
        assert report.passed, report.render_text()
        assert report.stage == str(m)

    def test_chi_gap_text(self):
        assert verify_counterexample_chain(2, 4).chi_gap == "3·[f s s s g]"
        assert verify_counterexample_chain(0, 2).chi_gap == "1·[f s g]"

    def test_limit_ring(self):
        report = verify_counterexample_chain(None, 8)
        assert report.passed, report.render_text()
        assert report.stage == "inf"
        assert report.chi_gap is None
        names = [check.name for check in report.checks]
        assert "chi_agreement" in names and "chi_separation" not in names

    def test_order_below_survivor(self):
        report = verify_counterexample_chain(3, 2)
        assert report.passed
        assert "surviving_coefficient" not in [check.name for check in report.checks]

    def test_render_and_payload(self):
        report = verify_counterexample_chain(1, 3)
        text = report.render_text()
        assert text.splitlines()[0] == "counterexample chain: PASS"
        assert "chi gap: 2·[f s s g]" in text
        assert report.to_payload()["passed"] is True
        assert report.first_failure() is None

    def test_certificate_matrices(self):
        report = verify_counterexample_chain(1, 3)
        assert set(report.certificate) == {
            "sigma_inverse", "pencil", "e12(f)", "e21(g)", "e12(-f)", "conjugated", "target",
        }
        assert report.certificate["pencil"]["entries"][0][1] == {"": "f"}
        assert report.certificate["sigma_inverse"]["entries"][0][0]["x1 x1"] == "s s"
        conjugated = SeriesMatrixFile.model_validate(report.certificate["conjugated"]).to_matrix()
        target = SeriesMatrixFile.model_validate(report.certificate["target"]).to_matrix()
        assert conjugated == target
        assert "certificate target:" in report.render_text()


class TestStabilization:
    def test_counterexample_machine(self, S2):
        f, s, g = (RingElement.symbol(S2, name) for name in "fsg")
        machine = LinearMachine(RingMatrix(S2, [[f]]), (RingMatrix(S2, [[s]]),), RingMatrix(S2, [[g]]))
        report = verify_stabilization_identity(machine, 5)
        assert report.passed, report.render_text()

    def test_two_variable_machine(self, Z):
        x1 = Atom(Polynomial.variable(Z, 2, 1))
        x2 = Atom(Polynomial.variable(Z, 2, 2))
        machine = linearize(Inv(Sub(IntScalar(1, Z, 2), Mul(x1, x2))))
        assert verify_stabilization_identity(machine, 4).passed

    def test_linearizing_step(self, rng, S1):
        for _ in range(5):
            a, b, c = (random_series(rng, S1, 2, 3) for _ in range(3))
            assert verify_linearizing_step(a, b, c).passed

    def test_linearizing_step_with_mixed_orders(self, Z):
        a = TruncatedSeries.one(Z, 1, 5)
        b = series(Z, 3, {(1,): 1})
        report = verify_linearizing_step(a, b, b)
        assert report.order == 3
        assert report.passed
