import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h3forms.errors import InvalidArgumentError, UnsupportedFieldError
from h3forms.quadfield import (
    CLASS_NUMBER_ONE_D,
    divisor_sum_scan,
    divisors_up_to_units,
    enumerate_by_norm,
    make_field,
    sigma_s,
    unit_class_representative,
)

QI = make_field(-1)
Q3 = make_field(-3)

fields_st = st.sampled_from([make_field(D) for D in CLASS_NUMBER_ONE_D])
coords_st = st.integers(min_value=-30, max_value=30)


def elem(field, a, b):
    return field.element(a, b)


class TestMakeField:
    def test_gaussian(self):
        assert QI.d_K == -4
        assert QI.unit_count == 4

    def test_eisenstein_field(self):
        assert Q3.d_K == -3
        assert Q3.unit_count == 6

    def test_all_nine_invariants(self):
        for D in CLASS_NUMBER_ONE_D:
            f = make_field(D)
            if D % 4 == 1:
                assert f.d_K == D
            else:
                assert f.d_K == 4 * D
            assert f.unit_count == {-1: 4, -3: 6}.get(D, 2)
            assert len(f.units()) == f.unit_count

    def test_rejects_class_number_two(self):
        with pytest.raises(UnsupportedFieldError):
            make_field(-5)

    def test_rejects_positive(self):
        with pytest.raises(UnsupportedFieldError):
            make_field(2)


class TestEnumerate:
    def test_norm_zero_empty(self):
        assert len(enumerate_by_norm(QI, 0)) == 0

    def test_gaussian_norm_two(self):
        # the set {+-1, +-i, +-1+-i}: 8 elements with 0 < N <= 2
        pts = enumerate_by_norm(QI, 2)
        assert len(pts) == 8
        assert {(e.a, e.b) for e in pts} == {
            (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1),
        }

    def test_eisenstein_units(self):
        pts = enumerate_by_norm(Q3, 1)
        assert len(pts) == 6
        assert all(e.norm() == 1 for e in pts)

    def test_deterministic_order(self):
        a = enumerate_by_norm(QI, 50)
        b = enumerate_by_norm(QI, 50)
        assert [(e.a, e.b) for e in a] == [(e.a, e.b) for e in b]
        norms = [e.norm() for e in a]
        assert norms == sorted(norms)

    @settings(max_examples=20, deadline=None)
    @given(fields_st, st.integers(min_value=0, max_value=200))
    def test_exact_membership(self, field, X):
        pts = enumerate_by_norm(field, X)
        seen = set()
        for e in pts:
            assert 0 < e.norm() <= X
            key = (e.a, e.b)
            assert key not in seen
            seen.add(key)

    def test_lattice_count_tracks_area(self):
        # |{0 < N <= X}| ~ (2 pi / sqrt(|d_K|)) X
        for f in (QI, Q3, make_field(-7)):
            c = 2 * math.pi / f.sqrt_abs_disc
            n = len(enumerate_by_norm(f, 10_000))
            assert abs(n / 10_000 - c) / c < 0.05

    def test_csv_rows(self):
        rows = list(enumerate_by_norm(QI, 1).to_csv_rows())
        assert rows[0] == "a,b,norm"
        assert "1,0,1" in rows


class TestDivisors:
    def test_unit_has_single_class(self):
        assert divisors_up_to_units(elem(QI, 1, 0)) == [elem(QI, 1, 0)]

    def test_one_plus_i(self):
        divs = divisors_up_to_units(elem(QI, 1, 1))
        assert divs == [elem(QI, 1, 0), elem(QI, 1, 1)]

    def test_two_in_gaussian(self):
        # 2 = -i (1+i)^2: classes 1, 1+i, 2
        divs = divisors_up_to_units(elem(QI, 2, 0))
        assert divs == [elem(QI, 1, 0), elem(QI, 1, 1), elem(QI, 2, 0)]

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgumentError):
            divisors_up_to_units(elem(QI, 0, 0))

    @settings(max_examples=60, deadline=None)
    @given(fields_st, coords_st, coords_st)
    def test_divisors_divide_exactly(self, field, a, b):
        w = elem(field, a, b)
        if w.is_zero() or w.norm() > 400:
            return
        for d in divisors_up_to_units(w):
            q = d.exact_divide(w)
            assert q is not None
            prod = d * q
            assert (prod.a, prod.b) == (w.a, w.b)


class TestSigma:
    def test_unit_value(self):
        for s in (0.0, 1.0, 2.5 + 1j):
            assert sigma_s(elem(QI, 0, 1), s) == 1

    def test_sigma0_one_plus_i(self):
        assert sigma_s(elem(QI, 1, 1), 0) == pytest.approx(2)

    def test_sigma1_two(self):
        # divisor-class norms {1, 2, 4}
        assert sigma_s(elem(QI, 2, 0), 1) == pytest.approx(7)

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgumentError):
            sigma_s(elem(QI, 0, 0), 1)

    @settings(max_examples=40, deadline=None)
    @given(fields_st, coords_st, coords_st, st.sampled_from([0, 1, 0.5, 1j]))
    def test_unit_invariance(self, field, a, b, s):
        w = elem(field, a, b)
        if w.is_zero() or w.norm() > 300:
            return
        base = sigma_s(w, s)
        for u in field.units():
            assert sigma_s(u * w, s) == pytest.approx(base, rel=1e-12, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(fields_st, coords_st, coords_st, coords_st, coords_st)
def test_norm_multiplicative(field, a, b, c, d):
    x = field.element(a, b)
    y = field.element(c, d)
    assert (x * y).norm() == x.norm() * y.norm()


@settings(max_examples=40, deadline=None)
@given(fields_st, coords_st, coords_st)
def test_conjugate_norm(field, a, b):
    x = field.element(a, b)
    assert x.conj().norm() == x.norm()
    # embedding of the conjugate is the complex conjugate
    assert x.conj().embed() == pytest.approx(x.embed().conjugate(), abs=1e-12)


def test_unit_class_representative_idempotent():
    for f in (QI, Q3):
        for e in enumerate_by_norm(f, 30):
            rep = unit_class_representative(e)
            assert unit_class_representative(rep) == rep


class TestDivisorScan:
    def test_first_checkpoint_gaussian(self):
        # four units, each with a single divisor class
        assert divisor_sum_scan(QI, 1) == [(1, 4)]

    def test_monotone(self):
        tab = divisor_sum_scan(QI, 500)
        sums = [s for _, s in tab]
        assert all(a <= b for a, b in zip(sums, sums[1:]))

    def test_matches_direct_sigma0_sum(self):
        tab = dict(divisor_sum_scan(Q3, 60))
        direct = sum(
            int(sigma_s(e, 0).real + 0.5) for e in enumerate_by_norm(Q3, 60)
        )
        assert tab[60] == direct

    def test_growth_exponent(self):
        # sum(X) ~ c X log X: slope of log(sum/log X) vs log X in [0.9, 1.2]
        checkpoints = [1000, 3163, 10000, 31623, 100000]
        tab = divisor_sum_scan(QI, 100_000, checkpoints=checkpoints)
        xs = np.log([x for x, _ in tab])
        ys = np.log([s / math.log(x) for x, s in tab])
        slope = float(np.polyfit(xs, ys, 1)[0])
        assert 0.9 <= slope <= 1.2
