import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h3forms.errors import PoleProximityError, SingularPointError, WindowError
from h3forms.quadfield import CLASS_NUMBER_ONE_D, make_field
from h3forms.zeta import (
    ZetaContext,
    completed_lambda,
    dedekind_zeta,
    dirichlet_l,
    kronecker_character,
    lattice_zeta_oracle,
    riemann_zeta,
    scattering_phi,
)

QI = make_field(-1)


@pytest.fixture(scope="module")
def ctx():
    return ZetaContext(field=QI, precision_target=1e-10)


class TestKronecker:
    def test_at_one(self):
        assert kronecker_character(-4, 1) == 1

    def test_inert_prime(self):
        # 3 is inert in Z[i] since 3 = 3 mod 4
        assert kronecker_character(-4, 3) == -1

    def test_ramified_prime(self):
        assert kronecker_character(-4, 2) == 0

    def test_period(self):
        for d in (-4, -3, -8, -163):
            q = abs(d)
            vals = [kronecker_character(d, n) for n in range(1, 3 * q + 1)]
            assert vals[:q] == vals[q : 2 * q] == vals[2 * q :]

    @settings(max_examples=60, deadline=None)
    @given(
        st.sampled_from([-4, -3, -8, -7, -11, -19, -43, -67, -163]),
        st.integers(min_value=1, max_value=400),
        st.integers(min_value=1, max_value=400),
    )
    def test_completely_multiplicative(self, d, m, n):
        assert kronecker_character(d, m * n) == kronecker_character(
            d, m
        ) * kronecker_character(d, n)

    def test_against_mpmath_l_value(self):
        # chi_{-4} gives the L-series L(2) = Catalan
        L = dirichlet_l(2.0, -4)
        assert L.real == pytest.approx(float(mpmath.catalan), abs=1e-12)


class TestDedekindZeta:
    def test_gaussian_at_two_vs_lattice_oracle(self, ctx):
        want = lattice_zeta_oracle(QI, 2.0)
        got = dedekind_zeta(ctx, 2.0)
        assert abs(got - want) / abs(want) < 1e-9
        # frozen oracle value (lattice sum with smoothed tail, X = 2e6)
        assert got.real == pytest.approx(1.5067030099229851, abs=1e-9)

    def test_factorization_equals_product(self, ctx):
        s = 1.7 + 3.2j
        val = dedekind_zeta(ctx, s)
        prod = riemann_zeta(s) * dirichlet_l(s, QI.d_K)
        assert val == pytest.approx(prod, rel=1e-13)

    def test_conjugate_symmetry(self, ctx):
        s = 2 + 5j
        assert np.conj(dedekind_zeta(ctx, np.conj(s))) == pytest.approx(
            dedekind_zeta(ctx, s), rel=1e-13
        )

    def test_vs_mpmath_random_points(self, ctx):
        rng = np.random.default_rng(42)
        mpmath.mp.dps = 30
        for _ in range(20):
            s = complex(rng.uniform(1.2, 3.0), rng.uniform(-40, 40))
            mine = dedekind_zeta(ctx, s)
            ref_z = complex(mpmath.zeta(s))
            ref_l = complex(
                sum(
                    kronecker_character(-4, a) * mpmath.zeta(s, a / 4)
                    for a in (1, 2, 3, 4)
                )
                * mpmath.mpf(4) ** (-mpmath.mpc(s))
            )
            assert abs(mine - ref_z * ref_l) / abs(mine) < 1e-8

    def test_lattice_oracle_cross_check_many_fields(self):
        for D in (-1, -3, -7, -11):
            f = make_field(D)
            c = ZetaContext(field=f)
            for s in (2.0, 2.5 + 1j, 3.0 - 2j):
                oracle = lattice_zeta_oracle(f, s, X=1_000_000)
                val = dedekind_zeta(c, s)
                assert abs(val - oracle) / abs(val) < 1e-8

    def test_pole_guard(self, ctx):
        with pytest.raises(PoleProximityError):
            dedekind_zeta(ctx, 1 + 1e-9j)

    def test_window_errors(self, ctx):
        with pytest.raises(WindowError):
            dedekind_zeta(ctx, 0.4)
        with pytest.raises(WindowError):
            dedekind_zeta(ctx, 2 + 2000j)

    def test_cache_bit_identical(self, ctx):
        s = 1.3 + 17.2j
        a = dedekind_zeta(ctx, s)
        b = dedekind_zeta(ctx, s)
        assert a == b


class TestCompletedLambda:
    def test_direct_substitution_at_two(self, ctx):
        # (2 pi / sqrt(4))^{-2} Gamma(2) zeta_K(2) = zeta_K(2) / pi^2
        v = completed_lambda(ctx, 2.0)
        assert v.lambda_value == pytest.approx(
            dedekind_zeta(ctx, 2.0) / math.pi ** 2, rel=1e-12
        )

    def test_reflection(self, ctx):
        s = 1.4 + 3j
        a = completed_lambda(ctx, np.conj(s)).lambda_value
        b = completed_lambda(ctx, s).lambda_value
        assert np.conj(a) == pytest.approx(b, rel=1e-12)

    def test_nonvanishing_on_edge(self, ctx):
        for t in range(1, 51):
            assert abs(completed_lambda(ctx, 1 + 1j * t).lambda_value) > 0


class TestScattering:
    def test_unitarity_at_five(self, ctx):
        assert abs(abs(scattering_phi(ctx, 5j)) - 1) < 1e-8

    def test_involution(self, ctx):
        v = scattering_phi(ctx, 3j) * scattering_phi(ctx, -3j)
        assert v == pytest.approx(1.0, rel=1e-8)

    def test_reflection(self, ctx):
        assert np.conj(scattering_phi(ctx, 3j)) == pytest.approx(
            scattering_phi(ctx, -3j), rel=1e-12
        )

    def test_singular_origin(self, ctx):
        with pytest.raises(SingularPointError):
            scattering_phi(ctx, 0)

    def test_unitarity_grid_all_fields(self):
        # the acceptance runs the full grid; spot-check here
        for D in CLASS_NUMBER_ONE_D:
            c = ZetaContext(field=make_field(D))
            for t in (0.5, 7.0, 31.5):
                assert abs(abs(scattering_phi(c, 1j * t)) - 1) < 1e-6

    def test_limit_value_at_origin_is_minus_one(self, ctx):
        # zeta_K(0)/res zeta_K(1) forces phi(0+) = -1; check the limit path
        vals = [scattering_phi(ctx, 1j * t) for t in (1e-2, 1e-3)]
        assert abs(vals[-1] - (-1.0)) < 1e-2
        assert abs(vals[-1] + 1) < abs(vals[0] + 1)
