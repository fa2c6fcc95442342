import mpmath
import pytest
from gmpy2 import mpfr

from cfdim.hardy import (
    approx_bounds,
    build_bound_ladder,
    build_norm_table,
    euler_bound,
    euler_E,
    hardy_norm,
)
from cfdim.mobius import DigitSet
from cfdim.numerics import PrecisionContext
from conftest import agreeing_digits, ref
from oracles import euler_E_by_summation


def test_norms_match_reference(norms_desk):
    for k, value in ref.NORMS_AT_S_MINUS.items():
        assert agreeing_digits(norms_desk.norms[k], value) >= 40, k


def test_single_norm_matches_table(A12, disc150, ctx150, norms_desk):
    v = hardy_norm(A12, 7, ctx150.real(ref.S_MINUS), disc150, ctx150)
    assert abs(v - norms_desk.norms[7]) < ctx150.eps(10)


def test_norms_decrease_within_envelope(norms_desk):
    norms_desk.check()
    assert all(a > b for a, b in zip(norms_desk.norms, norms_desk.norms[1:]))


def test_alpha_plus_matches_reference(ladder_desk):
    for n, value in ref.ALPHA_PLUS_AT_S_MINUS.items():
        assert agreeing_digits(ladder_desk.alpha_plus[n - 1], value) >= 40, n


def test_approx_bounds_agree_with_ladder(norms_desk, ladder_desk):
    for n in (1, 5, 30):
        lo, hi = approx_bounds(norms_desk, n)
        assert (lo, hi) == ladder_desk.alpha(n)
    with pytest.raises(ValueError):
        approx_bounds(norms_desk, 0)


def test_beta_plus_matches_reference_desk(ladder_desk):
    for n in (1, 2, 10, 26, 27, 28):
        assert agreeing_digits(ladder_desk.beta_plus[n], ref.BETA_PLUS_AT_S_MINUS[n]) >= 20, n


def test_ladder_invariants(ladder_desk):
    ladder_desk.check()
    assert ladder_desk.beta_minus[0] == 1


def test_ladder_parameter_order(norms_desk):
    with pytest.raises(ValueError):
        build_bound_ladder(norms_desk, 30, 20)


@pytest.mark.parametrize("n", [1, 2, 5, 12])
@pytest.mark.parametrize("h", ["0.5", "0.3", "0.51128429314616176"])
def test_euler_E_closed_form_matches_summation(n, h):
    ctx = PrecisionContext(40)
    value = euler_E(n, ctx.real(h))
    with mpmath.workdps(60):
        oracle = euler_E_by_summation(n, h, imax=300)
        assert abs(mpmath.mpf(str(value)) - oracle) <= mpmath.mpf(10) ** -40 * oracle


def test_euler_bounds_match_reference(norms_desk):
    for n, value in ref.EULER_BOUNDS_AT_S_MINUS.items():
        assert agreeing_digits(euler_bound(n, norms_desk.K, norms_desk.h), value) >= 30, n


def test_euler_bound_rejects_bad_input():
    with pytest.raises(ValueError):
        euler_bound(0, mpfr(1), mpfr("0.5"))
    with pytest.raises(ValueError):
        euler_bound(3, mpfr(1), mpfr("1.5"))


def test_norm_table_for_three_digits():
    from cfdim.disc import optimize_disc

    ctx = PrecisionContext(30)
    A = DigitSet([1, 2, 3])
    cd = optimize_disc(A, ctx)
    table = build_norm_table(A, cd, ctx.real("0.7"), 40, ctx)
    ladder = build_bound_ladder(table, 10, 30)
    ladder.check()
