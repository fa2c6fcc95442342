"""The ten acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".  Criterion 9 (the full-scale
certification) takes about 8 to 12 minutes on one core; set CFDIM_SKIP_FULL=1 to
skip it.
"""

import json
import os
import random
import time

import gmpy2
import mpmath
import pytest
from gmpy2 import mpfr

from cfdim.certify import certify_dimension, euler_tail
from cfdim.cli import main
from cfdim.determinant import det_series, estimate_dimension
from cfdim.disc import optimize_disc
from cfdim.hardy import build_bound_ladder, build_norm_table, euler_bound
from cfdim.numerics import DEFAULT_NODE_CAP, PrecisionContext
from cfdim.orbits import build_orbit_table, lyndon_count, orbit_table, trace_naive
from conftest import agreeing_digits, matches_printed, record_criterion, ref
from oracles import det_coefficients_from_matrix, galerkin_matrix, lyndon_count_brute


def _min_digits(pairs):
    return min(agreeing_digits(c, r) for c, r in pairs)


def test_criterion_01_determinant_coefficients(A12, ctx200, cache_dir):
    name = "determinant coefficients delta_1..delta_25 at s^- (P=25)"
    start = time.perf_counter()
    table = orbit_table(A12, 25, ctx200, cache_dir)
    counts_ok = all(table.counts[d] == lyndon_count(2, d) for d in range(1, 26)) and all(
        lyndon_count(2, d) == lyndon_count_brute(2, d) for d in range(1, 15)
    )
    series = det_series(table, ctx200.real(ref.S_MINUS))
    bad = [n for n in range(1, 26) if not matches_printed(series[n], ref.DELTA_AT_S_MINUS[n])]
    digits = _min_digits((series[n], ref.DELTA_AT_S_MINUS[n]) for n in range(1, 26))
    elapsed = time.perf_counter() - start
    passed = counts_ok and not bad
    record_criterion(
        1,
        name,
        passed,
        f"every printed digit matched, min {digits:.1f} significant digits, "
        f"200 working digits, {elapsed:.0f} s; orbit counts ok={counts_ok}"
        + (f"; mismatched n={bad}" if bad else ""),
    )
    assert counts_ok
    assert not bad


def test_criterion_01_desk_fallback_at_150_digits(A12, ctx150, cache_dir):
    # At 150 working digits, rounding (about 1e-150 absolute) swamps delta_n
    # for n >= 22, whose printed digits reach below 1e-150.  n <= 21 match.
    table = orbit_table(A12, 21, ctx150, cache_dir)
    series = det_series(table, ctx150.real(ref.S_MINUS))
    for n in range(1, 22):
        assert matches_printed(series[n], ref.DELTA_AT_S_MINUS[n]), n


def test_criterion_02_dimension_estimate(A12, ctx150, table18):
    start = time.perf_counter()
    table = build_orbit_table(A12, 18, ctx150)
    s18 = estimate_dimension(A12, 18, ctx150, table=table, tol=mpfr("1e-115"))
    elapsed = time.perf_counter() - start
    digits = agreeing_digits(s18, ref.DIMENSION_ESTIMATES[18])
    passed = digits >= 100 and elapsed <= 1800
    record_criterion(2, "s_18 estimate at 150 digits", passed, f"{digits:.1f} digits, {elapsed:.1f} s")
    assert passed


def test_criterion_03_hardy_norms(norms_desk):
    digits = _min_digits((norms_desk.norms[k], v) for k, v in ref.NORMS_AT_S_MINUS.items())
    passed = digits >= 40 and norms_desk.node_count <= DEFAULT_NODE_CAP
    record_criterion(
        3, "Hardy norms k=0..10", passed, f"min {digits:.1f} digits, {norms_desk.node_count} nodes"
    )
    assert passed


def test_criterion_04_alpha_bounds(ladder_desk):
    digits = _min_digits(
        (ladder_desk.alpha_plus[n - 1], v) for n, v in ref.ALPHA_PLUS_AT_S_MINUS.items()
    )
    passed = digits >= 40
    record_criterion(4, "alpha_plus n=1..10 with N=200", passed, f"min {digits:.1f} digits")
    assert passed


def test_criterion_05_euler_bounds(norms_desk):
    K, h = norms_desk.K, norms_desk.h
    digits = _min_digits(
        (euler_bound(n, K, h), v) for n, v in ref.EULER_BOUNDS_AT_S_MINUS.items()
    )
    tail = euler_tail(28, K, h)
    passed = digits >= 30 and tail <= mpfr(ref.EULER_TAIL_29)
    record_criterion(
        5,
        "Euler bounds n=26..32 and tail beyond 28",
        passed,
        f"min {digits:.1f} digits, euler_tail(28)={float(tail):.6e}",
    )
    assert passed


def test_criterion_06_beta_bounds(ladder_desk):
    picks = (1, 2, 10, 26, 27, 28)
    digits = _min_digits((ladder_desk.beta_plus[n], ref.BETA_PLUS_AT_S_MINUS[n]) for n in picks)
    passed = digits >= 20
    record_criterion(6, "beta_plus n in {1,2,10,26,27,28}, M=150 N=200", passed, f"min {digits:.1f} digits")
    assert passed


def test_criterion_07_disc_constants(disc150, ctx150):
    digits = _min_digits(
        [
            (disc150.c, ref.DISC_C),
            (disc150.rho, ref.DISC_RHO),
            (disc150.image_radius, ref.DISC_RHO_PRIME),
            (disc150.ratio, ref.DISC_H),
        ]
    )
    with ctx150.local():
        residual = mpfr(0)
        for coeff in ref.DISC_POLY:
            residual = residual * disc150.c + coeff
    passed = digits >= 60 and abs(residual) < mpfr("1e-100")
    record_criterion(
        7, "disc c, rho, rho', h", passed, f"min {digits:.1f} digits, residual {float(abs(residual)):.1e}"
    )
    assert passed


def test_criterion_08_desk_certification(tmp_path, cache_dir, capsys):
    out = tmp_path / "desk.json"
    start = time.perf_counter()
    status = main(
        ["certify", "--set", "1,2", "--digits", "50", "--period", "18", "--Q", "24",
         "--M", "150", "--N", "200", "--cache-dir", str(cache_dir), "--out", str(out)]
    )
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    cert = json.loads(out.read_text())
    prefix = ref.DIM_100[:52]
    passed = (
        status == 0
        and cert["verdict"] is True
        and cert["s_minus"][:52] == prefix
        and cert["s_plus"][:52] == prefix
        and elapsed <= 3600
    )
    record_criterion(
        8,
        "desk certification, 50 digits, (18,24,150,200)",
        passed,
        f"({cert['s_minus']}, {cert['s_plus']}), {elapsed:.0f} s",
    )
    assert passed


@pytest.mark.skipif(os.environ.get("CFDIM_SKIP_FULL") == "1", reason="CFDIM_SKIP_FULL=1")
def test_criterion_09_full_certification(A12, cache_dir):
    start = time.perf_counter()
    ctx = PrecisionContext(100)
    table = orbit_table(A12, 25, ctx, cache_dir)
    cert = certify_dimension(A12, 100, 25, 28, 400, 600, ctx, table=table)
    elapsed = time.perf_counter() - start
    passed = (
        cert.verdict
        and cert.check()
        and cert.s_minus == ref.S_MINUS
        and cert.s_plus == ref.S_PLUS
        and elapsed <= 24 * 3600
    )
    record_criterion(
        9,
        "full certification, 100 digits, (25,28,400,600)",
        passed,
        f"endpoints ...{cert.s_minus[-5:]}/...{cert.s_plus[-5:]}, "
        f"D_25(s-)={float(cert.D_P_minus):.6e}, tail={float(cert.tail_beta + cert.tail_euler):.3e}, "
        f"{elapsed / 60:.1f} min",
    )
    assert passed


def test_criterion_10_soundness_suite(A12):
    start = time.perf_counter()
    rng = random.Random(20261019)
    ctx = PrecisionContext.with_working_digits(90)
    cd = optimize_disc(A12, ctx)
    table = build_orbit_table(A12, 12, ctx)
    failures = []
    for _ in range(3):
        s_text = f"{rng.uniform(0.4, 0.7):.15f}"
        s = ctx.real(s_text)
        for n in range(1, 13):
            fast, slow = table.trace(n, s), trace_naive(A12, n, s, ctx)
            if not abs(fast - slow) <= ctx.tolerance * abs(slow):
                failures.append(f"trace n={n} s={s_text}")
        series = det_series(table, s)
        norms = build_norm_table(A12, cd, s, 150, ctx)
        ladder = build_bound_ladder(norms, 12, 100)
        for n in range(1, 13):
            d = abs(series[n])
            if not (d <= ladder.beta_plus[n] and gmpy2.is_finite(ladder.beta_plus[n])):
                failures.append(f"beta n={n} s={s_text}")
            if not d <= euler_bound(n, norms.K, norms.h):
                failures.append(f"euler n={n} s={s_text}")
        for n in range(1, 101):
            lo, hi = ladder.alpha(n)
            if not lo <= hi:
                failures.append(f"alpha order n={n}")
            if n <= ladder.Q and not hi <= ladder.J * ladder.h**n:
                failures.append(f"alpha envelope n={n}")

    # Galerkin oracle on the basis m_0..m_80 at s^-.
    K = 80
    A = galerkin_matrix((1, 2), ref.S_MINUS, ref.DISC_C, ref.DISC_RHO, K)
    oracle = det_coefficients_from_matrix(A, 10)
    series = det_series(table, ctx.real(ref.S_MINUS))
    with mpmath.workdps(60):
        galerkin_digits = min(
            float(-mpmath.log10(abs(mpmath.mpf(str(series[n])) - oracle[n]) / abs(oracle[n])))
            for n in range(1, 11)
        )
    if galerkin_digits < 25:
        failures.append(f"galerkin agreement {galerkin_digits:.1f} digits")
    elapsed = time.perf_counter() - start
    passed = not failures
    record_criterion(
        10,
        "soundness properties and Galerkin oracle",
        passed,
        f"Galerkin K={K}: min {galerkin_digits:.1f} digits, {elapsed:.0f} s"
        + (f"; failures: {failures[:5]}" if failures else ""),
    )
    assert passed
