"""Taylor coefficients of det(I - z L_s) and the dimension estimates s_N."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpfr

from .mobius import DigitSet
from .numerics import BracketError, PrecisionContext, bisect_root, illinois_root, precision_of
from .orbits import OrbitTable, build_orbit_table

log = logging.getLogger(__name__)

DEFAULT_BRACKET = ("0.01", "0.99")


@dataclass(frozen=True)
class DetSeries:
    """delta_0 .. delta_P of det(I - z L_s) at a fixed s (delta_0 = 1)."""

    s: mpfr | None
    coefficients: tuple[mpfr, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, n: int) -> mpfr:
        return self.coefficients[n]


def det_coeffs(traces: Sequence[mpfr], s=None) -> DetSeries:
    """Convert traces t_1..t_P into determinant coefficients.

    Writing Delta(z) = exp(-sum_n t_n z^n / n) and differentiating,
    Delta'(z) = -(sum_n t_n z^(n-1)) Delta(z); comparing coefficients of
    z^(n-1) gives n delta_n = -sum_{k=1..n} t_k delta_(n-k) with delta_0 = 1.
    """
    if len(traces) < 1:
        raise ValueError("need at least one trace")
    t = list(traces)
    with precision_of(t[0]):
        delta = [mpfr(1)]
        for n in range(1, len(t) + 1):
            acc = t[0] * delta[n - 1]
            for k in range(2, n + 1):
                acc += t[k - 1] * delta[n - k]
            delta.append(-acc / n)
    return DetSeries(s, tuple(delta))


def traces_from_coeffs(series: DetSeries) -> list[mpfr]:
    """Inverse of :func:`det_coeffs`: t_n = -n delta_n - sum_{k<n} t_k delta_(n-k)."""
    d = series.coefficients
    t: list[mpfr] = []
    with precision_of(d[-1]):
        for n in range(1, len(d)):
            acc = -n * d[n]
            for k in range(1, n):
                acc -= t[k - 1] * d[n - k]
            t.append(acc)
    return t


def eval_DN(series: DetSeries, N: int) -> mpfr:
    """1 + delta_1 + ... + delta_N."""
    if N > series.order:
        raise ValueError(f"N={N} exceeds the series order {series.order}")
    if N < 0:
        raise ValueError("N must be >= 0")
    coeffs = series.coefficients
    with precision_of(coeffs[-1]):
        total = coeffs[0]
        for n in range(1, N + 1):
            total += coeffs[n]
        return total


def det_series(table: OrbitTable, s, N: int | None = None) -> DetSeries:
    N = table.max_period if N is None else N
    with table.ctx.local():
        s = mpfr(s)
        return det_coeffs(table.traces(s, N), s)


def truncated_determinant(table: OrbitTable, N: int):
    """s -> D_N(s) using the cached orbit table."""

    def D(s):
        return eval_DN(det_series(table, s, N), N)

    return D


def estimate_dimension(
    digit_set: DigitSet,
    N: int,
    ctx: PrecisionContext,
    *,
    table: OrbitTable | None = None,
    method: str = "illinois",
    bracket: tuple = DEFAULT_BRACKET,
    tol=None,
) -> mpfr:
    """The zero s_N of D_N in (0, 1): midpoint of a sign-checked bracket.

    The bracket is narrowed to ``10^-(target_digits+10)`` unless ``tol`` is
    given.  If the initial bracket does not change sign, its ends are moved
    halfway towards 1/2 (up to four times).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if len(digit_set) < 2:
        raise ValueError("dimension estimates need at least two digits")
    if table is None or table.max_period < N:
        table = build_orbit_table(digit_set, N, ctx)
    finder = {"illinois": illinois_root, "bisect": bisect_root}[method]
    D = truncated_determinant(table, N)
    with ctx.local():
        tol = ctx.root_tolerance if tol is None else mpfr(tol)
        lo, hi = mpfr(bracket[0]), mpfr(bracket[1])
        half = mpfr(1) / 2
        for attempt in range(5):
            try:
                a, b = finder(D, lo, hi, tol)
                break
            except BracketError:
                if attempt == 4:
                    raise
                lo, hi = (lo + half) / 2, (hi + half) / 2
                log.info("no sign change, retrying on [%s, %s]", float(lo), float(hi))
        return (a + b) / 2
