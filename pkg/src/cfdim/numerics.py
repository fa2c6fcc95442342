"""Precision policy, periodic quadrature and bracketing root finders.

Every real in the package is a :class:`gmpy2.mpfr`.  MPFR rounds correctly
in every operation, so a computation repeated under the same
:class:`PrecisionContext` is bit-for-bit reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpfr

LOG2_10 = math.log2(10)

DEFAULT_NODE_CAP = 2**20
MIN_NODES = 64


class QuadratureError(RuntimeError):
    pass


class BracketError(ValueError):
    pass


def guard_digits(target_digits: int) -> int:
    """Working digits required for ``target_digits`` certified digits."""
    return math.ceil(1.5 * target_digits) + 50


@dataclass(frozen=True)
class PrecisionContext:
    """Requested certified digits plus the decimal digits actually carried."""

    target_digits: int
    working_digits: int = 0

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        floor = guard_digits(self.target_digits)
        if self.working_digits == 0:
            object.__setattr__(self, "working_digits", floor)
        elif self.working_digits < floor:
            raise ValueError(
                f"working_digits={self.working_digits} is below the guard-digit "
                f"floor {floor} for target_digits={self.target_digits}"
            )

    @classmethod
    def with_working_digits(cls, working_digits: int) -> "PrecisionContext":
        """Largest target compatible with a fixed working precision."""
        target = max(1, math.floor((working_digits - 50) / 1.5))
        return cls(target, working_digits)

    @property
    def bits(self) -> int:
        return math.ceil(self.working_digits * LOG2_10) + 8

    @property
    def tolerance(self) -> mpfr:
        """Agreement threshold 10^-(working_digits-5)."""
        with self.local():
            return mpfr(10) ** (5 - self.working_digits)

    def eps(self, slack: int) -> mpfr:
        """10^-(working_digits - slack)."""
        with self.local():
            return mpfr(10) ** (slack - self.working_digits)

    @property
    def root_tolerance(self) -> mpfr:
        with self.local():
            return mpfr(10) ** (-(self.target_digits + 10))

    def local(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits)

    def real(self, x) -> mpfr:
        """Convert an int, decimal string or mpfr at this precision."""
        with self.local():
            return mpfr(x)


def precision_of(x):
    """Context carrying the precision of an existing mpfr."""
    return gmpy2.context(gmpy2.get_context(), precision=x.precision)


def to_decimal(x, digits: int | None = None) -> str:
    """Render ``x`` as a decimal string.

    ``digits`` significant digits are kept (rounded to nearest); by default
    enough digits are printed to round-trip the binary value.
    """
    if not isinstance(x, mpfr):
        x = mpfr(x)
    if gmpy2.is_zero(x):
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    if digits is None:
        digits = math.ceil(x.precision / LOG2_10) + 2
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    mant = mant.rstrip("0") or "0"
    # value = 0.mant * 10^exp
    if -8 < exp <= 21:
        if exp <= 0:
            return f"{sign}0.{'0' * (-exp)}{mant}"
        mant = mant.ljust(exp, "0")
        head, tail = mant[:exp], mant[exp:]
        return f"{sign}{head}.{tail}" if tail else f"{sign}{head}"
    tail = mant[1:]
    body = f"{mant[0]}.{tail}" if tail else mant[0]
    return f"{sign}{body}e{exp - 1}"


def integrate_periodic_many(
    f: Callable[[mpfr], Sequence[mpfr]],
    ctx: PrecisionContext,
    *,
    even: bool = False,
    node_cap: int = DEFAULT_NODE_CAP,
    name: str = "integrand",
) -> tuple[list[mpfr], int]:
    """Equal-weight rule for a vector of 1-periodic integrands.

    Node sets are nested: going from M to 2M nodes only evaluates the new odd
    nodes.  Component j has converged once two successive doublings agree to
    ``10^-(working_digits-5)`` times its scale (the rule applied to |f_j|), so
    positive integrands get a relative test and oscillating ones an absolute
    one.  With ``even=True`` the integrand is assumed to satisfy
    f(t) = f(1-t) and only nodes in [0, 1/2] are evaluated.
    """
    tol = ctx.tolerance
    with ctx.local():
        def node(j, m):
            return mpfr(j) / m

        def accumulate(js, m, sums, abs_sums):
            for j in js:
                vals = f(node(j, m))
                w = 1
                if even and 0 < j and 2 * j != m:
                    w = 2
                if sums is None:
                    sums = [mpfr(0)] * len(vals)
                    abs_sums = [mpfr(0)] * len(vals)
                for idx, v in enumerate(vals):
                    sums[idx] += w * v
                    abs_sums[idx] += w * abs(v)
            return sums, abs_sums

        m = MIN_NODES
        first = range(0, m // 2 + 1) if even else range(m)
        sums, abs_sums = accumulate(first, m, None, None)
        prev = [s / m for s in sums]
        while True:
            m2 = 2 * m
            if m2 > node_cap:
                raise QuadratureError(
                    f"quadrature of {name} did not converge with {m} nodes "
                    f"(cap {node_cap})"
                )
            odd = range(1, m, 2) if even else range(1, m2, 2)
            sums, abs_sums = accumulate(odd, m2, sums, abs_sums)
            cur = [s / m2 for s in sums]
            diff = [abs(a - b) for a, b in zip(cur, prev)]
            done = all(
                d <= tol * (a / m2) for d, a in zip(diff, abs_sums)
            )
            m, prev = m2, cur
            if done:
                return cur, m


def integrate_periodic(
    f: Callable[[mpfr], mpfr],
    ctx: PrecisionContext,
    *,
    even: bool = False,
    node_cap: int = DEFAULT_NODE_CAP,
    name: str = "integrand",
) -> tuple[mpfr, int]:
    """Integral of a smooth 1-periodic function over [0, 1).

    Returns ``(value, node_count)``.
    """
    vals, m = integrate_periodic_many(
        lambda t: (f(t),), ctx, even=even, node_cap=node_cap, name=name
    )
    return vals[0], m


def _check_bracket(f_lo, f_hi, lo, hi):
    if not (f_lo < 0 < f_hi):
        raise BracketError(
            f"sign condition f(lo) < 0 < f(hi) violated: "
            f"f({to_decimal(lo, 20)}) = {to_decimal(f_lo, 20)}, "
            f"f({to_decimal(hi, 20)}) = {to_decimal(f_hi, 20)}"
        )


def bisect_root(f, lo, hi, tol, *, max_steps: int = 100_000):
    """Bracket the zero of an increasing function by bisection.

    Returns ``(a, b)`` with f(a) < 0 < f(b) and b - a <= tol.
    """
    f_lo, f_hi = f(lo), f(hi)
    _check_bracket(f_lo, f_hi, lo, hi)
    a, b, fa, fb = lo, hi, f_lo, f_hi
    for _ in range(max_steps):
        if b - a <= tol:
            break
        mid = (a + b) / 2
        fm = f(mid)
        if fm < 0:
            a, fa = mid, fm
        elif fm > 0:
            b, fb = mid, fm
        else:
            a, b, fa, fb = _straddle(f, mid, tol / 4, a, b, fa, fb)
            break
    assert fa < 0 < fb and b - a <= tol, "bisection lost its bracket"
    return a, b


def _straddle(f, x, half, a, b, fa, fb):
    # f(x) == 0 exactly: shrink onto x from both sides.
    lo, hi = max(a, x - half), min(b, x + half)
    flo, fhi = f(lo), f(hi)
    if flo < 0 < fhi:
        return lo, hi, flo, fhi
    return a, b, fa, fb


def illinois_root(f, lo, hi, tol, *, max_steps: int = 10_000):
    """Bracketing false position (Illinois variant) with a bisection safeguard.

    Same contract as :func:`bisect_root`; typically needs a few dozen
    evaluations where bisection needs hundreds.
    """
    a, b = lo, hi
    fa, fb = f(a), f(b)
    _check_bracket(fa, fb, a, b)
    side = 0
    width_before = b - a
    steps_since_halving = 0
    for _ in range(max_steps):
        width = b - a
        if width <= tol:
            break
        if steps_since_halving >= 3:
            # False position stalled: force a bisection step.
            x = (a + b) / 2
            steps_since_halving = 0
            width_before = width
        else:
            x = a - fa * (b - a) / (fb - fa)
            # Keep x strictly inside and at least tol/4 away from the ends,
            # so the final step can straddle the root.
            guard = tol / 4
            if x - a < guard:
                x = a + guard
            elif b - x < guard:
                x = b - guard
        fx = f(x)
        if fx < 0:
            a, fa = x, fx
            if side == -1:
                fb /= 2
            side = -1
        elif fx > 0:
            b, fb = x, fx
            if side == 1:
                fa /= 2
            side = 1
        else:
            a, b, fa, fb = _straddle(f, x, tol / 4, a, b, fa, fb)
            break
        if b - a <= width_before / 2:
            width_before = b - a
            steps_since_halving = 0
        else:
            steps_since_halving += 1
    # fa, fb may have been halved but keep their signs.
    assert fa < 0 < fb and b - a <= tol, "false position lost its bracket"
    return a, b
