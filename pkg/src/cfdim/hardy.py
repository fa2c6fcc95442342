"""Hardy-space norms of L_s(m_k) and the bounds built from them.

The ladder, from raw quadrature to bounds on determinant coefficients:

* ``norms[k]``      ||L_s(m_k)|| in H^2(D), m_k(z) = ((z - c)/rho)^k
* ``alpha_minus``   (sum_{k=n-1}^{N} norms[k]^2)^(1/2)
* ``alpha_plus``    alpha_minus with the geometric tail beyond N added
* ``euler_bound``   K^n E_n(h), valid for every n
* ``beta_minus``    coefficients of prod_{i<=M} (1 + alpha_plus[i] z)
* ``beta_plus``     beta_minus plus the bound on indices above M

Only upper bounds on approximation numbers are produced; the approximation
numbers and eigenvalues of L_s themselves are never computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .disc import ContractionData, operator_constants
from .mobius import DigitSet
from .numerics import (
    DEFAULT_NODE_CAP,
    PrecisionContext,
    integrate_periodic,
    integrate_periodic_many,
    precision_of,
)


class BoundInvariantError(RuntimeError):
    pass


def _boundary_terms(digit_set, cd, s, t):
    # Per digit: (weight (z+i)^(-2s), normalised image (T_i(z) - c)/rho) at z = gamma(t).
    c, rho = cd.c, cd.rho
    two_pi_t = 2 * gmpy2.const_pi() * t
    sin, cos = gmpy2.sin_cos(two_pi_t)
    z = mpc(c + rho * cos, rho * sin)
    out = []
    for i in digit_set:
        zi = z + i
        w = gmpy2.exp(-2 * s * gmpy2.log(zi))
        u = (1 / zi - c) / rho
        out.append((w, u))
    return out


def hardy_norm(
    digit_set: DigitSet,
    k: int,
    s,
    cd: ContractionData,
    ctx: PrecisionContext,
    *,
    node_cap: int = DEFAULT_NODE_CAP,
) -> mpfr:
    """||L_s(m_k)|| by quadrature over the boundary circle of the disc."""
    cd.require_admissible()
    if k < 0:
        raise ValueError("k must be >= 0")
    with ctx.local():
        s = mpfr(s)
        if not s > 0:
            raise ValueError("s must be positive")

        def integrand(t):
            F = mpc(0)
            for w, u in _boundary_terms(digit_set, cd, s, t):
                F += w * u**k
            return gmpy2.norm(F)

        sq, _ = integrate_periodic(integrand, ctx, even=True, node_cap=node_cap, name=f"|L_s m_{k}|^2")
        return gmpy2.sqrt(sq)


@dataclass(frozen=True)
class NormTable:
    digit_set: DigitSet
    s: mpfr
    disc: ContractionData
    N: int
    norms: tuple[mpfr, ...]
    weight_norms: tuple[mpfr, ...]
    K: mpfr
    node_count: int
    ctx: PrecisionContext

    @property
    def weight_sum(self) -> mpfr:
        with self.ctx.local():
            return sum(self.weight_norms[1:], self.weight_norms[0])

    @property
    def h(self) -> mpfr:
        return self.disc.ratio

    def check(self) -> None:
        h, wsum = self.h, self.weight_sum
        slack = self.ctx.eps(10)
        with self.ctx.local():
            for k, v in enumerate(self.norms):
                if not v > 0:
                    raise BoundInvariantError(f"norm {k} is not positive")
                if not v <= h**k * wsum + slack:
                    raise BoundInvariantError(
                        f"norm {k} = {float(v):.6e} exceeds the envelope h^k sum|w| "
                        f"= {float(h**k * wsum):.6e}"
                    )


def build_norm_table(
    digit_set: DigitSet,
    cd: ContractionData,
    s,
    N: int,
    ctx: PrecisionContext,
    *,
    node_cap: int = DEFAULT_NODE_CAP,
) -> NormTable:
    """||L_s(m_k)|| for k = 0..N from one shared set of quadrature nodes.

    Each k converges separately (relative test); the node count is the
    largest any k needed.
    """
    cd.require_admissible()
    if N < 0:
        raise ValueError("N must be >= 0")
    with ctx.local():
        s = mpfr(s)
        weight_norms, K = operator_constants(digit_set, cd, s)

        def integrand(t):
            terms = _boundary_terms(digit_set, cd, s, t)
            powers = [w for w, _ in terms]
            ratios = [u for _, u in terms]
            vals = []
            for _ in range(N + 1):
                F = powers[0]
                for p in powers[1:]:
                    F += p
                vals.append(gmpy2.norm(F))
                powers = [p * u for p, u in zip(powers, ratios)]
            return vals

        sq, m = integrate_periodic_many(
            integrand, ctx, even=True, node_cap=node_cap, name=f"|L_s m_k|^2, k<={N}"
        )
        norms = tuple(gmpy2.sqrt(v) for v in sq)
    table = NormTable(digit_set, s, cd, N, norms, tuple(weight_norms), K, m, ctx)
    table.check()
    return table


def approx_bounds(table: NormTable, n: int) -> tuple[mpfr, mpfr]:
    """Lower and upper computed bounds on the n-th approximation number."""
    if not 1 <= n <= table.N:
        raise ValueError(f"n={n} outside 1..{table.N}")
    with table.ctx.local():
        lower_sq = _tail_squares(table)[n - 1]
        return gmpy2.sqrt(lower_sq), gmpy2.sqrt(lower_sq + _truncation_term(table))


def _tail_squares(table: NormTable) -> list[mpfr]:
    # tails[k] = sum_{j=k}^{N} norms[j]^2, summed from the small end.
    tails = [mpfr(0)] * (table.N + 2)
    for k in range(table.N, -1, -1):
        tails[k] = tails[k + 1] + table.norms[k] ** 2
    return tails


def _truncation_term(table: NormTable) -> mpfr:
    h = table.h
    return table.weight_sum**2 * h ** (2 * (table.N + 1)) / (1 - h * h)


def euler_E(n: int, h) -> mpfr:
    """E_n(h) = h^(n(n+1)/2) / prod_{i<=n} (1 - h^i), the sum of h^(i_1+...+i_n) over i_1 < ... < i_n."""
    with precision_of(h):
        den = mpfr(1)
        p = mpfr(1)
        for _ in range(n):
            p *= h
            den *= 1 - p
        return h ** (n * (n + 1) // 2) / den


def euler_bound(n: int, K, h) -> mpfr:
    """K^n E_n(h): bound on |delta_n| from the exponential decay of alpha_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < h < 1:
        raise ValueError(f"contraction ratio must lie in (0, 1), got {h}")
    with precision_of(h):
        return K**n * euler_E(n, h)


@dataclass(frozen=True)
class BoundLadder:
    s: mpfr
    N: int
    M: int
    Q: int
    h: mpfr
    K: mpfr
    J: mpfr
    alpha_minus: tuple[mpfr, ...]  # index n-1 holds alpha_{n,N,-}
    alpha_plus: tuple[mpfr, ...]
    beta_minus: tuple[mpfr, ...]  # index n holds beta^{M,-}_{n,N,+}, n = 0..Q
    beta_plus: tuple[mpfr, ...]

    def alpha(self, n: int) -> tuple[mpfr, mpfr]:
        return self.alpha_minus[n - 1], self.alpha_plus[n - 1]

    def check(self) -> None:
        for n, (lo, hi) in enumerate(zip(self.alpha_minus, self.alpha_plus), start=1):
            if not lo <= hi:
                raise BoundInvariantError(f"alpha_minus > alpha_plus at n={n}")
        for n in range(1, len(self.alpha_plus)):
            if not self.alpha_plus[n] <= self.alpha_plus[n - 1]:
                raise BoundInvariantError(f"alpha_plus increases at n={n + 1}")
        for n in range(1, self.Q + 1):
            if not self.alpha_plus[n - 1] <= self.J * self.h**n:
                raise BoundInvariantError(f"alpha_plus exceeds J h^n at n={n}")
        if not (self.beta_minus[0] == 1 and self.beta_plus[0] == 1):
            raise BoundInvariantError("beta_0 must be 1")
        for n, (lo, hi) in enumerate(zip(self.beta_minus, self.beta_plus)):
            if not lo <= hi:
                raise BoundInvariantError(f"beta_minus > beta_plus at n={n}")


def build_bound_ladder(table: NormTable, Q: int, M: int) -> BoundLadder:
    """alpha bounds for n <= M and computed Taylor bounds beta_n for n <= Q."""
    N = table.N
    if not (1 <= Q <= M <= N):
        raise ValueError(f"need 1 <= Q <= M <= N, got Q={Q}, M={M}, N={N}")
    h, K = table.h, table.K
    with table.ctx.local():
        tails = _tail_squares(table)
        extra = _truncation_term(table)
        alpha_minus = tuple(gmpy2.sqrt(tails[n - 1]) for n in range(1, M + 1))
        alpha_plus = tuple(gmpy2.sqrt(tails[n - 1] + extra) for n in range(1, M + 1))
        J = K * gmpy2.sqrt(1 + h ** (2 * (N + 2 - Q)))

        # Elementary symmetric functions of alpha_plus[1..M], truncated at degree Q.
        e = [mpfr(1)] + [mpfr(0)] * Q
        for i, a in enumerate(alpha_plus, start=1):
            for n in range(min(i, Q), 0, -1):
                e[n] += a * e[n - 1]
        beta_minus = tuple(e)

        hM = h**M
        E = [None] + [euler_E(j, h) for j in range(1, Q + 1)]
        beta_plus = [mpfr(1)]
        for n in range(1, Q + 1):
            corr = mpfr(0)
            for l in range(n):
                j = n - l
                corr += J**j * beta_minus[l] * hM**j * E[j]
            beta_plus.append(beta_minus[n] + corr)
    ladder = BoundLadder(
        table.s, N, M, Q, h, K, J, alpha_minus, alpha_plus, beta_minus, tuple(beta_plus)
    )
    ladder.check()
    return ladder
