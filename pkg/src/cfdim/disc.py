"""Real-centred discs contracted by the digit maps, and the constants they give.

For a disc D = D(c, rho) whose closure avoids every pole -i, the image
T_i(D) is again a disc centred on the real axis (T_i preserves the real
line), with diameter the segment [T_i(c + rho), T_i(c - rho)].  Hence

    centre_i = (c + i) / ((c + i)^2 - rho^2),   radius_i = rho / ((c + i)^2 - rho^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .mobius import DigitSet
from .numerics import BracketError, PrecisionContext, illinois_root, precision_of


class AdmissibilityError(ValueError):
    pass


@dataclass(frozen=True)
class Disc:
    center: mpfr
    radius: mpfr

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")


@dataclass(frozen=True)
class ContractionData:
    disc: Disc
    image_radius: mpfr
    ratio: mpfr
    admissible: bool

    @property
    def c(self) -> mpfr:
        return self.disc.center

    @property
    def rho(self) -> mpfr:
        return self.disc.radius

    def require_admissible(self) -> "ContractionData":
        if not self.admissible:
            raise AdmissibilityError(
                f"disc (c={float(self.c):.6g}, rho={float(self.rho):.6g}) is not "
                f"admissible (h={float(self.ratio):.6g})"
            )
        return self


def pole_clear(digit: int, disc: Disc) -> bool:
    return disc.center - disc.radius > -digit


def image_disc(digit: int, disc: Disc) -> Disc:
    """T_digit(D) for a real-centred disc whose closure misses -digit."""
    if not pole_clear(digit, disc):
        raise AdmissibilityError(f"pole -{digit} lies in the closed disc")
    with precision_of(disc.center):
        ci = disc.center + digit
        q = ci * ci - disc.radius * disc.radius
        return Disc(ci / q, disc.radius / q)


def contraction_data(digit_set: DigitSet, disc: Disc) -> ContractionData:
    """Radius of the smallest concentric disc holding every image, and h.

    A disc whose closure contains a pole gets ``admissible=False`` with
    infinite ratio.
    """
    if not all(pole_clear(i, disc) for i in digit_set):
        inf = mpfr("inf")
        return ContractionData(disc, inf, inf, False)
    c = disc.center
    with precision_of(c):
        rho_prime = max(
            abs(img.center - c) + img.radius for img in (image_disc(i, disc) for i in digit_set)
        )
        h = rho_prime / disc.radius
    return ContractionData(disc, rho_prime, h, bool(h < 1))


def _equalized(a: int, b: int, c):
    """Radius rho(c) with T_a(c - rho) - c = c - T_b(c + rho), plus h(c) and h'(c).

    With x = a + c - rho and y = b + c + rho, x + y = S = a + b + 2c and
    1/x + 1/y = 2c, so x is the smaller root of t^2 - S t + S/(2c).
    Returns None where no real solution exists.
    """
    S = a + b + 2 * c
    D = S * S - 2 * S / c
    if not D > 0:
        return None
    r = gmpy2.sqrt(D)
    x = (S - r) / 2
    rho = a + c - x
    rho_p = 1 / x - c
    if not (rho > 0 and rho_p > 0):
        return None
    dD = 4 * S - 2 * (2 * c - S) / (c * c)
    dx = (2 - dD / (2 * r)) / 2
    drho = 1 - dx
    drho_p = -dx / (x * x) - 1
    h = rho_p / rho
    dh = (drho_p * rho - rho_p * drho) / (rho * rho)
    return rho, rho_p, h, dh


def equalized_disc(digit_set: DigitSet, c, ctx: PrecisionContext) -> Disc:
    with ctx.local():
        c = mpfr(c)
        out = _equalized(digit_set.smallest, digit_set.largest, c)
        if out is None:
            raise AdmissibilityError(f"no equalizing radius at c={float(c):.6g}")
        return Disc(c, out[0])


def optimize_disc(digit_set: DigitSet, ctx: PrecisionContext, *, grid: int = 200) -> ContractionData:
    """Admissible real-centred disc with (locally) minimal contraction ratio.

    The radius is tied to the centre by equalizing the extreme image
    points; the centre is located by a coarse scan and golden-section
    search, then polished by solving h'(c) = 0 to working precision.
    """
    if len(digit_set) < 2:
        raise ValueError("need at least two digits")
    a, b = digit_set.smallest, digit_set.largest
    with ctx.local():

        def h_of(c):
            out = _equalized(a, b, c)
            if out is None or not out[2] < 1:
                return None
            cd = contraction_data(digit_set, Disc(c, out[0]))
            return cd.ratio if cd.admissible else None

        # Below c_min = (sqrt((a+b)^2 + 16) - (a+b)) / 4 there is no solution.
        c_min = (gmpy2.sqrt(mpfr((a + b) ** 2 + 16)) - (a + b)) / 4
        span = mpfr(4 * (a + b) + 4)
        samples = []
        for j in range(1, grid + 1):
            c = c_min + span * (mpfr(j) / grid) ** 2
            samples.append((c, h_of(c)))
        ok = [(j, hc) for j, (_, hc) in enumerate(samples) if hc is not None]
        if not ok:
            raise AdmissibilityError(f"no admissible real-centred disc for A={digit_set.digits}")
        jbest = min(ok, key=lambda item: item[1])[0]
        lo = samples[jbest - 1][0] if jbest > 0 else c_min + span / (10 * grid * grid)
        hi = samples[min(jbest + 1, grid - 1)][0]

        # Golden-section search down to ~sqrt(eps), where h flattens out.
        gs_tol = mpfr(10) ** (-(ctx.working_digits // 2 - 5))
        invphi = (gmpy2.sqrt(mpfr(5)) - 1) / 2
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        f1, f2 = h_of(x1), h_of(x2)
        while hi - lo > gs_tol:
            if f1 is not None and (f2 is None or f1 <= f2):
                hi, x2, f2 = x2, x1, f1
                x1 = hi - invphi * (hi - lo)
                f1 = h_of(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + invphi * (hi - lo)
                f2 = h_of(x2)

        # Polish: the minimum is the zero of the analytic derivative h'(c).
        def dh(c):
            return _equalized(a, b, c)[3]

        width = max(hi - lo, gs_tol)
        lo, hi = lo - width, hi + width
        try:
            c_lo, c_hi = illinois_root(dh, lo, hi, ctx.eps(2))
            c_star = (c_lo + c_hi) / 2
        except BracketError:
            # Minimum sits on an admissibility boundary rather than at h' = 0.
            c_star = (lo + hi) / 2
        rho = _equalized(a, b, c_star)[0]
        return contraction_data(digit_set, Disc(c_star, rho)).require_admissible()


def operator_constants(digit_set: DigitSet, cd: ContractionData, s) -> tuple[list[mpfr], mpfr]:
    """Weight sup-norms (i + c - rho)^(-2s) on D and K_s = sum / (h sqrt(1 - h^2)).

    For s > 0 the weight |z + i|^(-2s) is largest at the point of the disc
    nearest the pole, z = c - rho.
    """
    cd.require_admissible()
    with precision_of(cd.c):
        s = mpfr(s)
        if not s > 0:
            raise ValueError("operator constants need s > 0")
        c, rho, h = cd.c, cd.rho, cd.ratio
        norms = [(i + c - rho) ** (-2 * s) for i in digit_set]
        total = sum(norms[1:], norms[0])
        K = total / (h * gmpy2.sqrt(1 - h * h))
        return norms, K
