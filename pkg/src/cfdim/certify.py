"""Two-endpoint sign test with rigorous tail bounds, and its JSON certificate."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import gmpy2
from gmpy2 import mpfr

from .determinant import det_series, estimate_dimension, eval_DN
from .disc import ContractionData, optimize_disc
from .hardy import build_bound_ladder, build_norm_table, euler_bound
from .mobius import DigitSet
from .numerics import PrecisionContext, precision_of, to_decimal
from .orbits import OrbitTable, orbit_table

log = logging.getLogger(__name__)

SCHEMA_VERSION = "cfdim.certificate.v1"
MAX_WIDENINGS = 5

ASSUMED_THEOREMS = [
    "s -> D(s) = det(I - L_s) is continuous and increasing on (0, 1) with a unique "
    "zero at dim(E_A), following from strict monotonicity of the pressure "
    "P(-s log|T'|) and the identification of its zero with the dimension",
    "L_s acting on H^2(D) has exponentially decaying approximation numbers, hence "
    "is trace class; its Fredholm determinant is exp(-sum z^n tr(L_s^n)/n) with "
    "traces given by the periodic-orbit formula, and |delta_n| is bounded by the "
    "elementary symmetric sums of approximation numbers",
]

ROUNDING_MODEL = (
    "correctly rounded MPFR arithmetic at working precision with guard digits; "
    "no directed rounding or interval enclosure"
)


class CertificationError(RuntimeError):
    def __init__(self, message: str, certificate: "Certificate | None" = None):
        super().__init__(message)
        self.certificate = certificate


def euler_tail(Q: int, K, h) -> mpfr:
    """Upper bound on sum_{n>Q} K^n E_n(h).

    Consecutive terms have ratio K h^(n+1) / (1 - h^(n+1)), decreasing in n,
    so the tail is at most its first term over 1 - r with
    r = K h^(Q+2) / (1 - h^(Q+2)).
    """
    with precision_of(h):
        hq = h ** (Q + 2)
        r = K * hq / (1 - hq)
        if not r < 1:
            raise ValueError(
                f"Euler tail ratio r={float(r):.4g} >= 1 at Q={Q}; raise Q"
            )
        return euler_bound(Q + 1, K, h) / (1 - r)


def truncate_endpoints(s_est, digits: int, widening: int = 0) -> tuple[str, str]:
    """Interval endpoints as exact decimal strings with ``digits`` decimals.

    With m = floor(s_est 10^digits) - 1 the base interval is
    (m, m + 2) 10^-digits; each widening doubles the width about m + 1.
    """
    with precision_of(s_est):
        m = int(gmpy2.floor(s_est * mpfr(10) ** digits)) - 1
    half = 2**widening
    lo, hi = m + 1 - half, m + 1 + half

    def fmt(k: int) -> str:
        sign = "-" if k < 0 else ""
        body = str(abs(k)).rjust(digits + 1, "0")
        return f"{sign}{body[:-digits]}.{body[-digits:]}"

    return fmt(lo), fmt(hi)


@dataclass(frozen=True)
class EndpointBounds:
    s: str
    D_P: mpfr
    tail_beta: mpfr
    tail_euler: mpfr
    K: mpfr
    norm_nodes: int

    @property
    def tail(self) -> mpfr:
        with precision_of(self.tail_beta):
            return self.tail_beta + self.tail_euler


@dataclass
class Certificate:
    digit_set: tuple[int, ...]
    P: int
    Q: int
    M: int
    N: int
    target_digits: int
    working_digits: int
    disc: dict[str, str]
    s_estimate: str
    s_minus: str
    s_plus: str
    width: str
    D_P_minus: mpfr
    D_P_plus: mpfr
    tail_beta: mpfr
    tail_euler: mpfr
    endpoints: dict[str, dict]
    verdict: bool
    widenings: int = 0
    assumed_theorems: list[str] = field(default_factory=lambda: list(ASSUMED_THEOREMS))
    rounding_model: str = ROUNDING_MODEL

    REAL_FIELDS = ("D_P_minus", "D_P_plus", "tail_beta", "tail_euler")

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in self.REAL_FIELDS:
            data[key] = _real_to_json(getattr(self, key))
        data["digit_set"] = list(self.digit_set)
        data["schema_version"] = SCHEMA_VERSION
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        data = dict(data)
        version = data.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported certificate schema {version!r}")
        for key in cls.REAL_FIELDS:
            data[key] = _real_from_json(data[key])
        data["digit_set"] = tuple(data["digit_set"])
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.from_dict(json.loads(text))

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def check(self) -> bool:
        """Recheck the sign conditions from the stored endpoint values."""
        lo, hi = self.endpoints["minus"], self.endpoints["plus"]
        bits = self.D_P_minus.precision
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            below = self.D_P_minus + mpfr(lo["tail_beta"]) + mpfr(lo["tail_euler"]) < 0
            above = self.D_P_plus - mpfr(hi["tail_beta"]) - mpfr(hi["tail_euler"]) > 0
        return below and above


def _real_to_json(x: mpfr) -> dict:
    return {"decimal": to_decimal(x), "precision_bits": x.precision}


def _real_from_json(obj: dict) -> mpfr:
    return mpfr(obj["decimal"], obj["precision_bits"])


def endpoint_bounds(
    digit_set: DigitSet,
    cd: ContractionData,
    s: str,
    P: int,
    Q: int,
    M: int,
    N: int,
    ctx: PrecisionContext,
) -> tuple[mpfr, mpfr, mpfr, int]:
    """Tail bounds at one endpoint: (sum_{P<n<=Q} beta_plus, Euler tail, K_s, nodes)."""
    with ctx.local():
        table = build_norm_table(digit_set, cd, mpfr(s), N, ctx)
        ladder = build_bound_ladder(table, Q, M)
        tail_beta = mpfr(0)
        for n in range(P + 1, Q + 1):
            tail_beta += ladder.beta_plus[n]
        tail_e = euler_tail(Q, ladder.K, ladder.h)
        return tail_beta, tail_e, ladder.K, table.node_count


def _endpoint_job(args):
    return endpoint_bounds(*args)


def certify_dimension(
    digit_set: DigitSet,
    target_digits: int,
    P: int,
    Q: int,
    M: int,
    N: int,
    ctx: PrecisionContext | None = None,
    *,
    table: OrbitTable | None = None,
    cache_dir: str | Path | None = None,
    s_estimate=None,
    workers: int = 1,
    max_widenings: int = MAX_WIDENINGS,
) -> Certificate:
    """Certify dim(E_A) to ``target_digits`` decimals.

    Raises :class:`CertificationError` (carrying the last certificate) if the
    sign test still fails after ``max_widenings`` doublings of the interval.
    """
    if not (1 <= P <= Q <= M <= N):
        raise ValueError(f"need 1 <= P <= Q <= M <= N, got {(P, Q, M, N)}")
    ctx = ctx or PrecisionContext(target_digits)
    if ctx.target_digits < target_digits:
        raise ValueError("precision context is set up for fewer digits than requested")
    if table is None or table.max_period < P:
        table = orbit_table(digit_set, P, ctx, cache_dir)
    with ctx.local():
        if s_estimate is None:
            s_est = estimate_dimension(digit_set, P, ctx, table=table)
        else:
            s_est = mpfr(s_estimate)
        log.info("s_%d = %s", P, to_decimal(s_est, target_digits + 5))
        cd = optimize_disc(digit_set, ctx)
        disc = {
            "c": to_decimal(cd.c),
            "rho": to_decimal(cd.rho),
            "rho_prime": to_decimal(cd.image_radius),
            "h": to_decimal(cd.ratio),
        }
        digits = target_digits + 1
        cert = None
        for widening in range(max_widenings + 1):
            s_lo, s_hi = truncate_endpoints(s_est, digits, widening)
            jobs = [(digit_set, cd, s, P, Q, M, N, ctx) for s in (s_lo, s_hi)]
            if workers > 1:
                with ProcessPoolExecutor(max_workers=min(workers, 2)) as pool:
                    results = list(pool.map(_endpoint_job, jobs))
            else:
                results = [endpoint_bounds(*job) for job in jobs]
            ends = {}
            for key, s, (tb, te, K, nodes) in zip(("minus", "plus"), (s_lo, s_hi), results):
                D = eval_DN(det_series(table, mpfr(s), P), P)
                ends[key] = EndpointBounds(s, D, tb, te, K, nodes)
            lo, hi = ends["minus"], ends["plus"]
            verdict = bool(lo.D_P + lo.tail < 0 and hi.D_P - hi.tail > 0)
            width = f"{2 ** (widening + 1)}e-{digits}"
            cert = Certificate(
                digit_set=digit_set.digits,
                P=P,
                Q=Q,
                M=M,
                N=N,
                target_digits=target_digits,
                working_digits=ctx.working_digits,
                disc=disc,
                s_estimate=to_decimal(s_est, target_digits + 20),
                s_minus=s_lo,
                s_plus=s_hi,
                width=width,
                D_P_minus=lo.D_P,
                D_P_plus=hi.D_P,
                tail_beta=max(lo.tail_beta, hi.tail_beta),
                tail_euler=max(lo.tail_euler, hi.tail_euler),
                endpoints={
                    key: {
                        "s": e.s,
                        "D_P": to_decimal(e.D_P),
                        "tail_beta": to_decimal(e.tail_beta),
                        "tail_euler": to_decimal(e.tail_euler),
                        "K_s": to_decimal(e.K),
                        "quadrature_nodes": e.norm_nodes,
                    }
                    for key, e in ends.items()
                },
                verdict=verdict,
                widenings=widening,
            )
            log.info(
                "width %s: D_P(s-)=%.3e D_P(s+)=%.3e tail=%.3e verdict=%s",
                width, float(lo.D_P), float(hi.D_P), float(max(lo.tail, hi.tail)), verdict,
            )
            if verdict:
                return cert
        raise CertificationError(
            f"sign test failed after {max_widenings} widenings: tail bound "
            f"{to_decimal(max(lo.tail, hi.tail), 6)} vs |D_P| = "
            f"{to_decimal(abs(lo.D_P), 6)}, {to_decimal(abs(hi.D_P), 6)}; raise P",
            cert,
        )


def stable_lower_endpoint(
    digit_set: DigitSet,
    digits: int,
    ctx: PrecisionContext,
    *,
    start: int = 8,
    step: int = 2,
    max_period: int = 26,
    cache_dir: str | Path | None = None,
) -> tuple[str, int]:
    """Lower endpoint at ``digits`` decimals from estimates that have settled.

    s_P is computed for P = start, start + step, ...  With gaps
    g_P = |s_P - s_(P-step)| shrinking at least geometrically, the error of
    s_P is predicted as g_P^2 / g_(P-step).  The search stops once that
    prediction is below 10^-(digits+3) and moving s_P by it does not change
    the truncated endpoint.  Returns the endpoint (``digits + 1`` decimals,
    as in :func:`certify_dimension`) and the period used.  This is a
    convergence heuristic, not a proof.
    """
    with ctx.local():
        threshold = mpfr(10) ** (-(digits + 3))
        prev = gap = None
        for P in range(start, max_period + 1, step):
            table = orbit_table(digit_set, P, ctx, cache_dir)
            s_est = estimate_dimension(digit_set, P, ctx, table=table)
            s_lo, _ = truncate_endpoints(s_est, digits + 1)
            log.info("P=%d: s_minus=%s", P, s_lo)
            if prev is not None:
                new_gap = abs(s_est - prev)
                if gap is not None and gap > 0:
                    err = new_gap * new_gap / gap
                    if err < threshold and all(
                        truncate_endpoints(x, digits + 1)[0] == s_lo
                        for x in (s_est - err, s_est + err)
                    ):
                        return s_lo, P
                gap = new_gap
            prev = s_est
    raise CertificationError(f"estimates did not settle to {digits} digits by P={max_period}")
