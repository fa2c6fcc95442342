"""Primitive periodic orbits of the Gauss map on E_A and the traces they give.

Every primitive orbit of period d is represented by its Lyndon word (the
strictly smallest rotation).  The multiplier of an orbit depends only on the
trace of its word matrix and on the parity of d, so the table stores, per
period, the distinct traces with multiplicities.  Everything that does not
depend on s is precomputed; a trace evaluation then costs one exponential
per distinct (period, trace) class.
"""

from __future__ import annotations

import gzip
import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import gmpy2
from gmpy2 import mpfr

from .mobius import (
    DigitSet,
    check_word,
    log_multiplier_from_trace,
    orbit_multiplier,
    word_matrix,
)
from .numerics import PrecisionContext

log = logging.getLogger(__name__)

DEFAULT_RECORD_CAP = 10**8
NAIVE_WORD_CAP = 10**6
CACHE_SCHEMA = "cfdim.orbit-table.v1"


class ResourceCapError(RuntimeError):
    pass


def mobius_mu(n: int) -> int:
    result, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def lyndon_count(alphabet_size: int, length: int) -> int:
    """Number of Lyndon words of the given length (necklace formula)."""
    total = sum(
        mobius_mu(length // e) * alphabet_size**e
        for e in range(1, length + 1)
        if length % e == 0
    )
    return total // length


def _duval(k: int, n: int) -> Iterator[list[int]]:
    # Letters are indices 0..k-1.  The yielded list is mutated afterwards.
    w = [0]
    while w:
        yield w
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
        if w:
            w[-1] += 1


def lyndon_words(digit_set: DigitSet, max_len: int) -> Iterator[tuple[int, ...]]:
    """All Lyndon words over A of length <= max_len, in lexicographic order."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    letters = digit_set.digits
    for w in _duval(len(letters), max_len):
        yield tuple(letters[j] for j in w)


def _lyndon_traces(letters: Sequence[int], n: int) -> Iterator[tuple[list[int], int]]:
    """Duval enumeration that also carries the trace of each word matrix.

    Prefix products are cached so a step only multiplies the letters that
    changed since the previous word.
    """
    k = len(letters)
    pa = [1] * (n + 1)
    pb = [0] * (n + 1)
    pc = [0] * (n + 1)
    pd = [1] * (n + 1)
    w = [0]
    valid = 0
    while w:
        for j in range(valid, len(w)):
            i = letters[w[j]]
            a, b, c, d = pa[j], pb[j], pc[j], pd[j]
            pa[j + 1], pb[j + 1], pc[j + 1], pd[j + 1] = b, a + i * b, d, c + i * d
        L = len(w)
        yield w, pa[L] + pd[L]
        m = L
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
        if w:
            w[-1] += 1
        valid = min(m, len(w) - 1)


@dataclass(frozen=True)
class OrbitRecord:
    word: tuple[int, ...]
    period: int
    log_multiplier: mpfr


@dataclass
class OrbitTable:
    """Primitive periodic data for periods 1..max_period.

    ``classes[d]`` lists ``(trace, multiplicity)`` pairs in order of first
    appearance in the lexicographic enumeration; ``counts[d]`` is the number
    of Lyndon words of length d.  ``words`` is kept only when requested.
    """

    digit_set: DigitSet
    max_period: int
    ctx: PrecisionContext
    counts: dict[int, int]
    classes: dict[int, list[tuple[int, int]]]
    words: dict[int, list[tuple[int, ...]]] | None = None
    log_multipliers: dict[int, list[mpfr]] = field(init=False, repr=False)
    # _coefs[d][k-1][j] = mult * d / (1 - (-1)^(k d) Lambda_j^k)
    _coefs: dict[int, list[list[mpfr]]] = field(init=False, repr=False)

    def __post_init__(self):
        self.log_multipliers = {}
        self._coefs = {}
        P = self.max_period
        with self.ctx.local():
            for d in range(1, P + 1):
                logs = [
                    log_multiplier_from_trace(tr, d, self.ctx) for tr, _ in self.classes[d]
                ]
                self.log_multipliers[d] = logs
                kmax = P // d
                coefs = [[] for _ in range(kmax)]
                for (tr, mult), L in zip(self.classes[d], logs):
                    lam = gmpy2.exp(L)
                    p = lam
                    for k in range(1, kmax + 1):
                        sign = -1 if (k * d) % 2 else 1
                        coefs[k - 1].append(mult * d / (1 - sign * p))
                        p *= lam
                self._coefs[d] = coefs

    @property
    def record_count(self) -> int:
        return sum(self.counts.values())

    def records(self, period: int | None = None) -> Iterator[OrbitRecord]:
        if self.words is None:
            raise ValueError("orbit table was built without keeping words")
        periods = [period] if period else range(1, self.max_period + 1)
        for d in periods:
            index = {tr: j for j, (tr, _) in enumerate(self.classes[d])}
            for w in self.words[d]:
                L = self.log_multipliers[d][index[word_matrix(w).trace]]
                yield OrbitRecord(w, d, L)

    def trace(self, n: int, s) -> mpfr:
        """tr(L_s^n) from primitive orbits of period dividing n."""
        if not 1 <= n <= self.max_period:
            raise ValueError(f"n={n} outside 1..{self.max_period}")
        with self.ctx.local():
            s = mpfr(s)
            total = mpfr(0)
            for d in range(1, n + 1):
                if n % d:
                    continue
                k = n // d
                x = s * k
                for coef, L in zip(self._coefs[d][k - 1], self.log_multipliers[d]):
                    total += coef * gmpy2.exp(x * L)
            return total

    def traces(self, s, upto: int | None = None) -> list[mpfr]:
        """[tr(L_s^1), ..., tr(L_s^upto)] in one pass over the classes."""
        P = self.max_period if upto is None else upto
        if not 1 <= P <= self.max_period:
            raise ValueError(f"upto={P} outside 1..{self.max_period}")
        with self.ctx.local():
            s = mpfr(s)
            t = [mpfr(0)] * (P + 1)
            for d in range(1, P + 1):
                kmax = P // d
                coefs = self._coefs[d]
                if kmax == 1:
                    acc = mpfr(0)
                    for coef, L in zip(coefs[0], self.log_multipliers[d]):
                        acc += coef * gmpy2.exp(s * L)
                    t[d] += acc
                    continue
                for j, L in enumerate(self.log_multipliers[d]):
                    u = gmpy2.exp(s * L)
                    p = u
                    for k in range(1, kmax + 1):
                        t[k * d] += coefs[k - 1][j] * p
                        p *= u
            return t[1:]

    def to_json(self) -> dict:
        return {
            "schema": CACHE_SCHEMA,
            "digits": list(self.digit_set.digits),
            "max_period": self.max_period,
            "working_digits": self.ctx.working_digits,
            "counts": {str(d): c for d, c in self.counts.items()},
            "classes": {str(d): [[tr, m] for tr, m in cl] for d, cl in self.classes.items()},
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, separators=(",", ":"))


def build_orbit_table(
    digit_set: DigitSet,
    max_period: int,
    ctx: PrecisionContext,
    *,
    keep_words: bool | None = None,
    record_cap: int = DEFAULT_RECORD_CAP,
) -> OrbitTable:
    """Enumerate every primitive periodic orbit of period <= max_period."""
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    expected = sum(lyndon_count(len(digit_set), d) for d in range(1, max_period + 1))
    if expected > record_cap:
        raise ResourceCapError(
            f"period P={max_period} needs {expected} orbit records, above the cap {record_cap}"
        )
    if keep_words is None:
        keep_words = expected <= 200_000
    letters = digit_set.digits
    counts = {d: 0 for d in range(1, max_period + 1)}
    by_trace: dict[int, dict[int, int]] = {d: {} for d in counts}
    words = {d: [] for d in counts} if keep_words else None
    for w, tr in _lyndon_traces(letters, max_period):
        d = len(w)
        counts[d] += 1
        bucket = by_trace[d]
        bucket[tr] = bucket.get(tr, 0) + 1
        if words is not None:
            words[d].append(tuple(letters[j] for j in w))
    classes = {d: list(by_trace[d].items()) for d in counts}
    log.info(
        "enumerated %d orbits (%d trace classes) for A=%s, P=%d",
        sum(counts.values()),
        sum(len(c) for c in classes.values()),
        digit_set.label(),
        max_period,
    )
    return OrbitTable(digit_set, max_period, ctx, counts, classes, words)


def load_orbit_table(path: str | Path, ctx: PrecisionContext, max_period: int | None = None) -> OrbitTable:
    """Rebuild a table from a cache file; the stored data is exact integers."""
    with gzip.open(Path(path), "rt", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema") != CACHE_SCHEMA:
        raise ValueError(f"{path}: not an orbit-table cache")
    P = data["max_period"] if max_period is None else max_period
    if P > data["max_period"]:
        raise ValueError(f"{path} holds periods up to {data['max_period']}, need {P}")
    counts = {d: data["counts"][str(d)] for d in range(1, P + 1)}
    classes = {
        d: [(int(tr), int(m)) for tr, m in data["classes"][str(d)]] for d in range(1, P + 1)
    }
    return OrbitTable(DigitSet(data["digits"]), P, ctx, counts, classes)


def cache_path(cache_dir: str | Path, digit_set: DigitSet, max_period: int) -> Path:
    label = "-".join(map(str, digit_set.digits))
    return Path(cache_dir) / f"orbits_A{label}_P{max_period}.json.gz"


def orbit_table(
    digit_set: DigitSet,
    max_period: int,
    ctx: PrecisionContext,
    cache_dir: str | Path | None = None,
) -> OrbitTable:
    """Build the table, reusing a cached enumeration when one exists."""
    if cache_dir is None:
        return build_orbit_table(digit_set, max_period, ctx)
    path = cache_path(cache_dir, digit_set, max_period)
    if path.exists():
        log.info("orbit cache hit: %s", path)
        return load_orbit_table(path, ctx)
    table = build_orbit_table(digit_set, max_period, ctx)
    table.save(path)
    return table


def trace_naive(digit_set: DigitSet, n: int, s, ctx: PrecisionContext) -> mpfr:
    """Literal sum over all |A|^n words; a test oracle only."""
    if len(digit_set) ** n > NAIVE_WORD_CAP:
        raise ResourceCapError(f"|A|^n = {len(digit_set) ** n} words exceeds {NAIVE_WORD_CAP}")
    sign = -1 if n % 2 else 1
    with ctx.local():
        s = mpfr(s)
        total = mpfr(0)
        for w in itertools.product(digit_set.digits, repeat=n):
            check_word(w, digit_set)
            lam = orbit_multiplier(w, ctx)
            total += lam**s / (1 - sign * lam)
        return total
