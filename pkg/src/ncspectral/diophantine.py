"""Diophantine classification of deformation parameters.

Continued fractions with exact big-integer convergents, approximability scans
against power-law bounds, construction of numbers with prescribed
approximation quality, and an empirical irrationality-exponent diagnostic.
High-precision inputs go through mpmath (configurable digits, default 150);
certificates and convergent identities are checked in exact rational
arithmetic because the phenomena of interest are invisible in binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

__all__ = [
    "ContinuedFraction",
    "ApproximabilityReport",
    "MatrixClassification",
    "ApproximationProfile",
    "JarnikCertificate",
    "JarnikResult",
    "ExponentEstimate",
    "cf_expand",
    "bv_search",
    "classify_matrix",
    "jarnik_construct",
    "irrationality_exponent_estimate",
    "power_profile",
    "exp_profile",
    "power_log_profile",
    "golden_ratio",
    "liouville_fraction",
]

DEFAULT_DPS = 150


def _mpf_fraction(x) -> Fraction:
    """Exact rational value of an mpmath float.

    An existing mpf is read out directly; re-wrapping would round it to the
    current working precision and quietly destroy high-precision inputs.
    """
    sign, man, exp, _ = (x if isinstance(x, mpmath.mpf) else mpmath.mpf(x))._mpf_
    if man == 0:
        return Fraction(0)
    val = Fraction(man)
    val = val * (Fraction(2) ** exp)
    return -val if sign else val


def _to_fraction_interval(x, dps: int) -> tuple[Fraction, Fraction]:
    """Bracket the input in an exact rational interval.

    Exact inputs (int, Fraction) get a degenerate interval; floats and mpmath
    values get a two-sided slack of a few ulps at the working precision.
    """
    if isinstance(x, Fraction):
        return x, x
    if isinstance(x, int):
        return Fraction(x), Fraction(x)
    if isinstance(x, str):
        with mpmath.workdps(dps):
            v = _mpf_fraction(mpmath.mpf(x))
        slack = Fraction(1, 10 ** (dps - 2))
        return v - slack, v + slack
    if isinstance(x, float):
        v = Fraction(x)
        slack = Fraction(1, 2 ** 48)
        return v - slack, v + slack
    # mpmath value: trust all but a few guard digits at the stated precision
    v = _mpf_fraction(x)
    slack = (abs(v) + 1) * Fraction(1, 10 ** (max(dps, 15) - 3))
    return v - slack, v + slack


@dataclass
class ContinuedFraction:
    """Partial quotients and exact convergents p_k / q_k."""

    quotients: list[int]
    convergents: list[tuple[int, int]]
    exact: bool = False        # True when the input was rational and fully expanded
    trusted_depth: int | None = None

    def check_invariants(self) -> None:
        p_prev, q_prev = 1, 0
        p_prev2, q_prev2 = self.quotients[0], 1
        if self.convergents[0] != (p_prev2, q_prev2):
            raise AssertionError("first convergent mismatch")
        for k in range(1, len(self.quotients)):
            a = self.quotients[k]
            p = a * p_prev2 + p_prev
            qd = a * q_prev2 + q_prev
            if self.convergents[k] != (p, qd):
                raise AssertionError(f"convergent recurrence fails at depth {k}")
            det = p * q_prev2 - p_prev2 * qd
            if det != (-1) ** (k - 1):
                raise AssertionError(f"determinant identity fails at depth {k}")
            p_prev, q_prev = p_prev2, q_prev2
            p_prev2, q_prev2 = p, qd

    def value_bounds(self) -> tuple[Fraction, Fraction]:
        """Exact rational bracket of the represented number.

        Consecutive convergents alternate around the value, so the last two
        bracket it; a fully expanded rational gives a degenerate bracket.
        """
        if len(self.convergents) == 1 or self.exact:
            p, q = self.convergents[-1]
            v = Fraction(p, q)
            return v, v
        a = Fraction(*self.convergents[-1])
        b = Fraction(*self.convergents[-2])
        return (a, b) if a <= b else (b, a)

    def value(self) -> float:
        lo, hi = self.value_bounds()
        return float((lo + hi) / 2)


def cf_expand(x, depth: int, dps: int = DEFAULT_DPS) -> ContinuedFraction:
    """Continued fraction of x to the requested depth.

    The expansion runs on an exact rational interval around the input; it
    stops early (recording the trustworthy depth) once the interval no longer
    determines the next quotient, so no quotient is ever guessed.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    lo, hi = _to_fraction_interval(x, dps)
    quotients: list[int] = []
    convergents: list[tuple[int, int]] = []
    p_prev, q_prev = 1, 0
    p, q = None, None
    exact = False
    for k in range(depth):
        flo = math.floor(lo)
        fhi = math.floor(hi)
        if flo != fhi:
            break  # precision exhausted
        a = int(flo)
        if k > 0 and a < 1:
            break
        quotients.append(a)
        if p is None:
            p, q = a, 1
        else:
            p, q, p_prev, q_prev = a * p + p_prev, a * q + q_prev, p, q
        convergents.append((p, q))
        rlo = lo - a
        rhi = hi - a
        if rlo == 0 and rhi == 0:
            exact = True
            break
        if rlo == 0:
            break  # interval touches the integer; next quotient undetermined
        lo, hi = 1 / rhi, 1 / rlo
    if not quotients:
        raise ValueError("could not determine even the integer part at this precision")
    cf = ContinuedFraction(quotients=quotients, convergents=convergents,
                           exact=exact, trusted_depth=len(quotients))
    cf.check_invariants()
    return cf


@dataclass(frozen=True)
class ApproximabilityReport:
    """Scan result for |q.a - m| >= c |q|^{-delta}.

    The verdict is one-sided: absence of violations up to the scanned height
    is never a proof of membership.  Lattice vectors whose support misses the
    support of the target probe nothing and are skipped (counted).
    """

    target: tuple
    delta: float
    c: float
    qmax: int
    witnesses: tuple[tuple, ...]       # (q, m, distance, bound) violating the inequality
    skipped_degenerate: int
    exhaustive: bool
    verdict: str                       # "no-violation-up-to-Q" | "violations-found"


def _target_mpf(a, dps: int) -> list:
    out = []
    with mpmath.workdps(dps):
        for x in a:
            if isinstance(x, Fraction):
                out.append(mpmath.mpf(x.numerator) / x.denominator)
            elif isinstance(x, (int, mpmath.mpf)):
                out.append(mpmath.mpf(x))
            else:
                out.append(mpmath.mpf(str(x)))
    return out


def bv_search(a: Sequence, delta: float, c: float, qmax: int,
              dps: int = DEFAULT_DPS, sample_budget: int = 200_000,
              seed: int = 11) -> ApproximabilityReport:
    """Scan integer vectors q for near-integer values of q.a.

    Exhaustive over 0 < |q|_inf <= qmax in dimensions 1 and 2 (one vector per
    +-q pair); in higher dimensions a seeded random sample plus
    convergent-guided heights of the individual coordinates is scanned
    instead, so the absence verdict is doubly one-sided there.  A cheap float
    screen selects near hits, which are then re-checked at full precision.
    """
    if qmax < 1:
        raise ValueError("qmax must be >= 1")
    a = list(a)
    n = len(a)
    vals = _target_mpf(a, dps)
    support = [j for j, v in enumerate(vals) if v != 0]
    a_float = np.array([float(v) for v in vals])

    def blocks():
        if n == 1:
            step = 2_000_000
            for lo in range(1, qmax + 1, step):
                yield np.arange(lo, min(lo + step, qmax + 1), dtype=np.int64).reshape(-1, 1)
        elif n == 2:
            side = np.arange(-qmax, qmax + 1, dtype=np.int64)
            chunk = max(1, 2_000_000 // (2 * qmax + 1))
            for lo in range(0, side.size, chunk):
                q1 = side[lo:lo + chunk]
                block = np.stack(np.meshgrid(q1, side, indexing="ij"), axis=-1).reshape(-1, 2)
                keep = (block[:, 0] > 0) | ((block[:, 0] == 0) & (block[:, 1] > 0))
                yield block[keep]
        else:
            rng = np.random.default_rng(seed)
            block = rng.integers(-qmax, qmax + 1, size=(sample_budget, n)).astype(np.int64)
            extra = []
            for j in support:
                cf = cf_expand(vals[j], 25, dps=dps)
                for _, qd in cf.convergents:
                    if qd <= qmax:
                        vec = [0] * n
                        vec[j] = qd
                        extra.append(vec)
            if extra:
                block = np.vstack([block, np.array(extra, dtype=np.int64)])
            block = np.unique(block, axis=0)
            yield block[np.any(block != 0, axis=1)]

    witnesses = []
    skipped = 0
    for block in blocks():
        if support:
            overlap = np.any(block[:, support] != 0, axis=1)
        else:
            overlap = np.zeros(block.shape[0], dtype=bool)
        skipped += int(np.count_nonzero(~overlap))
        block = block[overlap]
        if block.shape[0] == 0:
            continue
        qn = np.max(np.abs(block), axis=1).astype(float)
        bound = c * qn ** (-delta)
        approx = block.astype(float) @ a_float
        dist_f = np.abs(approx - np.round(approx))
        cand = np.nonzero(dist_f <= bound * (1.0 + 1e-6)
                          + 1e-9 * np.maximum(1.0, np.abs(approx)))[0]
        with mpmath.workdps(dps):
            for idx in cand:
                qvec = tuple(int(x) for x in block[idx])
                exact_val = mpmath.fsum(qi * vi for qi, vi in zip(qvec, vals) if qi)
                mm = int(mpmath.nint(exact_val))
                dist = abs(exact_val - mm)
                if dist < bound[idx]:
                    witnesses.append((qvec, mm, float(dist), float(bound[idx])))
    witnesses.sort()
    exhaustive = n <= 2
    verdict = "violations-found" if witnesses else "no-violation-up-to-Q"
    return ApproximabilityReport(target=tuple(float(v) for v in a_float), delta=float(delta),
                                 c=float(c), qmax=int(qmax), witnesses=tuple(witnesses),
                                 skipped_degenerate=skipped, exhaustive=exhaustive,
                                 verdict=verdict)


@dataclass(frozen=True)
class MatrixClassification:
    verdict: str                       # "certified-up-to-Q" | "no-certificate-found"
    u: tuple[int, ...] | None
    report: ApproximabilityReport | None
    attempts: int


def classify_matrix(theta, delta: float, c: float, qmax: int, u_bound: int = 3,
                    dps: int = DEFAULT_DPS) -> MatrixClassification:
    """Search lattice vectors u for a badly-approximable image of the transpose.

    A matrix qualifies when some integer u makes the transpose image vector
    pass the scan; only u with |u|_inf <= u_bound are tried and the verdict is
    necessarily one-sided (violations disprove a candidate, absence up to the
    height proves nothing).
    """
    mat = np.array(getattr(theta, "theta", theta), dtype=float)
    n = mat.shape[0]
    attempts = 0
    us = [u for u in np.ndindex(*(2 * u_bound + 1,) * n)]
    for idx in us:
        u = tuple(int(x) - u_bound for x in idx)
        if not any(u) or next(x for x in u if x) < 0:
            continue  # skip zero and mirror duplicates
        vec = mat.T @ np.array(u, dtype=float)
        if not np.any(vec):
            continue
        attempts += 1
        rep = bv_search(list(vec), delta, c, qmax, dps=dps)
        if rep.verdict == "no-violation-up-to-Q":
            return MatrixClassification("certified-up-to-Q", u, rep, attempts)
    return MatrixClassification("no-certificate-found", None, None, attempts)


@dataclass(frozen=True)
class ApproximationProfile:
    """Decreasing approximation target f(q), from a named preset."""

    kind: str
    alpha: float = 0.0
    fn: Callable[[int], mpmath.mpf] = field(repr=False, default=None)  # type: ignore

    def __call__(self, q: int) -> mpmath.mpf:
        return self.fn(q)

    def lower_bound_fraction(self, q: int, dps: int = 80) -> Fraction:
        """Rational lower bound of f(q), exact for integer power laws.

        For transcendental profiles the bound is the dps-digit value shrunk
        by a few ulps, so the caller must scale dps to the margin it needs.
        """
        if self.kind == "power" and float(self.alpha).is_integer():
            return Fraction(1, q ** int(self.alpha))
        with mpmath.workdps(dps):
            v = _mpf_fraction(self.fn(q))
        return v * (1 - Fraction(1, 10 ** (dps - 15)))

    def check_admissible(self, upto: int = 64) -> None:
        """x^2 f(x) must be non-increasing, sampled on 2..upto.

        Sampling starts at 2 so the exponential preset qualifies: its x^2 f(x)
        has a bump inside the first unit interval but decreases from 2 on.
        """
        with mpmath.workdps(40):
            prev = None
            for q in range(2, upto + 1):
                cur = (mpmath.mpf(q) ** 2) * self.fn(q)
                if prev is not None and cur > prev * (1 + mpmath.mpf("1e-30")):
                    raise ValueError(f"profile violates monotonicity of x^2 f(x) at x={q}")
                prev = cur


def power_profile(alpha: float) -> ApproximationProfile:
    if alpha < 2:
        raise ValueError("power profile needs alpha >= 2 for x^2 f(x) non-increasing")
    return ApproximationProfile("power", alpha, lambda q: mpmath.mpf(q) ** (-alpha))


def exp_profile() -> ApproximationProfile:
    return ApproximationProfile("exp", 0.0, lambda q: mpmath.e ** (-q))


def power_log_profile(beta: float) -> ApproximationProfile:
    if beta <= 0:
        raise ValueError("power-log profile needs beta > 0")
    return ApproximationProfile(
        "power-log", beta,
        lambda q: 1 / (mpmath.mpf(q) ** 2 * (1 + mpmath.log(q)) ** beta))


@dataclass(frozen=True)
class JarnikCertificate:
    depth: int
    q: int
    gap_bound: Fraction      # exact upper bound on |theta - p_k/q_k|
    target: Fraction         # rational lower bound on f(q_k)
    ok: bool


@dataclass(frozen=True)
class JarnikResult:
    cf: ContinuedFraction
    certificates: tuple[JarnikCertificate, ...]
    value: float


def jarnik_construct(profile: ApproximationProfile, depth: int,
                     a0: int = 0) -> JarnikResult:
    """Build a number whose convergents beat f at every recorded depth.

    Partial quotients are chosen as ceil(1/(q_k^2 f(q_k))) so that the gap to
    the k-th convergent, bounded exactly by 1/(q_k q_{k+1}), stays below
    f(q_k).  Certificates are exact rational comparisons.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    profile.check_admissible()
    quotients = [a0]
    p_prev, q_prev = 1, 0
    p, q = a0, 1
    convergents = [(p, q)]
    step_dps = []
    for step in range(depth):
        qk = convergents[-1][1]
        try:
            # precision must cover the full integer part of 1/(q^2 f(q)); the
            # certificate margin is one unit of that quantity
            with mpmath.workdps(30):
                mag = mpmath.log10(1 / (mpmath.mpf(qk) ** 2 * profile(qk)))
                digits = int(mag) + 1 if mpmath.isfinite(mag) and mag > 0 else 1
            dps = max(80, digits + 40)
            with mpmath.workdps(dps):
                target = 1 / (mpmath.mpf(qk) ** 2 * profile(qk))
                a_next = int(mpmath.floor(target)) + 1
        except (OverflowError, MemoryError):
            raise ValueError(
                f"partial quotient at depth {step + 1} is not representable; "
                "the profile decays too fast for this depth") from None
        a_next = max(a_next, 1)
        step_dps.append(dps)
        quotients.append(a_next)
        p, q, p_prev, q_prev = a_next * p + p_prev, a_next * q + q_prev, p, q
        convergents.append((p, q))
    cf = ContinuedFraction(quotients=quotients, convergents=convergents,
                           exact=False, trusted_depth=len(quotients))
    cf.check_invariants()
    certs = []
    for k in range(len(convergents) - 1):
        qk = convergents[k][1]
        qk1 = convergents[k + 1][1]
        gap = Fraction(1, qk * qk1)
        target = profile.lower_bound_fraction(qk, dps=step_dps[k])
        certs.append(JarnikCertificate(depth=k, q=qk, gap_bound=gap,
                                       target=target, ok=gap < target))
    return JarnikResult(cf=cf, certificates=tuple(certs), value=cf.value())


@dataclass(frozen=True)
class ExponentEstimate:
    estimate: float | None
    depth: int
    divergent: bool


def irrationality_exponent_estimate(cf: ContinuedFraction) -> ExponentEstimate:
    """Empirical exponent sup_k (log a_{k+1} / log q_k) + 2 over the observed depth.

    Depths with q_k below a small threshold are excluded from the sup (the
    ratio is meaningless at seed denominators); a terminated (rational)
    expansion reports the divergent flag instead of a number.
    """
    if len(cf.quotients) < 3:
        raise ValueError("need at least 3 quotients")
    if cf.exact:
        return ExponentEstimate(estimate=None, depth=len(cf.quotients), divergent=True)
    ratios = []
    for k in range(1, len(cf.quotients) - 1):
        qk = cf.convergents[k][1]
        if qk >= 16:
            ratios.append(math.log(cf.quotients[k + 1]) / math.log(qk))
    if not ratios:
        ratios = [math.log(cf.quotients[k + 1]) / math.log(cf.convergents[k][1])
                  for k in range(1, len(cf.quotients) - 1) if cf.convergents[k][1] > 1]
    best = max(ratios, default=0.0)
    return ExponentEstimate(estimate=2.0 + best, depth=len(cf.quotients), divergent=False)


def golden_ratio(dps: int = DEFAULT_DPS):
    """(1 + sqrt 5)/2 at the requested precision."""
    with mpmath.workdps(dps):
        return (1 + mpmath.sqrt(5)) / 2


def liouville_fraction(terms: int = 6, base: int = 10) -> Fraction:
    """Exact partial sum of the classical ultra-approximable series sum base^{-j!}."""
    return sum((Fraction(1, base ** math.factorial(j)) for j in range(1, terms + 1)),
               Fraction(0))
