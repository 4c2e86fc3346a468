"""Continued fractions, convergents and the Liouville exponent of a frequency.

Convergents use Python integers.  The frequency itself is carried as an
mpmath float at a configurable bit precision (1024 by default).  Frequencies
built from very fast growing quotient rules leave the range of exact integers
after a few levels; for those the denominators continue in log form
(``CFExpansion.log_denominators``), which is all the exponent estimate needs.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError, Overflow, PrecisionExhausted

DEFAULT_PREC = 1024
DEFAULT_CAP_BITS = 1 << 16
# exp(ln q) stays accurate at 256-bit working precision below this
LOG_DOMAIN_CAP = mpmath.mpf(2) ** 180


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients a_1..a_N of alpha in (0,1) with convergents (p_n, q_n), n = 0..N."""
    quotients: tuple
    convergents: tuple
    source: str
    value: object = None
    prec: int = DEFAULT_PREC
    rational: bool = False
    truncated: bool = False
    log_denominators: tuple = ()
    final_level: float = None

    @property
    def depth(self):
        return len(self.quotients)

    @property
    def denominators(self):
        return [q for _, q in self.convergents]


@dataclass(frozen=True)
class BetaEstimate:
    levels: tuple
    running_sup_tail: tuple
    verdict_at_depth: float


def golden(prec=DEFAULT_PREC):
    """(sqrt 5 - 1)/2 at ``prec`` bits."""
    with mpmath.workprec(prec):
        return (mpmath.sqrt(5) - 1) / 2


def sqrt2m1(prec=DEFAULT_PREC):
    with mpmath.workprec(prec):
        return mpmath.sqrt(2) - 1


def _extend(convergents, a):
    (p1, q1), (p0, q0) = convergents[-1], (convergents[-2] if len(convergents) > 1 else (1, 0))
    convergents.append((a * p1 + p0, a * q1 + q0))


def cf_expand(x, depth, prec=DEFAULT_PREC, strict=True):
    """Continued-fraction expansion of x in (0,1) to ``depth`` quotients.

    ``x`` may be a Fraction (exact arithmetic), an mpf, a float or a decimal
    string (parsed at ``prec`` bits).  A rational input terminates with
    ``rational=True``.  Precision is declared exhausted when the remainder
    drops below 2^(1-prec) or when q_n^2 has eaten all but 32 bits of the
    working precision (the remainder error grows like q_n^2 2^-prec).
    With ``strict=False`` that case returns a ``truncated`` expansion instead
    of raising.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if isinstance(x, Fraction):
        return _cf_expand_exact(x, depth)
    with mpmath.workprec(prec):
        x = mpmath.mpf(x)
        if not 0 < x < 1:
            raise DomainError(f"x must lie in (0,1), got {mpmath.nstr(x, 15)}")
        tiny = mpmath.mpf(2) ** (1 - prec)
        quotients, convergents = [], [(0, 1)]
        r = x
        rational = False
        for _ in range(depth):
            if r == 0:
                rational = True
                break
            if r < tiny or 2 * convergents[-1][1].bit_length() > prec - 32:
                partial = CFExpansion(tuple(quotients), tuple(convergents), "real", x, prec,
                                      truncated=True)
                if strict:
                    raise PrecisionExhausted(
                        f"precision exhausted after {len(quotients)} quotients", partial)
                return partial
            y = 1 / r
            a = int(mpmath.floor(y))
            r = y - a
            quotients.append(a)
            _extend(convergents, a)
        if r == 0:
            rational = True
    return CFExpansion(tuple(quotients), tuple(convergents), "real", x, prec, rational=rational)


def _cf_expand_exact(x, depth):
    if not 0 < x < 1:
        raise DomainError(f"x must lie in (0,1), got {x}")
    quotients, convergents = [], [(0, 1)]
    r = x
    for _ in range(depth):
        if r == 0:
            break
        y = 1 / r
        a = y.numerator // y.denominator
        r = y - a
        quotients.append(a)
        _extend(convergents, a)
    return CFExpansion(tuple(quotients), tuple(convergents), "fraction", x, 0, rational=(r == 0))


class QuotientRule:
    """Generator of a_{n+1} from the convergents up to level n.

    ``log_next`` gives ln a_{n+1} from ln q_n and is only needed once the
    denominators leave the exact integer range.
    """
    name = "rule"

    def next(self, n, convergents, cap_bits):
        raise NotImplementedError

    def log_next(self, n, log_q):
        raise NotImplementedError(f"{self.name} has no log-domain continuation")

    def log_level(self, n, log_q):
        """ln q_{n+1} / q_n when ln q_n itself is past the log-domain cap."""
        raise Overflow(f"{self.name} has no closed-form level past the log-domain cap")


class ConstantRule(QuotientRule):
    def __init__(self, a):
        if int(a) != a or a < 1:
            raise DomainError("constant quotient must be a positive integer")
        self.a = int(a)
        self.name = f"const:{self.a}"

    def next(self, n, convergents, cap_bits):
        return self.a

    def log_next(self, n, log_q):
        return mpmath.log(self.a)


class SequenceRule(QuotientRule):
    def __init__(self, seq):
        self.seq = [int(a) for a in seq]
        if any(a < 1 for a in self.seq):
            raise DomainError("quotients must be positive integers")
        self.name = "seq:" + ",".join(map(str, self.seq))

    def next(self, n, convergents, cap_bits):
        if n >= len(self.seq):
            raise DomainError(f"sequence rule has only {len(self.seq)} quotients")
        return self.seq[n]


class ExpRule(QuotientRule):
    """a_{n+1} = ceil(exp(rate * q_n)); gives beta(alpha) = rate."""

    def __init__(self, rate=1.0):
        self.rate = mpmath.mpf(rate)
        if self.rate <= 0:
            raise DomainError("rate must be positive")
        self.name = f"exp:{rate}"

    def next(self, n, convergents, cap_bits):
        q = convergents[-1][1]
        bits = int(self.rate * q / mpmath.log(2)) + 2
        if bits > cap_bits:
            raise Overflow(f"a_{n + 1} needs ~{bits} bits, cap is {cap_bits}")
        with mpmath.workprec(bits + 64):
            return int(mpmath.ceil(mpmath.exp(self.rate * q)))

    def log_next(self, n, log_q):
        # ln ceil(e^x) = x up to e^-x, far below working precision here
        return self.rate * mpmath.exp(log_q)

    def log_level(self, n, log_q):
        # rate + ln(q_n)/q_n; the second term is below 2^-(2^59) once ln q_n > 2^60
        x = mpmath.mpf(log_q)
        return float(self.rate + (x * mpmath.exp(-x) if x < 2 ** 60 else 0))


def parse_rule(spec):
    """'const:1', 'seq:1,2,2' or 'exp:1.0'."""
    kind, _, arg = spec.partition(":")
    if kind == "const":
        return ConstantRule(int(arg))
    if kind == "seq":
        return SequenceRule(int(a) for a in arg.split(","))
    if kind == "exp":
        return ExpRule(float(arg) if arg else 1.0)
    raise DomainError(f"unknown quotient rule {spec!r}")


def alpha_from_quotients(rule, depth, prec=DEFAULT_PREC, cap_bits=DEFAULT_CAP_BITS,
                         log_domain=False):
    """Build a frequency from a quotient rule.

    Returns ``(cf, value)`` where ``value`` is the deepest exact convergent at
    extended precision.  Raises Overflow once q_n needs more than ``cap_bits``
    bits, unless ``log_domain`` is set, in which case the remaining levels are
    carried as ln q_n (only rules with ``log_next`` support this).
    """
    if isinstance(rule, str):
        rule = parse_rule(rule)
    if depth < 1:
        raise DomainError("depth must be >= 1")
    quotients, convergents = [], [(0, 1)]
    log_qs = []
    final = None
    for n in range(depth):
        if not log_qs:
            try:
                a = rule.next(n, convergents, cap_bits)
                if a < 1:
                    raise DomainError(f"rule produced non-positive quotient {a}")
                p0, q0 = convergents[-2] if len(convergents) > 1 else (1, 0)
                p1, q1 = convergents[-1]
                if (a * q1 + q0).bit_length() > cap_bits:
                    raise Overflow(f"q_{n + 1} exceeds {cap_bits} bits")
            except Overflow:
                if not log_domain or n == 0:
                    raise
                with mpmath.workprec(256):
                    log_qs = [mpmath.log(convergents[-2][1]), mpmath.log(convergents[-1][1])]
            else:
                quotients.append(a)
                convergents.append((a * p1 + p0, a * q1 + q0))
                continue
        with mpmath.workprec(256):
            if log_qs[-1] > LOG_DOMAIN_CAP:
                # ln q_{n+1} is out of reach, but the last level may still have a closed form
                if n == depth - 1:
                    final = rule.log_level(n, log_qs[-1])
                    break
                raise Overflow(f"log-domain denominator budget exhausted at level {n}")
            log_a = rule.log_next(n, log_qs[-1])
            # ln q_{n+1} = ln a + ln q_n + ln(1 + q_{n-1}/(a q_n))
            gap = log_qs[-2] - log_a - log_qs[-1]
            corr = mpmath.log1p(mpmath.exp(gap)) if gap > -1000 else 0
            log_qs.append(log_a + log_qs[-1] + corr)
    p, q = convergents[-1]
    vprec = max(prec, 2 * q.bit_length() + 64)
    with mpmath.workprec(vprec):
        value = mpmath.mpf(p) / q
    cf = CFExpansion(tuple(quotients), tuple(convergents), "rule:" + rule.name, value, vprec,
                     log_denominators=tuple(log_qs[2:]), final_level=final)
    return cf, value


def beta_estimate(cf):
    """Levels ln q_{n+1}/q_n, their running tail sup and the depth verdict.

    The verdict is the sup over the last ceil(N/2) levels, a finite-depth
    stand-in for the limsup.
    """
    if cf.rational:
        raise DomainError("beta(alpha) is undefined for a rational expansion")
    qs = cf.denominators
    if len(qs) < 2:
        raise DomainError("need at least two convergents")
    levels = []
    with mpmath.workprec(256):
        for n in range(len(qs) - 1):
            levels.append((n, float(mpmath.log(qs[n + 1]) / qs[n])))
        logs = [mpmath.log(qs[-1])] + list(cf.log_denominators)
        for i in range(1, len(logs)):
            n = len(qs) - 2 + i
            levels.append((n, float(logs[i] / mpmath.exp(logs[i - 1]))))
    if cf.final_level is not None:
        levels.append((levels[-1][0] + 1, float(cf.final_level)))
    vals = [v for _, v in levels]
    tail = vals[:]
    for i in range(len(tail) - 2, -1, -1):
        tail[i] = max(tail[i], tail[i + 1])
    k = math.ceil(len(vals) / 2)
    return BetaEstimate(tuple(levels), tuple(tail), max(vals[-k:]))


def rotation_distance(k, alpha):
    """Distance from k*alpha to the nearest integer.

    Exact for Fraction and float input (floats are expanded to their binary
    value); mpf input is evaluated at its own precision plus the bits of k.
    """
    k = int(k)
    if k == 0:
        raise DomainError("rotation distance needs k != 0")
    if isinstance(alpha, (Fraction, int)):
        x = k * Fraction(alpha)
        return abs(x - round(x))
    if isinstance(alpha, float):
        x = k * Fraction(alpha)
        return float(abs(x - round(x)))
    alpha = mpmath.mpf(alpha)
    bits = max(alpha._mpf_[3], 53)
    with mpmath.workprec(bits + k.bit_length() + 64):
        x = k * alpha
        return abs(x - mpmath.nint(x))
