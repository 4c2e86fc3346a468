"""Near-periodicity at scale q, lower bounds on q-blocks of prod |w_j|, and the
sine-product machinery used to certify such bounds for sampling functions
with finitely many power-type zeros.

Windows: the natural range |m| <= e^{delta beta q} is astronomically large for
interesting q, so every checker scans |m| <= min(e^{delta beta q}, cap) and
reports the range actually used as ``effective_window``.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import (DomainError, ExactZeroTerm, NoQualifyingDenominator,
                     PreconditionViolation, WindowTooSmall, ZeroInWindow)
from .lattice import TrigPolynomial, ZeroProduct
from .numberkit import CFExpansion, beta_estimate, cf_expand

DEFAULT_SITE_CAP = 1_000_000
THETA_TEST_RANGE = 100_000


@dataclass(frozen=True)
class PeriodicityParams:
    beta: float
    q: int
    delta: float = 0.5
    Lambda: float = None
    window_cap: int = None

    def __post_init__(self):
        if self.beta <= 0 or self.delta <= 0 or self.q < 1:
            raise DomainError("need beta > 0, delta > 0 and q >= 1")

    @property
    def natural_window(self):
        x = self.delta * self.beta * self.q
        return math.inf if x > 700 else math.exp(x)

    def effective_window(self):
        """Largest |m| scanned, and whether the cap replaced e^{delta beta q}."""
        cap = DEFAULT_SITE_CAP if self.window_cap is None else int(self.window_cap)
        nat = self.natural_window
        if nat <= cap:
            return int(math.floor(nat)), False
        return cap, True


@dataclass
class CheckResult:
    passed: bool
    worst_margin: float
    worst_index: int
    effective_window: int
    substituted: bool
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        d = {"pass": self.passed, "worst_margin": self.worst_margin,
             "worst_index": self.worst_index, "effective_window": self.effective_window,
             "window_substituted": self.substituted}
        d.update(self.extra)
        return d


def _values(seq, lo, hi, offset):
    """seq on the closed range [lo, hi]; ``seq`` is a callable or an array starting at ``offset``."""
    if callable(seq):
        return np.asarray(seq(np.arange(lo, hi + 1)))
    seq = np.asarray(seq)
    if offset is None:
        raise DomainError("array input needs the index of its first entry")
    a, b = lo - offset, hi - offset
    if a < 0 or b >= len(seq):
        raise WindowTooSmall(f"need indices [{lo}, {hi}], have [{offset}, {offset + len(seq) - 1}]")
    return seq[a:b + 1]


def model_sequence(model, which="w"):
    """Callable n -> w_n (or v_n) for use with the checkers."""
    def f(n):
        n = np.asarray(n)
        w, v = model.sample(int(n[0]), int(n[-1]) + 1)
        return w if which == "w" else v
    return f


def check_beta_almost_periodic(seq, params, offset=None):
    """max_{|m| <= M} |a_m - a_{m +- q}| against e^{-beta q}.

    worst_margin = ln(max diff) + beta q, pass iff <= 0; a constant sequence
    gives -inf.
    """
    M, sub = params.effective_window()
    q = params.q
    a = _values(seq, -M - q, M + q, offset)
    mid = a[q:q + 2 * M + 1]
    d = np.maximum(np.abs(mid - a[2 * q:]), np.abs(mid - a[:2 * M + 1]))
    i = int(np.argmax(d))
    dmax = float(d[i])
    margin = -math.inf if dmax == 0 else math.log(dmax) + params.beta * q
    return CheckResult(margin <= 0, margin, i - M, M, sub, {"max_diff": dmax})


def _min_partial_sums(cs, starts, q):
    """min over r in [1, q-1] of cs[s+r] - cs[s] for each s in ``starts``."""
    if q < 2:
        return np.full(len(starts), math.inf)
    best = np.full(len(starts), math.inf)
    for r in range(1, q):
        np.minimum(best, cs[starts + r] - cs[starts], out=best)
    return best


def check_lambda_beta_bound(w, params, offset=None):
    """min_{|m| <= M} ln prod_{j=m}^{m+q-1} |w_j| against -Lambda q.

    Also reports the induced bounds at 2 Lambda: partial blocks 1 <= r < q,
    single sites, and the ratio bound |w_{m+-q}/w_m - 1| < e^{-(beta - 2 Lambda) q}.
    The partial-block bounds follow from the full one only when
    sup |w| <= e^Lambda; that premise is reported as ``upper_premise``.
    """
    if params.Lambda is None:
        raise DomainError("Lambda is required")
    M, sub = params.effective_window()
    q, Lam = params.q, params.Lambda
    ww = _values(w, -M - q, M + q, offset)
    aw = np.abs(ww)
    zero = np.flatnonzero(aw == 0)
    if len(zero):
        raise ZeroInWindow(f"w vanishes at site {int(zero[0]) - M - q}", index=int(zero[0]) - M - q)
    lw = np.log(aw)
    cs = np.concatenate([[0.0], np.cumsum(lw)])
    starts = np.arange(2 * M + 1) + q          # position of m = -M in ww
    blocks = cs[starts + q] - cs[starts]
    i = int(np.argmin(blocks))
    bmin = float(blocks[i])
    passed = bmin > -Lam * q

    part = _min_partial_sums(cs, starts, q)
    site = lw[starts]
    mid = ww[starts]
    ratio = np.maximum(np.abs(ww[starts + q] / mid - 1), np.abs(ww[starts - q] / mid - 1))
    rb = math.exp(min(-(params.beta - 2 * Lam) * q, 700))
    extra = {
        "min_log_product": bmin,
        "bound": -Lam * q,
        "partial_min_log": float(part.min()),
        "partial_pass": bool(part.min() >= -2 * Lam * q),
        "site_min_log": float(site.min()),
        "site_pass": bool(site.min() >= -2 * Lam * q),
        "ratio_max": float(ratio.max()),
        "ratio_bound": rb,
        "ratio_pass": bool(ratio.max() < rb),
        "upper_premise": bool(aw.max() <= math.exp(Lam)),
    }
    return CheckResult(passed, bmin + Lam * q, i - M, M, sub, extra)


# ---- sine products ---------------------------------------------------------

def log_sine_terms(phases):
    """ln|2 sin pi x| for each phase."""
    x = np.asarray(phases, dtype=float)
    s = np.abs(np.sin(np.pi * x))
    # near 0, pi*x loses bits in the subnormal range; sin(pi x) = pi x to rounding there
    small = np.abs(x) < 1e-8
    with np.errstate(divide="ignore"):
        return np.where(small, math.log(2 * math.pi) + np.log(np.abs(x)), np.log(2 * s))


def log_sine_product(phases):
    """sum_j ln|2 sin pi x_j| (compensated summation)."""
    return math.fsum(log_sine_terms(phases))


def rational_phases(theta, p, q):
    """theta + jp/q for 0 <= j < q, reduced to [-1/2, 1/2) exactly.

    theta is taken as the exact rational value of the float, so each phase
    carries only the final rounding to double.
    """
    t = Fraction(theta)
    N, D = t.numerator, t.denominator
    den = D * q
    out = np.empty(q)
    for j in range(q):
        r = (N * q + ((j * p) % q) * D) % den
        if 2 * r >= den:
            r -= den
        out[j] = r / den
    return out


def rational_product_check(theta, p, q):
    """Both sides of prod_{j<q} 2|sin pi(theta + jp/q)| = 2|sin pi q theta| in log form.

    The left side goes through the product kernel; the right side is
    evaluated independently in 200-bit arithmetic.
    """
    if q < 1 or math.gcd(p, q) != 1:
        raise DomainError("need q >= 1 and gcd(p, q) = 1")
    lhs = log_sine_product(rational_phases(theta, p, q))
    with mpmath.workprec(200):
        rhs = float(mpmath.log(2 * abs(mpmath.sinpi(q * mpmath.mpf(theta)))))
    return lhs, rhs


def _is_denominator(alpha, q, depth=200):
    if isinstance(alpha, CFExpansion):
        return q in alpha.denominators
    try:
        cf = cf_expand(alpha, depth, strict=False)
    except DomainError:
        return False
    return q in cf.denominators


@dataclass(frozen=True)
class SineDeviation:
    sum_excl_min: float
    deviation: float
    j0: int
    C_eff: float


def sine_product_deviation(theta, alpha, q, check_denominator=True):
    """sum_{j != j0} ln|sin pi(theta + j alpha)| + (q-1) ln 2 over 0 <= j < q.

    j0 is the index of the smallest term.  C_eff = |deviation| / ln q.
    """
    q = int(q)
    if check_denominator and not _is_denominator(alpha, q):
        raise PreconditionViolation(f"q = {q} is not a continued-fraction denominator of alpha")
    a = float(alpha.value if isinstance(alpha, CFExpansion) else alpha)
    ph = np.mod(theta + np.arange(q) * a, 1.0)
    s = np.abs(np.sin(np.pi * ph))
    if np.any(s == 0):
        raise ExactZeroTerm(f"term j = {int(np.flatnonzero(s == 0)[0])} vanishes")
    j0 = int(np.argmin(s))
    terms = np.log(s)
    total = math.fsum(np.delete(terms, j0))
    dev = total + (q - 1) * math.log(2)
    ceff = abs(dev) / math.log(q) if q > 1 else 0.0
    return SineDeviation(total, dev, j0, ceff)


# ---- zero profiles and the certificate -------------------------------------

QUAD_NODES = 1 << 16


def _cluster(phases, tol=1e-5):
    """Merge nearby phases on the circle; returns (centre, multiplicity) pairs."""
    ph = sorted(p % 1.0 for p in phases)
    groups = []
    for p in ph:
        if groups and min(abs(p - groups[-1][-1]), 1 - abs(p - groups[-1][-1])) < tol:
            groups[-1].append(p)
        else:
            groups.append([p])
    if len(groups) > 1 and (groups[0][0] + 1 - groups[-1][-1]) < tol:
        groups[0] = [x - 1 for x in groups[-1]] + groups[0]
        groups.pop()
    return [((sum(g) / len(g)) % 1.0, len(g)) for g in groups]


@dataclass
class ProductZeroProfile:
    """c = g * prod_l |sin pi(theta - theta_l)|^tau_l with inf |g| > 0.

    ``zeros`` may repeat a phase (an analytic zero of multiplicity k is k
    entries of order 1).  ``analytic`` marks the trig-polynomial case.
    """
    c: object
    zeros: tuple
    orders: tuple
    analytic: bool
    mean_log: float = None
    mean_log_jensen: float = None
    g_inf: float = None
    richardson_gap: float = None

    @property
    def total_order(self):
        return float(sum(self.orders))

    def sine_part(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape)
        for z, t in zip(self.zeros, self.orders):
            out += t * np.log(np.abs(np.sin(np.pi * (theta - z))))
        return out

    def log_abs_g(self, theta):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(self.c(theta))) - self.sine_part(theta)

    def reconstruction_error(self, n=4096, margin=1e-3):
        th = (np.arange(n) + 0.5) / n
        far = np.ones(n, dtype=bool)
        for z in self.zeros:
            d = np.abs(((th - z) + 0.5) % 1.0 - 0.5)
            far &= d > margin
        c = np.abs(self.c(th[far]))
        rec = np.exp(self.log_abs_g(th[far]) + self.sine_part(th[far]))
        return float(np.max(np.abs(rec - c) / c))


def _trapezoid_mean(f, n, shift):
    th = (np.arange(n) + shift) / n
    return math.fsum(f(th)) / n


def profile_from_sampling(c, nodes=QUAD_NODES):
    """Zero profile of a trig polynomial (order-1 zeros with multiplicity) or a ZeroProduct."""
    if isinstance(c, ZeroProduct):
        prof = ProductZeroProfile(c, tuple(c.zero_list), tuple(c.orders), analytic=False)
    elif isinstance(c, TrigPolynomial):
        zs = []
        for z, k in _cluster(c.zeros()):
            zs += [z] * k
        prof = ProductZeroProfile(c, tuple(float(z) for z in zs), (1.0,) * len(zs), analytic=True)
        prof.mean_log_jensen = c.mean_log_abs()
    else:
        raise DomainError(f"no zero profile for {type(c).__name__}")
    # ln|c| = ln|g| + sum tau ln|sin|, and the mean of ln|sin pi x| is -ln 2
    shift = 0.5 + 1e-7 * math.pi
    fine = _trapezoid_mean(prof.log_abs_g, nodes, shift)
    coarse = _trapezoid_mean(prof.log_abs_g, nodes // 2, shift)
    # one Richardson step for a second-order rule; analytic integrands converge faster anyway
    mean_g = fine + (fine - coarse) / 3
    prof.richardson_gap = abs(fine - coarse)
    prof.mean_log = mean_g - math.log(2) * prof.total_order
    grid = (np.arange(4096) + shift) / 4096
    prof.g_inf = float(np.exp(np.min(prof.log_abs_g(grid))))
    if not prof.g_inf > 0:
        raise DomainError("envelope g vanishes on the grid")
    return prof


@dataclass(frozen=True)
class ThetaTest:
    theta: float
    gammas: tuple
    worst_n: tuple
    admissible: bool
    search_range: int


@dataclass
class LambdaCertificate:
    Lambda1: float
    Lambda: float
    mean_log: float
    beta: float
    delta: float
    form: str
    q_sequence: tuple
    profile: ProductZeroProfile
    alpha: float
    violations: tuple = ()

    def theta_test(self, theta, N=THETA_TEST_RANGE):
        """gamma_l = min_{|n| <= N} max(|n|,1)^2 ||theta - theta_l + n alpha||.

        n = 0 is included so that theta = theta_l is rejected.
        """
        n = np.arange(-N, N + 1)
        weight = np.maximum(np.abs(n), 1).astype(float) ** 2
        gammas, worst = [], []
        for z in self.profile.zeros:
            x = np.mod(theta - z + n * self.alpha, 1.0)
            d = np.minimum(x, 1 - x) * weight
            i = int(np.argmin(d))
            gammas.append(float(d[i]))
            worst.append(int(n[i]))
        return ThetaTest(float(theta), tuple(gammas), tuple(worst),
                         all(g > 0 for g in gammas), N)

    def as_dict(self):
        return {"Lambda1": self.Lambda1, "Lambda": self.Lambda, "mean_log": self.mean_log,
                "beta": self.beta, "delta": self.delta, "form": self.form,
                "q_sequence": list(self.q_sequence), "violations": list(self.violations)}


def lambda_constants(mean_log, beta, delta):
    """(Lambda1, Lambda) = -mean_log + (2, 6) delta^2 min(beta, 1)."""
    b = min(beta, 1.0)
    return -mean_log + 2 * delta ** 2 * b, -mean_log + 6 * delta ** 2 * b


def lambda_certificate(profile, alpha, beta, delta, depth=60, strict=True):
    """Lambda1, Lambda and the qualifying denominators for a zero profile.

    ``alpha`` is a CFExpansion or a real.  The qualifying denominators are the
    q_n with ln q_{n+1} > 2 beta q_n among the stored levels.  Preconditions
    (2 beta < beta(alpha) at the computed depth, and the admissible delta
    range) raise PreconditionViolation when ``strict``; otherwise they are
    recorded in ``violations``.
    """
    cf = alpha if isinstance(alpha, CFExpansion) else cf_expand(alpha, depth, strict=False)
    if cf.value is None:
        raise DomainError("expansion carries no value for alpha")
    est = beta_estimate(cf)
    violations = []
    if not 0 < 2 * beta < est.verdict_at_depth:
        violations.append(f"2 beta = {2 * beta:.4g} not below the depth verdict {est.verdict_at_depth:.4g}")
    if profile.analytic:
        form, dmax = "analytic", 1.0
    else:
        form, dmax = "general", 2 * profile.total_order / (1 + profile.total_order)
    if not 0 < delta < dmax:
        violations.append(f"delta = {delta} outside (0, {dmax:.4g})")
    if violations and strict:
        raise PreconditionViolation("; ".join(violations))
    qs = cf.denominators
    seq = tuple(qs[n] for n, v in est.levels if n < len(qs) - 1 and v > 2 * beta)
    if not seq and strict:
        raise NoQualifyingDenominator(f"no q_n with ln q_(n+1) > {2 * beta:.4g} q_n up to depth {cf.depth}")
    L1, L = lambda_constants(profile.mean_log, beta, delta)
    return LambdaCertificate(L1, L, profile.mean_log, beta, delta, form, seq, profile,
                             float(cf.value), tuple(violations))


def verify_lambda_bound_on_blocks(model, q, beta, delta, Lambda1, certificate=None,
                                  mean_log=0.0, window_cap=None):
    """min over block starts k q, |k| <= K, of ln prod_{j=kq}^{(k+1)q-1} |c(theta + j alpha)|.

    K = min(e^{delta beta q}/q, cap/q).  ``mean_log`` is subtracted per site,
    which evaluates the rescaled c e^{-mean_log}.  With a certificate, the
    phase must pass its theta test first.
    """
    if certificate is not None:
        t = certificate.theta_test(model.theta)
        if not t.admissible:
            raise PreconditionViolation(f"theta = {model.theta} fails the phase test: gammas {t.gammas}")
    params = PeriodicityParams(beta, q, delta, window_cap=window_cap)
    M, sub = params.effective_window()
    K = max(M // q, 0)
    w, _ = model.sample(-K * q, (K + 1) * q)
    aw = np.abs(w)
    zero = np.flatnonzero(aw == 0)
    if len(zero):
        raise ZeroInWindow(f"c vanishes at site {int(zero[0]) - K * q}", index=int(zero[0]) - K * q)
    lw = np.log(aw) - mean_log
    blocks = np.array([math.fsum(b) for b in lw.reshape(2 * K + 1, q)])
    i = int(np.argmin(blocks))
    bmin = float(blocks[i])
    return CheckResult(bmin > -Lambda1 * q, bmin + Lambda1 * q, (i - K) * q, K, sub,
                       {"min_log_block": bmin, "bound": -Lambda1 * q, "blocks": 2 * K + 1})
