"""Norm functions of the D-cocycle as trigonometric polynomials.

F_n = ||A(n; theta)||_HS^2 splits as f_n / g_n with g_n = |c~(n; theta)|^2 and
f_n = ||D~(n; theta)||_HS^2, where c~ = e^{-b} c and D~ = e^{-b} D are
rescaled so that the mean of ln|c~| is zero.  f_n is truncated to its
Fourier modes |k| <= d n (P_n) plus a tail (R_n).  The module also finds
the large-norm interval Delta_n, the localization indices j_m, the sums of
||A(k)||^2 and the polynomial sublevel-measure bound.

Everything of size e^{O(n)} is carried as a logarithm or as a normalized
array together with its log scale.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .cocycle import batch_chain, batch_log_hs, lyapunov_birkhoff, random_phases, step_coeffs
from .errors import (BudgetExceeded, DegenerateZeros, DomainError, EmptyLevelSet,
                     NonAnalyticInput, NotFound, SingularStep)
from .lattice import TWO_PI, TrigPolynomial

N_BUDGET = 2000
RHO_CAP = 1.0
STRIP_FRACTION = 0.9
C1_ORDERS = (4, 8, 16, 32)
STRIP_GRID = 2048
CHUNK = 4096
SUM_CAP = 100_000


# ---------------------------------------------------------------- evaluation

def _check_analytic(model):
    if model.explicit:
        raise NonAnalyticInput("explicit arrays have no analytic extension")
    for f in (model.c, model.v):
        if f.width is None:
            raise NonAnalyticInput(f"{f.kind} sampling function is not analytic")


def working_width(model):
    """Strip half-width used by the decomposition: 0.9 * min(rho, 1)."""
    _check_analytic(model)
    rho = min(model.c.width, model.v.width, RHO_CAP)
    return STRIP_FRACTION * rho


def structural_degree(model, n):
    """Upper bound on the Fourier support of f_n when c and v are trig polynomials."""
    if isinstance(model.c, TrigPolynomial) and isinstance(model.v, TrigPolynomial):
        return 2 * n * max(model.c.degree, model.v.degree, 1)
    return None


def _d_steps(model, E, n, thetas, y=0.0, b=0.0):
    """Step coefficients of D~ at z_j = theta + j alpha + i y, shape (n, len(thetas))."""
    j = np.arange(n)[:, None] * model.alpha
    z = np.asarray(thetas, dtype=float)[None, :] + j
    if y:
        z = z + 1j * y
    s = math.exp(-b)
    cz = np.asarray(model.c(z), dtype=complex)
    cbar = np.asarray(model.c.conj_ext(z - model.alpha), dtype=complex)
    vz = np.asarray(model.v(z), dtype=complex) if y else np.real(model.v(z))
    return s * (E - vz), -s * cbar, s * cz


def _log_hs2(al, be, ga):
    out = np.empty(al.shape[1])
    for k in range(0, al.shape[1], CHUNK):
        sl = slice(k, k + CHUNK)
        ent, ls = batch_chain(al[:, sl], be[:, sl], ga[:, sl])
        out[sl] = 2 * batch_log_hs(ent, ls)
    return out


def log_f_on(model, E, n, thetas, y=0.0, b=0.0):
    """ln f_n = ln ||D~(n; theta + i y)||_HS^2 at each theta."""
    return _log_hs2(*_d_steps(model, E, n, thetas, y, b))


def log_F_on(model, E, n, thetas):
    """ln ||A(n; theta)||_HS^2 through the A-steps (nan where c vanishes on the orbit)."""
    thetas = np.asarray(thetas, dtype=float)
    z = thetas[None, :] + np.arange(-1, n)[:, None] * model.alpha
    w = np.asarray(model.c(z), dtype=complex)
    v = np.real(model.v(z[1:]))
    ok = np.min(np.abs(w[1:]), axis=0) > 1e-12 * model.c.sup_bound()
    wc = np.where(ok[None, :], w[1:], 1.0)
    out = _log_hs2(*step_coeffs(E, wc, w[:-1], v, "A"))
    out[~ok] = np.nan
    return out


def log_g_on(model, n, thetas, b=0.0):
    """ln g_n = sum_j 2 (ln|c(theta + j alpha)| - b)."""
    z = np.asarray(thetas, dtype=float)[None, :] + np.arange(n)[:, None] * model.alpha
    with np.errstate(divide="ignore"):
        return 2 * (np.sum(np.log(np.abs(model.c(z))), axis=0) - n * b)


@dataclass(frozen=True)
class StripConstant:
    """C1 with sup_{|Im z| <= rho'} ||D~(n; z)||_HS^2 <= e^{C1 n}."""
    rho: float
    orders: tuple
    log_sups: tuple
    slope: float
    intercept: float
    direct: float = None

    def at(self, n):
        c = self.slope + max(self.intercept, 0.0) / n
        if self.direct is not None:
            c = max(c, self.direct)
        return c


def measure_C1(model, E, n=None, b=None, orders=C1_ORDERS, grid=STRIP_GRID):
    """Grid sup of ln ||D~(n)||_HS^2 on the lines Im z = +-rho' at small n, fitted linearly.

    When ``n`` is given the sup at n itself is measured too and C1 is the
    larger of the extrapolated and direct values.
    """
    rho = working_width(model)
    if b is None:
        b = model.c.mean_log_abs()
    th = np.arange(grid) / grid
    sups = []
    for k in orders:
        sups.append(max(float(np.max(log_f_on(model, E, k, th, s * rho, b))) for s in (1, -1)))
    slope, intercept = np.polyfit(np.array(orders, dtype=float), np.array(sups), 1)
    direct = None
    if n is not None:
        g = max(grid, 8 * n)
        th = np.arange(g) / g
        direct = max(float(np.max(log_f_on(model, E, n, th, s * rho, b))) for s in (1, -1)) / n
    return StripConstant(rho, tuple(orders), tuple(sups), float(slope), float(intercept), direct)


def degree_factor(C1, rho):
    """d = [C1 / (pi rho)] + 2."""
    return int(math.floor(C1 / (math.pi * rho))) + 2


# ---------------------------------------------------------------- decomposition

@dataclass
class TrigDecomposition:
    n: int
    E: float
    b_rescale: float
    rho: float
    C1: float
    d: int
    theta: np.ndarray
    log_f: np.ndarray
    log_g: np.ndarray
    log_F: np.ndarray
    scale: float
    coeffs: np.ndarray
    support: int
    P: np.ndarray
    R: np.ndarray
    n2: float
    fft_noise: float
    strip: StripConstant = field(repr=False, default=None)

    @property
    def grid(self):
        return len(self.theta)

    def index(self):
        return np.fft.fftfreq(self.grid, 1.0 / self.grid).astype(int)

    def log_max_R(self):
        m = float(np.max(np.abs(self.R)))
        return self.scale + math.log(m) if m > 0 else -math.inf

    def max_R(self):
        return math.exp(min(self.log_max_R(), 700.0))

    def log_tail_bound(self):
        """ln of 8 e^{C1 n} e^{-pi rho d n} / (1 - e^{-pi rho})."""
        pr = math.pi * self.rho
        return math.log(8.0 / -math.expm1(-pr)) + self.C1 * self.n - pr * self.d * self.n

    def parseval_error(self):
        f = np.exp(self.log_f - self.scale)
        lhs = float(np.sum(np.abs(self.coeffs) ** 2))
        rhs = float(np.mean(f * f))
        return abs(lhs - rhs) / rhs

    def split_error(self):
        """max |P + R - f| relative to max f."""
        f = np.exp(self.log_f - self.scale)
        return float(np.max(np.abs(self.P + self.R - f)))

    def product_error(self):
        """max over the grid of |F g / f - 1| where F is defined."""
        ok = np.isfinite(self.log_F) & np.isfinite(self.log_g)
        return float(np.max(np.abs(np.expm1(self.log_F[ok] + self.log_g[ok] - self.log_f[ok]))))

    def decay_margin(self):
        """min over k of ln(4 e^{C1 n} e^{-pi rho |k|}) - ln|f^(k)| (positive = bound holds)."""
        k = np.abs(self.index())
        with np.errstate(divide="ignore"):
            lc = np.log(np.abs(self.coeffs)) + self.scale
        bound = math.log(4.0) + self.C1 * self.n - math.pi * self.rho * k
        return float(np.min(bound - lc))

    def mean_log_g(self):
        return float(np.mean(self.log_g[np.isfinite(self.log_g)])) / self.n

    def mean_log_f(self):
        return float(np.mean(self.log_f)) / self.n

    def P_at(self, theta):
        """P_n / e^scale at arbitrary phases, summed from the kept coefficients."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        k = self.index()
        keep = np.abs(k) <= self.d * self.n
        ph = np.exp(1j * TWO_PI * np.outer(theta, k[keep]))
        return np.real(ph @ self.coeffs[keep])

    def summary(self):
        return {"n": self.n, "E": self.E, "b_rescale": self.b_rescale, "rho": self.rho,
                "C1": self.C1, "d": self.d, "grid": self.grid, "support": self.support,
                "log_max_R": self.log_max_R(), "log_tail_bound": self.log_tail_bound(),
                "n2": self.n2, "parseval_error": self.parseval_error(),
                "split_error": self.split_error(), "product_error": self.product_error(),
                "decay_margin": self.decay_margin(), "fft_noise": self.fft_noise,
                "mean_log_f_over_n": self.mean_log_f(), "mean_log_g_over_n": self.mean_log_g()}


def decompose_F(model, E, n, grid=None, strip=None):
    """F_n = f_n / g_n and f_n = P_n + R_n on a grid of at least 8 d n points.

    Fourier coefficients come from one FFT of f_n / e^scale.  When c and v
    are trig polynomials f_n has Fourier support |k| <= 2 n deg, so modes
    beyond that are zero; their FFT values are pure rounding and are
    dropped (their size is kept in ``fft_noise``).
    """
    n = int(n)
    if n < 1:
        raise DomainError("n >= 1 required")
    if n > N_BUDGET:
        raise BudgetExceeded(f"n = {n} exceeds the FFT budget {N_BUDGET}")
    _check_analytic(model)
    b = model.c.mean_log_abs()
    strip = strip or measure_C1(model, E, n, b)
    rho = strip.rho
    C1 = strip.at(n)
    d = degree_factor(C1, rho)
    N = max(int(grid or 0), 8 * d * n)
    theta = model.theta + np.arange(N) / N

    log_f = log_f_on(model, E, n, theta, 0.0, b)
    log_g = log_g_on(model, n, theta, b)
    log_F = log_F_on(model, E, n, theta)
    scale = float(np.max(log_f))
    f = np.exp(log_f - scale)
    coeffs = np.fft.fft(f) / N
    k = np.fft.fftfreq(N, 1.0 / N).astype(int)
    support = structural_degree(model, n)
    fft_noise = 0.0
    if support is not None:
        out = np.abs(k) > support
        if out.any():
            fft_noise = float(np.max(np.abs(coeffs[out])))
        coeffs = np.where(out, 0.0, coeffs)
    else:
        support = N // 2
    # undo the grid shift so coefficients refer to phases theta, not theta - model.theta
    coeffs = coeffs * np.exp(-1j * TWO_PI * k * model.theta)
    keep = np.abs(k) <= d * n
    basis = np.exp(1j * TWO_PI * k * model.theta)
    P = np.real(np.fft.ifft(np.where(keep, coeffs * basis, 0.0)) * N)
    R = np.real(np.fft.ifft(np.where(keep, 0.0, coeffs * basis)) * N)
    pr = math.pi * rho
    n2 = math.log(8.0 / -math.expm1(-pr)) / pr
    return TrigDecomposition(n, float(E), b, rho, C1, d, theta, log_f, log_g, log_F, scale,
                             coeffs, support, P, R, n2, fft_noise, strip)


# ---------------------------------------------------------------- level sets

@dataclass
class LargeNormInterval:
    interval: tuple
    length: float
    required: float
    measures: tuple
    chain: bool
    c2: float
    a: float
    thresholds: tuple
    n0: float
    n3: float
    g_premise: bool
    measure_floor: bool
    norm_on_interval: bool

    @property
    def passed(self):
        return self.chain and self.length >= self.required and self.norm_on_interval

    def as_dict(self):
        return {"interval": list(self.interval), "length": self.length,
                "required": self.required, "measures": list(self.measures),
                "chain": self.chain, "c2": self.c2, "a": self.a,
                "thresholds_log": list(self.thresholds), "n0": self.n0, "n3": self.n3,
                "g_premise": self.g_premise, "measure_floor": self.measure_floor,
                "norm_on_interval": self.norm_on_interval, "pass": self.passed}


def _longest_run(mask):
    """(start, length) of the longest circular run of True."""
    N = len(mask)
    if mask.all():
        return 0, N
    start = int(np.flatnonzero(~mask)[0]) + 1
    best, cur, cur_start = (0, 0), 0, None
    for i in range(N):
        j = (start + i) % N
        if mask[j]:
            if cur == 0:
                cur_start = j
            cur += 1
            if cur > best[1]:
                best = (cur_start, cur)
        else:
            cur = 0
    return best


def find_large_norm_interval(decomp, a):
    """Level sets of F_n, P_n, f_n at e^{na/8}, e^{na/3}, e^{na/2} and the interval Delta_n.

    The floor ``a`` stands in for L(E) in the thresholds; the measure
    estimate Leb(Theta3) >= 3a/(2 C1 - a) only needs L >= a.
    """
    if a <= 0:
        raise DomainError("a > 0 required")
    n, N = decomp.n, decomp.grid
    t1, t2, t3 = n * a / 8, n * a / 3, n * a / 2
    log_F = np.where(np.isfinite(decomp.log_F), decomp.log_F, decomp.log_f - decomp.log_g)
    th1 = log_F > t1
    th2 = decomp.P > math.exp(t2 - decomp.scale) if t2 - decomp.scale < 700 else \
        np.zeros(N, dtype=bool)
    th3 = decomp.log_f > t3
    if not th2.any():
        raise EmptyLevelSet(f"P_n never exceeds e^(na/3) at n = {n}",
                            max_value=float(np.max(decomp.log_f)))
    chain = bool(np.all(~th3 | th2) and np.all(~th2 | th1))
    c2 = 3 * a / (2 * decomp.C1 - a)
    required = c2 / (4 * decomp.d * n)

    start, run = _longest_run(th2)
    h = 1.0 / N
    base = decomp.theta[0]
    if run == N:
        lo, hi = base, base + 1.0
    else:
        thr = math.exp(t2 - decomp.scale)
        fn = lambda x: float(decomp.P_at(x)[0]) - thr
        left_in = base + start * h
        right_in = base + (start + run - 1) * h
        lo = brentq(fn, left_in - h, left_in, xtol=1e-15) if fn(left_in - h) < 0 else left_in
        hi = brentq(fn, right_in, right_in + h, xtol=1e-15) if fn(right_in + h) < 0 else right_in
    idx = (start + np.arange(run)) % N
    n3 = 4.0 / a
    return LargeNormInterval(
        interval=(float(lo), float(hi)), length=float(hi - lo), required=required,
        measures=(float(th1.mean()), float(th2.mean()), float(th3.mean())), chain=chain,
        c2=c2, a=float(a), thresholds=(t1, t2, t3), n0=max(decomp.n2, n3), n3=n3,
        g_premise=bool(np.nanmax(decomp.log_g) <= t1), measure_floor=bool(th3.mean() >= c2),
        norm_on_interval=bool(np.all(log_F[idx] > t1)))


# ---------------------------------------------------------------- growth along the orbit

def prefix_log_hs(model, E, count, start=0):
    """ln ||A(k, start)||_HS for k = 1..count, one running product."""
    w, v = model.sample(start - 1, start + count)
    zs = model.zero_sites(w[1:], start)
    if zs:
        raise SingularStep(f"w vanishes at site {zs[0]}", index=zs[0])
    al, be, ga = step_coeffs(E, w[1:], w[:-1], v[1:], "A")
    al, be, ga = al.tolist(), be.tolist(), ga.tolist()
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    ls = 0.0
    out = np.empty(count)
    for i in range(count):
        x, y, z = al[i], be[i], ga[i]
        a, b, c, d = x * a + y * c, x * b + y * d, z * a, z * b
        m = max(abs(a), abs(b), abs(c), abs(d))
        a, b, c, d = a / m, b / m, c / m, d / m
        ls += math.log(m)
        out[i] = ls + 0.5 * math.log(abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2)
    return out


def _default_L(model, E, seed=0):
    est = lyapunov_birkhoff(model, E, 10_000, random_phases(8, seed))
    return est.mean


@dataclass
class NormGrowthCertificate:
    q_n: int
    windows: int
    a: float
    L: float
    C1: float
    rho: float
    c2: float
    d: int
    c0: float
    threshold: float
    n1: float
    premise_met: bool
    j: list
    log_norms: list
    best: list
    log_partial_sums: list
    interval: tuple = None

    @property
    def hypothesis_met(self):
        """The lemma assumes L(E) >= a."""
        return self.L >= self.a

    def as_dict(self):
        return {"q_n": self.q_n, "windows": self.windows, "a": self.a, "L": self.L,
                "C1": self.C1, "rho": self.rho, "c2": self.c2, "d": self.d, "c0": self.c0,
                "threshold": self.threshold, "n1": self.n1, "premise_met": self.premise_met,
                "hypothesis_met": self.hypothesis_met, "j": self.j,
                "log_norms": self.log_norms, "interval": self.interval}


def localization_density(model, E, q_n, a, M=20, L=None, interval=None):
    """Indices j_m in [2m q_n, (2m+2) q_n) with ln ||A(j_m)||_HS > c0 q_n L, m < M.

    c2 = 3a/(2 C1 - a), d from the measured C1 at n = q_n, c0 = c2/(320 d).
    The first qualifying index of each window is taken (j = 0 is skipped).
    """
    q_n, M = int(q_n), int(M)
    if q_n < 1 or M < 1:
        raise DomainError("q_n, M >= 1 required")
    strip = measure_C1(model, E, q_n)
    C1 = strip.at(q_n)
    d = degree_factor(C1, strip.rho)
    c2 = 3 * a / (2 * C1 - a)
    c0 = c2 / (320 * d)
    L = _default_L(model, E) if L is None else float(L)
    thr = c0 * q_n * L
    c_theta = abs(complex(model.c(model.theta)))
    if c_theta == 0:
        raise SingularStep("c vanishes at theta", index=0)
    pr = math.pi * strip.rho
    n0 = max(4.0 / a, math.log(8.0 / -math.expm1(-pr)) / pr)
    n1 = max(5 * d * n0 / c2, math.log(model.c.sup_bound() / c_theta) / (c0 * L) if L > 0
             else math.inf)

    logs = prefix_log_hs(model, E, 2 * M * q_n, 0)
    js, vals, best = [], [], []
    for m in range(M):
        lo, hi = max(2 * m * q_n, 1), (2 * m + 2) * q_n
        seg = logs[lo - 1:hi - 1]
        k = int(np.argmax(seg))
        best.append((lo + k, float(seg[k])))
        hit = np.flatnonzero(seg > thr)
        if not len(hit):
            raise NotFound(f"no index in window m = {m} beats {thr:.4g}",
                           window=(lo, hi), best=best[-1])
        js.append(int(lo + hit[0]))
        vals.append(float(seg[hit[0]]))
    partial = np.logaddexp.accumulate(2 * logs)
    sums = [float(partial[(2 * m + 2) * q_n - 1]) for m in range(M)]
    return NormGrowthCertificate(q_n, M, float(a), L, C1, strip.rho, c2, d, c0, thr, n1,
                                 q_n >= n1, js, vals, best, sums, interval)


@dataclass(frozen=True)
class GrowthSum:
    ell: int
    log_sum: float
    exponent_fit: float
    log_sum_reversed: float
    exponent_fit_reversed: float
    target: float = None

    @property
    def passed(self):
        if self.target is None:
            return None
        return min(self.exponent_fit, self.exponent_fit_reversed) >= self.target


def sum_norm_growth(model, E, ell, c_exponent=None):
    """ln sum_{k<=ell} ||A(k)||^2 for (theta, alpha) and (theta - alpha, -alpha).

    ``exponent_fit`` is ln(sum)/ln(ell); with ``c_exponent`` = 2c/beta the
    target is 1 + c_exponent.
    """
    ell = int(ell)
    if not 2 <= ell <= SUM_CAP:
        raise DomainError(f"ell must lie in [2, {SUM_CAP}]")
    fwd = prefix_log_hs(model, E, ell, 0)
    rev_model = replace(model, alpha=-model.alpha, theta=model.theta - model.alpha)
    rev = prefix_log_hs(rev_model, E, ell, 0)
    s1 = float(np.logaddexp.reduce(2 * fwd))
    s2 = float(np.logaddexp.reduce(2 * rev))
    lg = math.log(ell)
    target = None if c_exponent is None else 1.0 + float(c_exponent)
    return GrowthSum(ell, s1, s1 / lg, s2, s2 / lg, target)


# ---------------------------------------------------------------- sublevel bound

@dataclass(frozen=True)
class SublevelReport:
    degree: int
    a: float
    b: float
    measure: float
    bound: float
    zeta: float
    diam: float
    diam_real: float
    ratio: float
    vacuous: bool

    @property
    def holds(self):
        return self.measure <= self.bound * (1 + 1e-12) + 1e-12


def _monotone_roots(p, level, knots):
    """Real solutions of p(x) = level, one bracket per monotone piece."""
    out = []
    g = lambda x: float(np.polyval(p, x)) - level
    for lo, hi in zip(knots[:-1], knots[1:]):
        gl, gh = g(lo), g(hi)
        if gl == 0:
            out.append(lo)
        elif gl * gh < 0:
            out.append(brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if g(knots[-1]) == 0:
        out.append(knots[-1])
    return out


def sublevel_measure_bound(p, a, b, sep_tol=1e-9):
    """|p^{-1}(a, b)| against 2 diam(z(p - a)) max{r, sqrt r}, r = (b - a)/(zeta + a).

    ``p`` is a coefficient sequence, highest degree first.  z(p - a) is the
    complex zero set.  For degree 1 there are no critical points and the
    bound is reported as infinite (vacuous).
    """
    p = np.trim_zeros(np.asarray(p, dtype=float), "f")
    if len(p) < 2:
        raise DomainError("p must have degree >= 1")
    if not 0 <= a < b:
        raise DomainError("0 <= a < b required")
    n = len(p) - 1
    r = np.roots(p)
    scale = max(1.0, float(np.max(np.abs(r))))
    if np.any(np.abs(r.imag) > sep_tol * scale):
        raise DegenerateZeros("p has non-real zeros")
    xs = np.sort(r.real)
    if n > 1 and np.min(np.diff(xs)) <= sep_tol * scale:
        raise DegenerateZeros("p has a repeated zero")

    crit = np.sort(np.roots(np.polyder(p)).real) if n > 1 else np.array([])
    # Cauchy bound for p = a and p = b
    cb = 1 + max(np.max(np.abs(p[1:] / p[0])), abs(a - p[-1]) / abs(p[0]),
                 abs(b - p[-1]) / abs(p[0]))
    knots = [-cb - 1.0] + [float(c) for c in crit] + [cb + 1.0]
    pts = sorted(_monotone_roots(p, a, knots) + _monotone_roots(p, b, knots))
    measure = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        y = float(np.polyval(p, 0.5 * (lo + hi)))
        if a < y < b:
            measure += hi - lo

    pa = p.copy()
    pa[-1] -= a
    za = np.roots(pa)
    diam = float(max(abs(x - y) for x in za for y in za)) if len(za) > 1 else 0.0
    real_a = _monotone_roots(p, a, knots)
    diam_real = float(max(real_a) - min(real_a)) if real_a else 0.0
    if n == 1:
        return SublevelReport(n, a, b, measure, math.inf, math.inf, diam, diam_real,
                              0.0, True)
    zeta = float(np.min(np.abs(np.polyval(p, crit))))
    ratio = (b - a) / (zeta + a)
    bound = 2 * diam * max(ratio, math.sqrt(ratio))
    return SublevelReport(n, float(a), float(b), measure, bound, zeta, diam, diam_real,
                          ratio, False)
