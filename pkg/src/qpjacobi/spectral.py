"""Half-line solutions, l-norms, subordinacy lengths, m-functions and the
whole-line Borel transform.

Half-line problems are posed for the gauge-fixed operator with weights |w_n|.
It is unitarily equivalent to H through a diagonal phase unitary, so spectral
measures of delta_n and the moduli |u_n| of solutions are unchanged, while
boundary conditions stay real and m_phi stays Herglotz.

The whole-line M is the Borel transform of the trace measure
mu = mu_{delta_0} + mu_{delta_1}, i.e. M = G(0,0) + G(1,1).
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, NotConverged, RangeTooShort, SingularStep

JL_LOW = 5 - math.sqrt(24)
JL_HIGH = 5 + math.sqrt(24)
MAX_SITES = 1 << 22
SOLUTION_CAP = 1_000_000
RESCALE = 1e150


# ---- half-line data --------------------------------------------------------

def half_line_data(model, N, side="right"):
    """(|w_k|, v_k) for k = 0..N of the right half-line problem.

    side="left" gives the same for the reflected operator (U psi)_n = psi_{1-n},
    whose weights are |w_{-k}| and potential v_{1-k}.
    """
    if side == "right":
        w, v = model.sample(0, N + 1)
        return np.abs(w), v
    if side == "left":
        w, v = model.sample(-N, 2)
        aw = np.abs(w[:N + 1])[::-1]      # |w_{-k}|, k = 0..N
        vv = v[1:][::-1]                  # v_{1-k}, k = 0..N
        return aw, vv
    raise DomainError(f"side must be 'right' or 'left', got {side!r}")


@dataclass
class HalfLineSolution:
    """u_k = mant_k * exp(log_scale_k), k = 0..len-1, for the gauge-fixed recurrence.

    ``side`` says which operator produced it; ``truncated_at`` is set when a
    zero weight stopped the recurrence.
    """
    E: float
    phi: float
    side: str
    mant: np.ndarray
    log_scale: np.ndarray
    weights: np.ndarray
    potential: np.ndarray
    truncated_at: int = None
    _cum: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.mant)

    @property
    def values(self):
        with np.errstate(over="ignore"):
            return self.mant * np.exp(self.log_scale)

    def log_abs(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mant)) + self.log_scale

    def log_cumsq(self):
        """ln sum_{n=1}^{k} |u_n|^2 for k = 0..len-1 (k = 0 gives -inf)."""
        if self._cum is None:
            la = 2 * self.log_abs()
            la[0] = -np.inf
            self._cum = np.logaddexp.accumulate(la)
        return self._cum

    def residual(self):
        """Max relative residual of |w_n| u_{n+1} + |w_{n-1}| u_{n-1} + v_n u_n - E u_n."""
        la = self.log_abs()
        n = np.arange(1, len(self) - 1)
        ref = np.maximum.reduce([la[n - 1], la[n], la[n + 1]])
        ref = np.where(np.isfinite(ref), ref, 0.0)
        sc = lambda k: self.mant[k] * np.exp(self.log_scale[k] - ref)
        r = (self.weights[n] * sc(n + 1) + self.weights[n - 1] * sc(n - 1)
             + (self.potential[n] - self.E) * sc(n))
        return float(np.max(np.abs(r)) / (1 + abs(self.E))) if len(n) else 0.0


def _recurrence(E, aw, vv, u0, u1, length):
    mant = np.empty(length)
    ls = np.zeros(length)
    mant[0], mant[1] = u0, u1
    a, b = float(u0), float(u1)
    off = 0.0
    stop = None
    for n in range(1, length - 1):
        if aw[n] == 0:
            stop = n
            break
        c = ((E - vv[n]) * b - aw[n - 1] * a) / aw[n]
        a, b = b, c
        if abs(c) > RESCALE:
            a /= RESCALE
            b /= RESCALE
            off += math.log(RESCALE)
        mant[n + 1] = b
        ls[n + 1] = off
    if stop is not None:
        mant, ls = mant[:stop + 1], ls[:stop + 1]
    return mant, ls, stop


def half_line_solution(model, E, phi, side="right", length=1000):
    """Solution of the gauge-fixed recurrence with u_0 cos phi + u_1 sin phi = 0, |u_0|^2+|u_1|^2 = 1.

    Boundary data (u_0, u_1) = (-sin phi, cos phi); the partner with phi + pi/2
    is (-cos phi, -sin phi).  A zero weight truncates the solution there.
    """
    if length < 2 or length > SOLUTION_CAP:
        raise DomainError(f"length must lie in [2, {SOLUTION_CAP}]")
    aw, vv = half_line_data(model, length, side)
    if aw[0] == 0:
        raise SingularStep("w_0 = 0: the half-line problem decouples at the boundary", index=0)
    mant, ls, stop = _recurrence(float(E), aw, vv, -math.sin(phi), math.cos(phi), length)
    return HalfLineSolution(float(E), float(phi), side, mant, ls, aw, vv, stop)


def solution_pair(model, E, phi, side="right", length=1000):
    return (half_line_solution(model, E, phi, side, length),
            half_line_solution(model, E, phi + math.pi / 2, side, length))


def log_ell_norm(u, ell):
    """ln ||u||_ell = ln [sum_{n=1}^{[ell]} |u_n|^2 + (ell - [ell]) |u_{[ell]+1}|^2]^{1/2}.

    Left solutions are solutions of the reflected operator, and the norm is
    taken on the reflected index (||u||_ell = ||U u||_ell).
    """
    if ell < 1:
        raise DomainError("ell must be >= 1")
    k = int(math.floor(ell))
    frac = ell - k
    need = k + (1 if frac > 0 else 0)
    if need >= len(u):
        raise RangeTooShort(f"ell = {ell} needs {need + 1} sites, have {len(u)}")
    cum = u.log_cumsq()
    base = cum[k] if k >= 1 else -np.inf
    if frac > 0:
        extra = math.log(frac) + 2 * u.log_abs()[k + 1]
        base = np.logaddexp(base, extra)
    return 0.5 * float(base)


def ell_norm(u, ell):
    return math.exp(log_ell_norm(u, ell))


def _log_prod(u, v, ell):
    return log_ell_norm(u, ell) + log_ell_norm(v, ell)


def subordinacy_length(u, v, epsilon, scale=1.0, rtol=1e-10):
    """ell with ||u||_ell ||v||_ell = scale/(2 epsilon), by bisection.

    The product is continuous and strictly increasing in ell.  ``scale`` is
    the Wronskian modulus |w_0| of the pair (1 for unit boundary weight).
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    target = math.log(scale / (2 * epsilon))
    lo = 1.0
    hi = float(min(len(u), len(v)) - 2)
    if hi <= lo or _log_prod(u, v, hi) < target:
        raise RangeTooShort(f"||u|| ||v|| stays below {scale / (2 * epsilon):.4g} on the computed range")
    if _log_prod(u, v, lo) >= target:
        return lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _log_prod(u, v, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---- m-functions -----------------------------------------------------------

def _g11(aw, vv, z, N, corner=0.0):
    """<delta_1, (H_N - z)^{-1} delta_1> for the gauge-fixed operator on sites 1..N.

    ``corner`` is added to the (1,1) entry (boundary-condition term).
    """
    d = vv[1:N + 1].astype(complex) - z
    d[0] += corner
    off = aw[1:N].astype(complex)
    ab = np.zeros((3, N), dtype=complex)
    ab[0, 1:] = off
    ab[1] = d
    ab[2, :-1] = off
    rhs = np.zeros(N, dtype=complex)
    rhs[0] = 1.0
    return complex(solve_banded((1, 1), ab, rhs, check_finite=False)[0])


def _converge(fn, N0, tol, cap, what):
    N = N0
    a = fn(N)
    while True:
        N2 = 2 * N
        if N2 > cap:
            raise NotConverged(f"{what} did not settle below {tol:g} by N = {N}",
                               values=(a,), gap=None)
        b = fn(N2)
        gap = abs(b - a)
        if gap <= tol * max(1.0, abs(b)):
            return b, N2, gap
        a, N = b, N2


def _mobius(m0, phi):
    c, s = math.cos(phi), math.sin(phi)
    return (m0 * c + s) / (c - m0 * s)


def half_line_m(model, phi, z, side="right", N0=None, tol=1e-8, cap=MAX_SITES, detail=False):
    """Weyl-Titchmarsh m_phi(z) of the half-line problem.

    With psi the l^2 solution at +infinity, psi is proportional to
    v^phi + m_phi u^phi.  It is computed from the truncated resolvent with the
    phi boundary condition, m_phi = tan phi + |w_0| G_phi(1,1)/cos^2 phi; near
    phi = pi/2 the Dirichlet value is rotated instead.  Truncation doubles
    until N and 2N agree to ``tol``.
    """
    z = complex(z)
    if z.imag < 1e-6:
        raise DomainError("need Im z >= 1e-6")
    if N0 is None:
        N0 = int(min(max(1000, 8 / z.imag), cap // 2))
    c = math.cos(phi)
    rotate = abs(c) < 1e-3
    cache = {}

    def fn(N):
        if N not in cache:
            aw, vv = half_line_data(model, N, side)
            if aw[0] == 0:
                raise SingularStep("w_0 = 0", index=0)
            if rotate:
                m0 = aw[0] * _g11(aw, vv, z, N)
                cache[N] = _mobius(m0, phi)
            else:
                t = math.tan(phi)
                cache[N] = t + aw[0] * _g11(aw, vv, z, N, corner=-aw[0] * t) / c ** 2
        return cache[N]

    m, N, gap = _converge(fn, N0, tol, cap, "m_phi")
    if detail:
        return m, {"N": N, "gap": gap}
    return m


def _box_resolvent(model, z, L):
    """G(0,0) + G(1,1) on the box [-L, L] (gauge-fixed, same spectrum)."""
    w, v = model.sample(-L, L + 1)
    n = 2 * L + 1
    off = np.abs(w[:-1]).astype(complex)
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = off
    ab[1] = v - z
    ab[2, :-1] = off
    rhs = np.zeros((n, 2), dtype=complex)
    rhs[L, 0] = 1
    rhs[L + 1, 1] = 1
    x = solve_banded((1, 1), ab, rhs, check_finite=False)
    return complex(x[L, 0] + x[L + 1, 1])


def whole_line_M(model, z, L0=None, tol=1e-8, cap=MAX_SITES, detail=False):
    """Borel transform of mu_{delta_0} + mu_{delta_1} at z, with adaptive box size."""
    z = complex(z)
    if z.imag < 1e-6:
        raise DomainError("need Im z >= 1e-6")
    if L0 is None:
        L0 = int(min(max(500, 8 / z.imag), cap // 4))
    M, L, gap = _converge(lambda L: _box_resolvent(model, z, L), L0, tol, cap // 2, "M")
    if detail:
        return M, {"L": L, "gap": gap}
    return M


def M_identity(model, z, phi, **kw):
    """M recovered from (m_phi mt - 1)/(m_phi + mt), mt the reflected m at pi/2 - phi.

    Both m's carry the bond weight |w_0| between sites 0 and 1, so the
    quotient equals |w_0| M; it is divided out here (|w_0| = 1 for Schrodinger).
    """
    m = half_line_m(model, phi, z, "right", **kw)
    mt = half_line_m(model, _wrap(math.pi / 2 - phi), z, "left", **kw)
    return (m * mt - 1) / (m + mt) / _bond(model)


def _bond(model):
    w, _ = model.sample(0, 1)
    a = abs(complex(w[0]))
    if a == 0:
        raise SingularStep("w_0 = 0", index=0)
    return a


def _wrap(phi):
    """Representative of phi in (-pi/2, pi/2]."""
    x = (phi + math.pi / 2) % math.pi - math.pi / 2
    return math.pi / 2 if x == -math.pi / 2 else x


@dataclass
class MReport:
    z: complex
    M: float
    box: int
    sup_m: float
    dkl_pass: bool
    identity_max_gap: float
    identity_pass: bool
    measure: str = "trace of delta_0 and delta_1"

    def as_dict(self):
        return {"z": [self.z.real, self.z.imag], "M": [self.M.real, self.M.imag],
                "box": self.box, "sup_m": self.sup_m, "dkl_pass": self.dkl_pass,
                "identity_max_gap": self.identity_max_gap,
                "identity_pass": self.identity_pass, "measure": self.measure}


def M_report(model, z, n_phi=32, identity_angles=(0.0, 0.4, -0.7, 1.2), slack=1e-6):
    """whole_line_M with the dominance |M| <= sup_phi |m_phi| and the identity check."""
    M, info = whole_line_M(model, z, detail=True)
    phis = -math.pi / 2 + math.pi * (np.arange(n_phi) + 1) / n_phi
    sup_m = max(abs(half_line_m(model, float(p), z)) for p in phis)
    gaps = [abs(M_identity(model, z, a) - M) / max(1.0, abs(M)) for a in identity_angles]
    g = max(gaps)
    # dominance in the same normalization: |w_0| |M| <= sup |m_phi|
    dom = _bond(model) * abs(M)
    return MReport(complex(z), M, info["L"], sup_m, dom <= sup_m * (1 + slack) + slack,
                   g, g <= 1e-6)


# ---- scans -----------------------------------------------------------------

@dataclass(frozen=True)
class GammaRow:
    E: float
    gamma: float
    min_value: float
    slope: float
    verdict: str


def gamma_scan(source, E_set, gammas, eps_grid, ceiling=1e3, margin=0.05, tail=None):
    """epsilon^{1-gamma} |M(E + i epsilon)| over a log-spaced epsilon grid.

    ``source`` is a model or a callable (E, eps) -> M.  For each (E, gamma):
    the grid minimum and the slope of ln Q against ln eps over the smallest
    ``tail`` grid points.  Verdicts: "continuity-consistent" (min <= ceiling
    and slope >= 0), "singularity-consistent" (slope <= -margin), otherwise
    "undecided".  Returns the rows and a per-E bracket [gamma_low, gamma_high].
    """
    eps = np.sort(np.asarray(eps_grid, dtype=float))[::-1]
    if eps[-1] <= 0 or math.log10(eps[0] / eps[-1]) < 3 - 1e-9:
        raise DomainError("epsilon grid must be positive and span at least 3 decades")
    if tail is None:
        tail = max(3, len(eps) // 3)
    Mf = source if callable(source) and not hasattr(source, "sample") else \
        (lambda E, e: whole_line_M(source, complex(E, e)))
    rows, brackets = [], {}
    for E in E_set:
        absM = np.array([abs(Mf(E, e)) for e in eps])
        le = np.log(eps)
        lo_c, hi_s = 0.0, 1.0
        for g in gammas:
            Q = eps ** (1 - g) * absM
            lq = np.log(Q)
            slope = float(np.polyfit(le[-tail:], lq[-tail:], 1)[0])
            qmin = float(Q.min())
            if qmin <= ceiling and slope >= 0:
                verdict = "continuity-consistent"
                lo_c = max(lo_c, g)
            elif slope <= -margin:
                verdict = "singularity-consistent"
                hi_s = min(hi_s, g)
            else:
                verdict = "undecided"
            rows.append(GammaRow(float(E), float(g), qmin, slope, verdict))
        brackets[float(E)] = (lo_c, hi_s)
    return rows, brackets


@dataclass(frozen=True)
class PowerLawRow:
    epsilon: float
    phi: float
    L: float
    v_norm_sq: float
    lower: float
    upper: float
    passed: bool
    note: str = ""


def power_law_check(model, E, gamma, eps_seq, n_phi=16, max_length=200_000):
    """Both sides of (1/16) L^gamma <= ||v^phi||_L^2 <= L^{2-gamma} at L = ell(phi, eps).

    Scales whose ell does not fit in ``max_length`` sites are reported with
    note "range" and count as not passing.
    """
    phis = -math.pi / 2 + math.pi * (np.arange(n_phi) + 1) / n_phi
    rows = []
    for eps in eps_seq:
        length = int(min(max_length, math.ceil(2 / eps) + 8))
        for p in phis:
            u, v = solution_pair(model, E, float(p), "right", length)
            try:
                L = subordinacy_length(u, v, eps, scale=float(u.weights[0]))
            except RangeTooShort:
                rows.append(PowerLawRow(float(eps), float(p), math.nan, math.nan, math.nan,
                                        math.nan, False, "range"))
                continue
            vn = 2 * log_ell_norm(v, L)
            lower = gamma * math.log(L) - math.log(16)
            upper = (2 - gamma) * math.log(L)
            ok = lower <= vn <= upper
            rows.append(PowerLawRow(float(eps), float(p), L, math.exp(min(vn, 700)),
                                    math.exp(lower), math.exp(upper), ok))
    frac = sum(r.passed for r in rows) / len(rows) if rows else 0.0
    return rows, frac


@dataclass(frozen=True)
class JLRow:
    phi: float
    m: complex
    ell: float
    ratio: float
    lower: float
    upper: float
    passed: bool


def jl_sandwich_check(model, E, epsilon, phis, slack=0.05):
    """(5-sqrt24)/|m_phi| < ||u||_ell/||v||_ell < (5+sqrt24)/|m_phi| with relative slack.

    m_phi comes from the truncated resolvent; the norms and ell from the
    recurrence.  ell solves ||u|| ||v|| = |w_0|/(2 epsilon).
    """
    rows = []
    length = int(math.ceil(1 / epsilon) + 8)
    for p in phis:
        m = half_line_m(model, float(p), complex(E, epsilon))
        u, v = solution_pair(model, E, float(p), "right", length)
        ell = subordinacy_length(u, v, epsilon, scale=float(u.weights[0]))
        ratio = math.exp(log_ell_norm(u, ell) - log_ell_norm(v, ell))
        lo, hi = JL_LOW / abs(m), JL_HIGH / abs(m)
        ok = lo * (1 - slack) < ratio < hi * (1 + slack)
        rows.append(JLRow(float(p), m, ell, ratio, lo, hi, ok))
    return rows
