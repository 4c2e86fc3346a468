"""Transfer-matrix cocycles in overflow-safe scaled form.

Step matrices (all of the shape [[alpha, beta], [gamma, 0]]):

    D_n = [[E - v_n, -conj(w_{n-1})], [w_n, 0]]
    A_n = D_n / w_n
    At_n = [[E - v_n, -|w_{n-1}|], [|w_n|, 0]] / sqrt|w_n w_{n-1}|     (real, det 1)

and A(n, m) = A_{n+m-1} ... A_{m+1} A_m.  The regularized cocycle At is
conjugate to A through T_n = diag(1, w_n/|w_n|) and the scalars
r_n = w_{n+1}/sqrt|w_{n+1} w_n|.
"""
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import DegenerateDiagonalization, DomainError, Overflow, SingularStep, WindowTooLarge

LN2 = math.log(2.0)
LOG_SCALE_CAP = 1e6
PRODUCT_CAP = 10_000_000


class ScaledMatrix2x2:
    """Complex 2x2 matrix e^{log_scale} * entries with max |entry| in [1/2, 2].

    The determinant of a long hyperbolic product is far below the rounding
    level of the normalized entries, so products also carry ``log_det`` and
    ``det_phase`` accumulated from the step determinants.  ``det()`` uses those
    when present and falls back to the entries otherwise.
    """
    __slots__ = ("entries", "log_scale", "log_det", "det_phase")

    def __init__(self, entries, log_scale=0.0, log_det=None, det_phase=None):
        e = np.array(entries, dtype=complex).reshape(2, 2)
        m = float(np.max(np.abs(e)))
        ls = float(log_scale)
        if m > 0 and not 0.5 <= m <= 2.0:
            k = math.frexp(m)[1]
            e = e * math.ldexp(1.0, -k)
            ls += k * LN2
        self.entries = e
        self.log_scale = ls
        self.log_det = log_det
        self.det_phase = det_phase

    @classmethod
    def identity(cls):
        return cls(np.eye(2), 0.0, 0.0, 1.0 + 0j)

    def array(self):
        return self.entries * math.exp(self.log_scale)

    def _sv(self):
        s = np.linalg.svd(self.entries, compute_uv=False)
        return s

    def log_norm(self):
        """ln of the operator 2-norm."""
        s = self._sv()[0]
        return self.log_scale + math.log(s) if s > 0 else -math.inf

    def log_hs(self):
        """ln of the Hilbert-Schmidt norm."""
        s = float(np.sqrt(np.sum(np.abs(self.entries) ** 2)))
        return self.log_scale + math.log(s) if s > 0 else -math.inf

    def norm(self):
        return math.exp(self.log_norm())

    def trace(self):
        return complex(self.entries[0, 0] + self.entries[1, 1]) * math.exp(self.log_scale)

    def log_abs_trace(self):
        t = abs(self.entries[0, 0] + self.entries[1, 1])
        return self.log_scale + math.log(t) if t > 0 else -math.inf

    def abs_trace(self):
        return math.exp(self.log_abs_trace())

    def naive_det(self):
        e = self.entries
        d = complex(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])
        if d == 0:
            return 0j
        with np.errstate(over="ignore"):
            return d * float(np.exp(2 * self.log_scale))

    def det(self):
        if self.log_det is None:
            return self.naive_det()
        return self.det_phase * math.exp(self.log_det)

    def _det_parts(self):
        if self.log_det is not None:
            return self.log_det, self.det_phase
        e = self.entries
        d = complex(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])
        if d == 0:
            raise DomainError("singular matrix")
        return 2 * self.log_scale + math.log(abs(d)), d / abs(d)

    def __matmul__(self, other):
        ld = pd = None
        if self.log_det is not None and other.log_det is not None:
            ld, pd = self.log_det + other.log_det, self.det_phase * other.det_phase
        return ScaledMatrix2x2(self.entries @ other.entries, self.log_scale + other.log_scale,
                               ld, pd)

    def scale(self, s):
        """Multiply by a ScaledScalar or complex number."""
        if isinstance(s, ScaledScalar):
            ph, lm = s.phase, s.log_mag
        else:
            lm, ph = math.log(abs(s)), s / abs(s)
        ld = pd = None
        if self.log_det is not None:
            ld, pd = self.log_det + 2 * lm, self.det_phase * ph * ph
        return ScaledMatrix2x2(self.entries * ph, self.log_scale + lm, ld, pd)

    def conj_by(self, left, right):
        """left @ self @ right for plain 2x2 arrays of modest size."""
        lm = ScaledMatrix2x2(left, 0.0, *_logdet_parts(left))
        rm = ScaledMatrix2x2(right, 0.0, *_logdet_parts(right))
        return lm @ self @ rm

    def inverse(self):
        ld, pd = self._det_parts()
        e = self.entries
        adj = np.array([[e[1, 1], -e[0, 1]], [-e[1, 0], e[0, 0]]])
        return ScaledMatrix2x2(adj / pd, self.log_scale - ld, -ld, 1 / pd)

    def at_scale(self, log_scale):
        return self.entries * math.exp(self.log_scale - log_scale)

    def distance(self, other):
        """||self - other||_2 as a plain float (may be inf for huge matrices)."""
        ref = max(self.log_scale, other.log_scale)
        diff = self.at_scale(ref) - other.at_scale(ref)
        return float(np.linalg.norm(diff, 2)) * math.exp(ref)

    def rel_distance(self, other):
        """||self - other||_2 / ||self||_2 evaluated at a common scale."""
        ref = self.log_scale
        diff = self.entries - other.at_scale(ref)
        return float(np.linalg.norm(diff, 2) / np.linalg.norm(self.entries, 2))

    def __repr__(self):
        return f"ScaledMatrix2x2(log_scale={self.log_scale:.6g}, entries={self.entries.tolist()})"


def _logdet_parts(M):
    d = complex(np.linalg.det(M))
    return math.log(abs(d)), d / abs(d)


@dataclass(frozen=True)
class ScaledScalar:
    phase: complex
    log_mag: float

    def value(self):
        return self.phase * math.exp(self.log_mag)

    def abs(self):
        return math.exp(self.log_mag)

    def __mul__(self, other):
        return ScaledScalar(self.phase * other.phase, self.log_mag + other.log_mag)

    def inverse(self):
        return ScaledScalar(self.phase.conjugate(), -self.log_mag)


@dataclass(frozen=True)
class LyapunovEstimate:
    E: float
    n: int
    thetas: tuple
    values: tuple
    mean: float
    stderr: float
    method: str = "A"


# ---------------------------------------------------------------- kernels

def step_coeffs(E, w, wprev, v, which):
    """(alpha, beta, gamma) arrays of the step matrices for sites with weights w."""
    e = E - v
    if which == "D":
        return e.astype(complex), -np.conj(wprev), w.astype(complex)
    if which == "A":
        return e / w, -np.conj(wprev) / w, np.ones_like(w)
    if which == "At":
        aw, ap = np.abs(w), np.abs(wprev)
        s = 1.0 / np.sqrt(aw * ap)
        return e * s, -ap * s, aw * s
    raise DomainError(f"unknown step kind {which!r}")


def step_matrices(E, v_n, w_n, w_prev):
    """(A_n, D_n) as ScaledMatrix2x2; raises SingularStep (carrying D_n) when w_n = 0."""
    D = np.array([[E - v_n, -np.conj(w_prev)], [w_n, 0]], dtype=complex)
    Dm = ScaledMatrix2x2(D, 0.0, *(_logdet_parts(D) if w_n * w_prev != 0 else (None, None)))
    if w_n == 0:
        raise SingularStep("w_n = 0: only D_n is defined", D=Dm)
    A = D / w_n
    return ScaledMatrix2x2(A, 0.0, *(_logdet_parts(A) if w_prev != 0 else (None, None))), Dm


def chain(al, be, ga):
    """Ordered product of [[al_j, be_j], [ga_j, 0]] (later index on the left).

    Scalar Python loop; entries are rescaled by powers of two whenever their
    max modulus leaves [1/2, 2], so rescaling is exact.
    """
    al, be, ga = al.tolist(), be.tolist(), ga.tolist()
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    k2 = 0
    frexp, ldexp = math.frexp, math.ldexp
    for x, y, z in zip(al, be, ga):
        a, b, c, d = x * a + y * c, x * b + y * d, z * a, z * b
        m = max(abs(a), abs(b), abs(c), abs(d))
        if m > 2.0 or m < 0.5:
            if m == 0.0:
                break
            e = frexp(m)[1]
            s = ldexp(1.0, -e)
            a, b, c, d = a * s, b * s, c * s, d * s
            k2 += e
    ls = k2 * LN2
    if abs(ls) > LOG_SCALE_CAP:
        raise Overflow(f"log scale {ls:.3g} exceeds cap")
    dets = -np.asarray(be) * np.asarray(ga)
    if np.all(dets != 0):
        log_det = float(math.fsum(np.log(np.abs(dets))))
        det_phase = complex(np.exp(1j * math.fsum(np.angle(dets))))
    else:
        log_det = det_phase = None
    out = ScaledMatrix2x2.__new__(ScaledMatrix2x2)
    out.entries = np.array([[a, b], [c, d]])
    out.log_scale = ls
    out.log_det = log_det
    out.det_phase = det_phase
    return out


def batch_chain(al, be, ga):
    """Many products at once; inputs of shape (steps, batch).

    Returns (entries of shape (batch, 2, 2), log_scale of shape (batch,)).
    """
    al, be, ga = np.asarray(al), np.asarray(be), np.asarray(ga)
    B = al.shape[1]
    a = np.ones(B, dtype=complex)
    b = np.zeros(B, dtype=complex)
    c = np.zeros(B, dtype=complex)
    d = np.ones(B, dtype=complex)
    k2 = np.zeros(B, dtype=np.int64)
    for j in range(al.shape[0]):
        x, y, z = al[j], be[j], ga[j]
        a, b, c, d = x * a + y * c, x * b + y * d, z * a, z * b
        m = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
        bad = (m > 2.0) | (m < 0.5)
        if bad.any():
            _, e = np.frexp(np.where(m > 0, m, 1.0))
            e = np.where(bad, e, 0)
            s = np.ldexp(1.0, -e)
            a, b, c, d = a * s, b * s, c * s, d * s
            k2 += e
    ent = np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)
    return ent, k2 * LN2


def batch_log_norm(ent, ls):
    s = np.linalg.svd(ent, compute_uv=False)[..., 0]
    with np.errstate(divide="ignore"):
        return ls + np.log(s)


def batch_log_abs_trace(ent, ls):
    t = np.abs(ent[..., 0, 0] + ent[..., 1, 1])
    with np.errstate(divide="ignore"):
        return ls + np.log(t)


def batch_log_hs(ent, ls):
    s = np.sqrt(np.sum(np.abs(ent) ** 2, axis=(-2, -1)))
    with np.errstate(divide="ignore"):
        return ls + np.log(s)


# ---------------------------------------------------------------- products

def _weights(model, n, m):
    """w_{m-1..m+n-1} and v_{m..m+n-1}."""
    if abs(n) > PRODUCT_CAP:
        raise DomainError(f"|n| = {abs(n)} exceeds {PRODUCT_CAP}")
    w, v = model.sample(m - 1, m + n + 1)
    return w, v


def _check_zeros(model, w, lo, which):
    zs = model.zero_sites(w, lo)
    if zs:
        raise SingularStep(f"w vanishes at site {zs[0]} ({which}-product refused)", index=zs[0])


def _matrix_product(model, E, n, m, which):
    w, v = _weights(model, n, m)
    wprev, wcur, vv = w[:n], w[1:n + 1], v[1:n + 1]
    if which == "A":
        _check_zeros(model, wcur, m, "A")
    elif which == "At":
        _check_zeros(model, w[:n + 1], m - 1, "At")
    return chain(*step_coeffs(E, wcur, wprev, vv, which))


def product(model, E, n, m=1, which="A"):
    """A(n,m), D(n,m), At(n,m) (ScaledMatrix2x2) or w(n,m), r(n,m) (ScaledScalar).

    For n < 0 the matrix kinds follow A(n,m) = A(-n, n+m)^{-1}, so that with
    m = 1 this is A(n) = A(-n, n+1)^{-1}; n = 0 gives the identity.
    """
    n, m = int(n), int(m)
    if which in ("w", "r"):
        if n < 1:
            raise DomainError("scalar products need n >= 1")
        if which == "w":
            w, _ = model.sample(m, m + n)
        else:
            w, _ = model.sample(m + 1, m + n + 1)
            w0, _ = model.sample(m, m + 1)
        if np.any(w == 0):
            raise SingularStep("scalar product hits an exact zero")
        phase = complex(np.exp(1j * math.fsum(np.angle(w))))
        if which == "w":
            return ScaledScalar(phase, math.fsum(np.log(np.abs(w))))
        # |r(n,m)| telescopes to sqrt(|w_{m+n}| / |w_m|)
        lm = 0.5 * (math.log(abs(w[-1])) - math.log(abs(w0[0])))
        return ScaledScalar(phase, lm)
    if which not in ("A", "D", "At"):
        raise DomainError(f"unknown product kind {which!r}")
    if n == 0:
        return ScaledMatrix2x2.identity()
    if n < 0:
        return _matrix_product(model, E, -n, n + m, which).inverse()
    return _matrix_product(model, E, n, m, which)


def random_phases(k, seed):
    return tuple(float(x) for x in np.random.default_rng(seed).random(k))


def lyapunov_birkhoff(model, E, n, thetas, method="auto"):
    """Mean over phases of (1/n) ln ||A(n; theta)||, with A(n; theta) = A(n, 0).

    ``method`` 'Dw' evaluates (1/n)(ln||D(n)|| - ln|w(n)|), which is the same
    quantity but never divides by a single small w_j; 'auto' picks it when c
    vanishes somewhere on the circle.
    """
    if n < 1000:
        raise DomainError("Birkhoff estimate needs n >= 1000")
    if len(thetas) < 4:
        raise DomainError("need at least 4 phases")
    if method == "auto":
        method = "Dw" if model.c_has_zeros() else "A"
    vals = []
    for th in thetas:
        mt = model.with_theta(th)
        if method == "A":
            vals.append(product(mt, E, n, 0, "A").log_norm() / n)
        else:
            Dn = product(mt, E, n, 0, "D")
            wn = product(mt, E, n, 0, "w")
            vals.append((Dn.log_norm() - wn.log_mag) / n)
    arr = np.array(vals)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr)))
    return LyapunovEstimate(float(E), int(n), tuple(float(t) for t in thetas), tuple(vals),
                            float(arr.mean()), se, method)


def T_matrix(w):
    """diag(1, w/|w|): the branch of sqrt(w / conj w) that makes At real."""
    return np.diag([1.0, w / abs(w)]).astype(complex)


@dataclass(frozen=True)
class Regularized:
    At: ScaledMatrix2x2
    r: ScaledScalar
    T_end: np.ndarray
    T_start: np.ndarray
    A: ScaledMatrix2x2
    residual: float


def regularize_product(model, E, n, m, tol=1e-8):
    """At(n,m) built stepwise, with r(n, m-1), T_{n+m-1}, T_{m-1} and the conjugacy residual.

    The residual is ||At - r T_{n+m-1}^{-1} A(n,m) T_{m-1}|| / ||At||; it is
    asserted to be below ``tol``.
    """
    if n < 1:
        raise DomainError("n >= 1 required")
    At = product(model, E, n, m, "At")
    A = product(model, E, n, m, "A")
    r = product(model, E, n, m - 1, "r")
    w_end, _ = model.sample(n + m - 1, n + m)
    w_start, _ = model.sample(m - 1, m)
    Te, Ts = T_matrix(w_end[0]), T_matrix(w_start[0])
    rhs = A.conj_by(np.linalg.inv(Te), Ts).scale(r)
    res = At.rel_distance(rhs)
    if not res <= tol:
        raise AssertionError(f"conjugacy residual {res:.3e} above {tol:g}")
    return Regularized(At, r, Te, Ts, A, res)


# ---------------------------------------------------------------- q-scale checks

def _block_matrices(model, E, q, starts, which):
    """Batch of q-step products starting at each site in ``starts``."""
    starts = np.asarray(starts)
    lo, hi = int(starts.min()) - 1, int(starts.max()) + q
    w, v = model.sample(lo, hi)
    idx = (starts - lo)[None, :] + np.arange(q)[:, None]
    wcur, wprev, vv = w[idx], w[idx - 1], v[idx]
    return batch_chain(*step_coeffs(E, wcur, wprev, vv, which))


def batch_max_log_norm(al, be, ga):
    """Like ``batch_chain`` but also returns max over r < steps of ln||partial product of r steps||.

    The empty product (r = 0, the identity) counts, so the maximum is >= 0.
    """
    al, be, ga = np.asarray(al), np.asarray(be), np.asarray(ga)
    B = al.shape[1]
    a = np.ones(B, dtype=complex)
    b = np.zeros(B, dtype=complex)
    c = np.zeros(B, dtype=complex)
    d = np.ones(B, dtype=complex)
    ls = np.zeros(B)
    best = np.zeros(B)
    for j in range(al.shape[0]):
        x, y, z = al[j], be[j], ga[j]
        a, b, c, d = x * a + y * c, x * b + y * d, z * a, z * b
        m = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
        a, b, c, d = a / m, b / m, c / m, d / m
        ls += np.log(m)
        if j < al.shape[0] - 1:
            hs = np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2
            dt = np.abs(a * d - b * c)
            s2 = 0.5 * (hs + np.sqrt(np.maximum(hs * hs - 4 * dt * dt, 0.0)))
            best = np.maximum(best, ls + 0.5 * np.log(s2))
    ent = np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)
    return ent, ls, best


def measure_lambda(model, q, M, E=None):
    """Smallest Lambda >= 0 meeting the scale-q premises on |m| <= M.

    Always includes the block lower bound prod_{j=m}^{m+q-1} |w_j| >= e^{-Lambda q}.
    When ``E`` is given it also includes the induced growth bounds
    ||A(q,m)|| <= e^{2 Lambda q} and max_{r<q} ||A(r,m)|| <= e^{3 Lambda q}
    (for the shift m+q as well).  Returns a dict with each component.
    """
    w, _ = model.sample(-M, M + q)
    lw = np.log(np.abs(w))
    cs = np.concatenate([[0.0], np.cumsum(lw)])
    blocks = cs[q:q + 2 * M + 1] - cs[:2 * M + 1]
    out = {"lower": max(0.0, float(-blocks.min() / q))}
    if E is not None:
        starts = np.arange(-M, M + q + 1)
        lo, hi = -M - 1, M + 2 * q
        ww, vv = model.sample(lo, hi)
        idx = (starts - lo)[None, :] + np.arange(q)[:, None]
        ent, ls, best = batch_max_log_norm(*step_coeffs(E, ww[idx], ww[idx - 1], vv[idx], "A"))
        full = batch_log_norm(ent, ls)
        out["growth_q"] = max(0.0, float(full.max() / (2 * q)))
        out["growth_r"] = max(0.0, float(best.max() / (3 * q)))
    out["Lambda"] = max(out.values())
    return out


@dataclass(frozen=True)
class BoundCheck:
    name: str
    observed: float
    bound: float
    worst_m: int

    @property
    def passed(self):
        return self.observed < self.bound or (self.observed == 0 and self.bound == 0)

    def as_dict(self):
        return {"name": self.name, "observed": self.observed, "bound": self.bound,
                "worst_m": self.worst_m, "pass": self.passed}


def _safe_exp(x):
    return math.exp(x) if x < 709 else math.inf


def regularity_bounds_check(model, q, M, beta, Lam, E=0.0):
    """Near-periodicity of r, T, A, At and the trace gap at scale q over |m| <= M.

    Each observed maximum is paired with its bound:
      ||r^{+-}(q,m)| - 1|              < e^{-(beta-2 Lam) q}
      ||T_{m+q}^{-1} T_m - I||         < 4 e^{-(beta-2 Lam) q}
      ||A(q,m) - A(q,m+q)||            <= e^{-(beta-6 Lam) q}
      ||At(q,m) - At(q,m+q)||          <= e^{-(beta-6 Lam) q}
      ||Tr At(q,m)| - |Tr A(q,m)||     < 12 e^{-(beta-4 Lam) q}
    """
    if M * q > PRODUCT_CAP:
        raise WindowTooLarge(f"M*q = {M * q} exceeds the window cap {PRODUCT_CAP}")
    ms = np.arange(-M, M + 1)
    w, _ = model.sample(-M - 1, M + 2 * q + 1)
    zs = model.zero_sites(w, -M - 1)
    if zs:
        raise SingularStep(f"w vanishes at site {zs[0]}", index=zs[0])
    aw = np.abs(w)
    off = M + 1
    # |r(q,m)| = sqrt(|w_{m+q}| / |w_m|)
    rabs = np.sqrt(aw[ms + q + off] / aw[ms + off])
    rdev = np.maximum(np.abs(rabs - 1), np.abs(1 / rabs - 1))
    z = w[ms + off] / w[ms + q + off]
    tdev = np.abs(z / np.abs(z) - 1)

    out = []
    e2 = _safe_exp(-(beta - 2 * Lam) * q)
    e6 = _safe_exp(-(beta - 6 * Lam) * q)
    e4 = _safe_exp(-(beta - 4 * Lam) * q)
    i = int(np.argmax(rdev))
    out.append(BoundCheck("r", float(rdev[i]), e2, int(ms[i])))
    i = int(np.argmax(tdev))
    out.append(BoundCheck("T", float(tdev[i]), 4 * e2, int(ms[i])))

    starts = np.arange(-M, M + q + 1)
    logs = {}
    for kind in ("A", "At"):
        ent, ls = _block_matrices(model, E, q, starts, kind)
        logs[kind] = (ent, ls)
        X, Y = ent[:2 * M + 1], ent[q:q + 2 * M + 1]
        lx, ly = ls[:2 * M + 1], ls[q:q + 2 * M + 1]
        ref = np.maximum(lx, ly)
        diff = X * np.exp(lx - ref)[:, None, None] - Y * np.exp(ly - ref)[:, None, None]
        dn = np.linalg.svd(diff, compute_uv=False)[:, 0] * np.exp(ref)
        i = int(np.argmax(dn))
        out.append(BoundCheck(kind, float(dn[i]), e6, int(ms[i])))
    ta = np.exp(batch_log_abs_trace(*logs["A"]))[:2 * M + 1]
    tt = np.exp(batch_log_abs_trace(*logs["At"]))[:2 * M + 1]
    gap = np.abs(tt - ta)
    i = int(np.argmax(gap))
    out.append(BoundCheck("trace", float(gap[i]), 12 * e4, int(ms[i])))
    return {"q": q, "M": M, "beta": beta, "Lambda": Lam, "E": E,
            "checks": out, "pass": all(c.passed for c in out)}


@dataclass(frozen=True)
class TraceRow:
    E: float
    trace_abs: float
    gap_to_2: float
    label: str
    trace_tilde_abs: float
    tilde_gap: float


def trace_classify(model, q, E_grid, Lam, exponent=60.0, m=1):
    """Label each E by |Tr A(q,m;E)|: S1 (> 2 + 2 eta), S2 (|.-2| < 2 eta), else elliptic-strict.

    eta = e^{-exponent * Lam * q}.  Values exactly at 2 + 2 eta count as S1's
    complement and fall into elliptic-strict only when |Tr| < 2.
    """
    E_grid = np.asarray(E_grid, dtype=float)
    w, v = model.sample(m - 1, m + q)
    _check_zeros(model, w, m - 1, "At")
    eta = math.exp(-exponent * Lam * q)
    res = {}
    for kind in ("A", "At"):
        al, be, ga = step_coeffs(E_grid[None, :], w[1:, None], w[:-1, None], v[1:, None], kind)
        be = np.broadcast_to(be, al.shape)
        ga = np.broadcast_to(ga, al.shape)
        ent, ls = batch_chain(al, be, ga)
        res[kind] = np.exp(batch_log_abs_trace(ent, ls))
    rows = []
    for E, t, tt in zip(E_grid, res["A"], res["At"]):
        g = abs(t - 2)
        if t > 2 + 2 * eta:
            lab = "S1"
        elif g < 2 * eta:
            lab = "S2"
        elif t < 2:
            lab = "elliptic-strict"
        else:
            lab = "S1-edge"
        rows.append(TraceRow(float(E), float(t), float(g), lab, float(tt), float(abs(tt - t))))
    return rows


# ---------------------------------------------------------------- powers of SL(2,R)

def diagonalize(G):
    """G = B diag(rho, 1/rho) B^{-1} with |det B| = 1 and ||B|| minimal; needs |Tr G| > 2."""
    G = np.asarray(G, dtype=float)
    t = G[0, 0] + G[1, 1]
    if abs(t) <= 2:
        raise DegenerateDiagonalization(f"|Tr G| = {abs(t)} <= 2: no real diagonalization")
    rho = (t + math.copysign(math.sqrt(t * t - 4), t)) / 2
    vecs = []
    for lam in (rho, 1 / rho):
        c1 = np.array([G[0, 1], lam - G[0, 0]])
        c2 = np.array([lam - G[1, 1], G[1, 0]])
        x = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        vecs.append(x / np.linalg.norm(x))
    B = np.column_stack(vecs)
    B = B / math.sqrt(abs(np.linalg.det(B)))
    return rho, B


def power_coefficients(trace, k):
    """(s_k, c_k) with G^k = s_k (G - Tr/2 I) + c_k I for G in SL(2,R)."""
    if abs(trace) == 2:
        sg = math.copysign(1.0, trace)
        return k * sg ** (k - 1), sg ** k
    if abs(trace) > 2:
        rho = (trace + math.copysign(math.sqrt(trace * trace - 4), trace)) / 2
        return (rho ** k - rho ** -k) / (rho - 1 / rho), (rho ** k + rho ** -k) / 2
    psi = math.acos(trace / 2)
    return math.sin(k * psi) / math.sin(psi), math.cos(k * psi)


def hyperbolic_power_growth(G, N):
    """Power-growth diagnostics of a real unimodular 2x2 matrix.

    |Tr| > 2: diagonalization and ||B|| against sqrt||G|| / sqrt(|Tr| - 2)
    (doubled when |Tr| > 6).  |Tr| < 2: rotation form with coefficients
    sin(j psi)/sin(psi) and cos(j psi).  |Tr| = 2: G^k = k(G - I) + I.
    In every case the expansion is compared with explicit powers for j <= N,
    and the linear-window ratios s_j/j are reported for the sign-normalized
    matrix over j <= 1/tau with tau = ||Tr| - 2| (capped at N).
    """
    if isinstance(G, ScaledMatrix2x2):
        G = G.array()
    G = np.asarray(G)
    if np.iscomplexobj(G):
        if np.max(np.abs(G.imag)) > 1e-12 * np.max(np.abs(G)):
            raise DomainError("matrix must be real")
        G = G.real
    det = float(np.linalg.det(G))
    if abs(det - 1) > 1e-10 * max(1.0, float(np.linalg.norm(G)) ** 2):
        raise DomainError(f"det G = {det} is not 1")
    t = float(G[0, 0] + G[1, 1])
    normG = float(np.linalg.norm(G, 2))
    out = {"trace": t, "norm": normG}
    if abs(t) > 2:
        rho, B = diagonalize(G)
        nb = float(np.linalg.norm(B, 2))
        bound = math.sqrt(normG) / math.sqrt(abs(t) - 2) * (2 if abs(t) > 6 else 1)
        out.update(kind="hyperbolic", rho=rho, B_norm=nb, B_bound=bound,
                   B_pass=nb <= bound,
                   diag_residual=float(np.linalg.norm(B @ np.diag([rho, 1 / rho])
                                                      @ np.linalg.inv(B) - G)))
    elif abs(t) < 2:
        out.update(kind="elliptic", psi=math.acos(t / 2))
    else:
        out.update(kind="parabolic")
    worst = 0.0
    P = np.eye(2)
    I = np.eye(2)
    for j in range(1, N + 1):
        P = P @ G
        s, c = power_coefficients(t, j)
        if abs(t) == 2:
            sg = math.copysign(1.0, t)
            X = sg ** (j - 1) * (j * (G - sg * I)) + sg ** j * I
        else:
            X = s * (G - t / 2 * I) + c * I
        worst = max(worst, float(np.linalg.norm(P - X) / max(1.0, np.linalg.norm(P))))
    out["expansion_residual"] = worst
    tau = abs(abs(t) - 2)
    K = N if tau == 0 else max(1, min(N, int(1 / tau)))
    ta = abs(t)
    ratios = [power_coefficients(ta, k)[0] / k for k in range(1, K + 1)]
    cos_terms = [power_coefficients(ta, k)[1] for k in range(1, K + 1)]
    out.update(window=K, linear_ratio_min=min(ratios), linear_ratio_max=max(ratios),
               even_term_min=min(cos_terms), even_term_max=max(cos_terms))
    return out


# ---------------------------------------------------------------- trace polynomials

def trace_D(model, q, E, m=1):
    """Tr D(q, m; E) for a scalar or array of energies."""
    Es = np.atleast_1d(np.asarray(E, dtype=float))
    out = np.array([product(model, float(e), q, m, "D").trace() for e in Es])
    return out if np.ndim(E) else complex(out[0])


def _trace_D_mp(w, v, E):
    M = mpmath.eye(2)
    for k in range(1, len(w)):
        D = mpmath.matrix([[E - v[k], -mpmath.conj(w[k - 1])], [w[k], 0]])
        M = D * M
    return M[0, 0] + M[1, 1]


def trace_polynomial(model, q, m=1, span=None, prec=256):
    """Degree-q interpolant of E -> Tr D(q, m; E) through q+1 Chebyshev nodes.

    Tr D(q) is a polynomial of degree q in E.  Node values come from an
    mpmath product of the sampled steps and the interpolant is evaluated in
    barycentric form at ``prec`` bits; the trace is huge near the ends of
    ``span``, so a double-precision fit would lose the interior values.
    ``span`` defaults to [-B, B] with B the operator norm bound.
    """
    if q < 1:
        raise DomainError("q >= 1 required")
    if span is None:
        B = float(model.norm_bound())
        span = (-B, B)
    w, v = model.sample(m - 1, m + q)
    with mpmath.workprec(prec):
        lo, hi = mpmath.mpf(span[0]), mpmath.mpf(span[1])
        ws = [mpmath.mpc(x) for x in w]
        vs = [mpmath.mpf(float(x)) for x in v]
        ang = [(2 * j + 1) * mpmath.pi / (2 * q + 2) for j in range(q + 1)]
        xs = [lo + (hi - lo) * (mpmath.cos(a) + 1) / 2 for a in ang]
        bw = [(-1) ** j * mpmath.sin(a) for j, a in enumerate(ang)]
        fs = [_trace_D_mp(ws, vs, x) for x in xs]

    def p(E):
        out = []
        with mpmath.workprec(prec):
            for e in np.atleast_1d(np.asarray(E, dtype=float)):
                e = mpmath.mpf(float(e))
                num = den = mpmath.mpf(0)
                for x, b, f in zip(xs, bw, fs):
                    if e == x:
                        num, den = f, 1
                        break
                    t = b / (e - x)
                    num += t * f
                    den += t
                out.append(complex(num / den))
        out = np.array(out)
        return out if np.ndim(E) else complex(out[0])
    return p
