"""Operator models: sampling functions, the extended Harper's model and box spectra.

The operator is

    (H u)_n = w_n u_{n+1} + conj(w_{n-1}) u_{n-1} + v_n u_n,

with w_n = c(theta + n alpha) and v_n = v(theta + n alpha).
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DomainError, NonAnalyticInput, Unclassifiable, WindowTooLarge

TWO_PI = 2.0 * math.pi
WINDOW_CAP = 10_000_000
BOX_CAP = 20_000


class SamplingFunction:
    """1-periodic function on the circle.

    ``width`` is the analyticity width rho (``math.inf`` for trig polynomials,
    ``None`` when no analytic extension is known).
    """
    kind = "abstract"
    width = None
    real = False

    def __call__(self, theta):
        raise NotImplementedError

    def conj_ext(self, theta):
        """Analytic extension of conj(f): theta -> conj(f(conj(theta)))."""
        raise NonAnalyticInput(f"{self.kind} sampling function has no analytic extension")

    def sup_bound(self):
        raise NotImplementedError

    def zeros(self):
        """Zeros on the circle as a sorted list of phases in [0,1)."""
        return []

    def describe(self):
        return {"kind": self.kind}


class TrigPolynomial(SamplingFunction):
    """f(theta) = sum_k coeffs[k] exp(2 pi i k theta)."""
    kind = "trig-polynomial"
    width = math.inf

    def __init__(self, coeffs, kind=None):
        self.coeffs = {int(k): complex(c) for k, c in coeffs.items() if c != 0}
        if not self.coeffs:
            self.coeffs = {0: 0j}
        if kind:
            self.kind = kind
        self.real = all(abs(self.coeffs.get(-k, 0) - c.conjugate()) <= 1e-15 * (1 + abs(c))
                        for k, c in self.coeffs.items())

    @property
    def degree(self):
        return max(abs(k) for k in self.coeffs)

    def _eval(self, coeffs, theta):
        theta = np.asarray(theta)
        out = np.zeros(theta.shape, dtype=complex)
        for k, c in coeffs.items():
            if k == 0:
                out += c
            else:
                out += c * np.exp(1j * TWO_PI * k * theta)
        return out

    def __call__(self, theta):
        out = self._eval(self.coeffs, theta)
        if self.real and np.isrealobj(theta):
            return out.real
        return out

    def conj_ext(self, theta):
        return self._eval({-k: c.conjugate() for k, c in self.coeffs.items()}, theta)

    def sup_bound(self):
        return sum(abs(c) for c in self.coeffs.values())

    def _poly(self):
        kmin, kmax = min(self.coeffs), max(self.coeffs)
        # highest power first, in z = exp(2 pi i theta), after factoring z^kmin
        return np.array([self.coeffs.get(k, 0j) for k in range(kmax, kmin - 1, -1)])

    def roots(self):
        p = self._poly()
        return np.roots(p) if len(p) > 1 else np.array([])

    def zeros(self, tol=1e-6):
        out = [(np.angle(z) / TWO_PI) % 1.0 for z in self.roots() if abs(abs(z) - 1) < tol]
        return sorted(out)

    def mean_log_abs(self):
        """Integral of ln|f| over the circle, by Jensen's formula."""
        p = self._poly()
        lead = np.flatnonzero(p)[0]
        return math.log(abs(p[lead])) + sum(math.log(abs(z)) for z in np.roots(p[lead:])
                                            if abs(z) > 1)

    def describe(self):
        return {"kind": self.kind,
                "coeffs": [[k, c.real, c.imag] for k, c in sorted(self.coeffs.items())]}


def constant(value):
    return TrigPolynomial({0: value}, kind="constant")


def cosine(coupling, shift=0.0):
    """2 * coupling * cos 2 pi (theta + shift)."""
    ph = np.exp(1j * TWO_PI * shift)
    return TrigPolynomial({1: coupling * ph, -1: coupling * np.conj(ph)}, kind="cosine")


class ZeroProduct(SamplingFunction):
    """f(theta) = g(theta) * prod_l |sin pi(theta - theta_l)|^tau_l."""
    kind = "composite"

    def __init__(self, g, zeros, orders):
        if len(zeros) != len(orders):
            raise DomainError("zeros and orders differ in length")
        if any(not 0 < t <= 1 for t in orders):
            raise DomainError("orders must lie in (0,1]")
        self.g = g
        self.zero_list = [float(z) % 1.0 for z in zeros]
        self.orders = [float(t) for t in orders]
        self.real = g.real

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.asarray(self.g(theta))
        for z, t in zip(self.zero_list, self.orders):
            out = out * np.abs(np.sin(math.pi * (theta - z))) ** t
        return out

    def sup_bound(self):
        return self.g.sup_bound()

    def zeros(self):
        return sorted(self.zero_list)

    def describe(self):
        return {"kind": self.kind, "g": self.g.describe(), "zeros": self.zero_list,
                "orders": self.orders}


@dataclass(frozen=True)
class Window:
    """Sampled weights on the sites lo..lo+len(w)-1."""
    lo: int
    w: np.ndarray
    v: np.ndarray
    zeros: tuple

    @property
    def hi(self):
        return self.lo + len(self.w) - 1


@dataclass(frozen=True)
class OperatorModel:
    """Quasiperiodic model (c, v, alpha, theta) or explicit arrays starting at ``offset``."""
    c: SamplingFunction = None
    v: SamplingFunction = None
    alpha: float = 0.0
    theta: float = 0.0
    w_explicit: np.ndarray = None
    v_explicit: np.ndarray = None
    offset: int = 0
    label: str = "custom"
    zero_tol: float = 1e-13
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def explicit(self):
        return self.w_explicit is not None

    def with_theta(self, theta):
        return replace(self, theta=float(theta))

    def phases(self, lo, hi):
        j = np.arange(lo, hi, dtype=float)
        return np.mod(self.theta + j * self.alpha, 1.0)

    def sample(self, lo, hi, cap=WINDOW_CAP):
        """(w_j, v_j) for lo <= j < hi."""
        if hi - lo > cap:
            raise WindowTooLarge(f"window of {hi - lo} sites exceeds cap {cap}")
        if self.explicit:
            a, b = lo - self.offset, hi - self.offset
            if a < 0 or b > len(self.w_explicit):
                raise DomainError(f"sites [{lo},{hi}) outside explicit arrays")
            return (np.asarray(self.w_explicit[a:b], dtype=complex),
                    np.asarray(self.v_explicit[a:b], dtype=float))
        th = self.phases(lo, hi)
        w = np.asarray(self.c(th), dtype=complex)
        v = np.real(np.asarray(self.v(th)))
        return w, v

    def c_scale(self):
        if self.explicit:
            return float(np.max(np.abs(self.w_explicit))) if len(self.w_explicit) else 1.0
        return self.c.sup_bound()

    def zero_sites(self, w, lo):
        tol = self.zero_tol * max(self.c_scale(), 1e-300)
        return tuple(int(lo + i) for i in np.flatnonzero(np.abs(w) <= tol))

    def norm_bound(self):
        if self.explicit:
            return 2 * float(np.max(np.abs(self.w_explicit))) + float(np.max(np.abs(self.v_explicit)))
        return 2 * self.c.sup_bound() + self.v.sup_bound()

    def c_has_zeros(self):
        if self.explicit:
            return bool(self.zero_sites(self.w_explicit, self.offset))
        return bool(self.c.zeros())

    def describe(self):
        if self.explicit:
            return {"label": self.label, "explicit": True, "offset": self.offset,
                    "sites": len(self.w_explicit)}
        d = {"label": self.label, "alpha": self.alpha, "theta": self.theta,
             "c": self.c.describe(), "v": self.v.describe()}
        d.update(self.meta)
        return d


def sample_window(model, lo, hi, cap=WINDOW_CAP):
    """Weights on the closed index range [lo, hi]; near-zeros of w are reported."""
    if hi < lo:
        raise DomainError("empty window")
    w, v = model.sample(lo, hi + 1, cap)
    return Window(lo, w, v, model.zero_sites(w, lo))


def free_laplacian():
    return OperatorModel(constant(1.0), constant(0.0), 0.0, 0.0, label="free")


def schrodinger_cos(coupling, alpha, theta=0.0):
    """c = 1, v = 2 coupling cos 2 pi theta (almost Mathieu)."""
    return OperatorModel(constant(1.0), cosine(coupling), float(alpha), float(theta),
                         label="schrodinger-cos", meta={"coupling": coupling})


def ehm_sampling(l1, l2, l3, alpha):
    """c(theta) = l1 e^{-2 pi i(theta+alpha/2)} + l2 + l3 e^{2 pi i(theta+alpha/2)}."""
    h = np.exp(1j * math.pi * alpha)
    return TrigPolynomial({-1: l1 / h, 0: l2, 1: l3 * h}, kind="ehm")


def ehm(l1, l2, l3, alpha, theta=0.0):
    lam = (float(l1), float(l2), float(l3))
    if min(lam) < 0:
        raise DomainError("couplings must be nonnegative")
    return OperatorModel(ehm_sampling(*lam, float(alpha)), cosine(1.0), float(alpha),
                         float(theta), label="ehm", meta={"lambda": list(lam)})


def trig_model(c_coeffs, v_coeffs, alpha, theta=0.0, label="custom"):
    return OperatorModel(TrigPolynomial(c_coeffs), TrigPolynomial(v_coeffs), float(alpha),
                         float(theta), label=label)


def explicit_model(w, v, offset=0, label="explicit"):
    w = np.asarray(w, dtype=complex)
    v = np.asarray(v, dtype=float)
    if w.shape != v.shape:
        raise DomainError("w and v must have the same length")
    return OperatorModel(w_explicit=w, v_explicit=v, offset=int(offset), label=label)


def read_coefficients(path):
    """Parse a coefficient file of ``k re im`` lines; '#' starts a comment."""
    coeffs = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DomainError(f"{path}:{lineno}: expected 'k re im'")
            k, re, im = int(parts[0]), float(parts[1]), float(parts[2])
            coeffs[k] = coeffs.get(k, 0) + complex(re, im)
    return coeffs


@dataclass(frozen=True)
class EHMRegion:
    r_label: str
    geo_label: str
    note: str = None


def ehm_classify(lam):
    """Spectral label R1/R2/R3 and geometric label of an EHM coupling triple.

    Comparisons are exact.  The published R-sets leave a few measure-zero
    pieces uncovered (the face l1+l3 = 0 below l2 = 1, the plane l2 = 0, and
    the lines L_I, L_III when l1 != l3); these get the label of the adjacent
    open region and ``note`` says so.
    """
    l1, l2, l3 = (float(x) for x in lam)
    if min(l1, l2, l3) < 0:
        raise DomainError("couplings must be nonnegative")
    s = l1 + l3
    if l2 == 0 and s == 0:
        raise Unclassifiable("l2 = 0 and l1 + l3 = 0")

    if s == 1 and l2 == 1:
        geo = "L_II"
    elif s == 1 and l2 < 1:
        geo = "L_I"
    elif l2 == 1 and s < 1:
        geo = "L_II"
    elif s == l2 and s > 1:
        geo = "L_III"
    elif s < 1 and l2 < 1:
        geo = "I°"
    elif l2 > max(s, 1):
        geo = "II°"
    else:
        geo = "III°"

    note = None
    if 0 < s < 1 and 0 < l2 < 1:
        r = "R1"
    elif (l2 > max(s, 1)) or (s > max(l2, 1) and l1 != l3 and l2 > 0):
        r = "R2"
    elif (s <= 1 and l2 == 1) or (s >= max(l2, 1) and l1 == l3 and l2 > 0):
        r = "R3"
    elif s == 0:
        r, note = "R1", "l1+l3 = 0 with l2 < 1: closure of R1"
    elif l2 == 0:
        if s < 1:
            r, note = "R1", "l2 = 0: closure of R1"
        elif l1 != l3:
            r, note = "R2", "l2 = 0: closure of R2"
        else:
            r, note = "R3", "l2 = 0, l1 = l3: closure of R3"
    else:
        # L_I or L_III with l1 != l3
        r, note = "R2", f"{geo} with l1 != l3: closure of R2"
    return EHMRegion(r, geo, note)


def ehm_lyapunov_formula(lam):
    """Closed-form Lyapunov exponent on the spectrum (0 outside region I)."""
    ehm_classify(lam)
    l1, l2, l3 = (float(x) for x in lam)
    s = l1 + l3
    if s > 1 or l2 > 1:
        return 0.0
    root = math.sqrt(max(1 - 4 * l1 * l3, 0.0))
    if l2 >= s:
        val = math.log((1 + root) / (l2 + math.sqrt(max(l2 * l2 - 4 * l1 * l3, 0.0))))
    elif l1 >= l3:
        val = math.log((1 + root) / (2 * l1))
    else:
        val = math.log((1 + root) / (2 * l3))
    return max(val, 0.0)


def finite_box_spectrum(model, L, cap=BOX_CAP):
    """Eigenvalues of H restricted to sites -L..L with Dirichlet boundary.

    The Hermitian truncation is gauge-equivalent to the real symmetric
    tridiagonal matrix with off-diagonals |w_n|.
    """
    n = 2 * int(L) + 1
    if n > cap:
        raise WindowTooLarge(f"box of {n} sites exceeds cap {cap}")
    w, v = model.sample(-L, L + 1)
    if n == 1:
        return np.array([v[0]])
    return eigvalsh_tridiagonal(v, np.abs(w[:-1]))


def box_matrix(model, L):
    """Dense Hermitian truncation on sites -L..L (for small boxes and tests)."""
    w, v = model.sample(-L, L + 1)
    H = np.diag(v.astype(complex))
    idx = np.arange(len(v) - 1)
    H[idx, idx + 1] = w[:-1]
    H[idx + 1, idx] = np.conj(w[:-1])
    return H
