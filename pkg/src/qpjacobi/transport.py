"""Wavepacket spreading on a finite box and transport exponents.

psi(t) = e^{-itH} delta_0 is propagated by a Chebyshev expansion of the
time step.  Abel-averaged moments

    <|X|^p>(T) = (2/T) int_0^inf e^{-2t/T} sum_n |n|^p |psi_n(t)|^2 dt

are integrated on the snapshot grid up to t = 6T, and the exponents are
windowed slopes of ln <|X|^p> against p ln T.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, gammaincc, jv

from .errors import DomainError, GridTooCoarse, LeakageExceeded, RangeTooShort

SITE_CAP = 100_000
STEP_TOL = 1e-10
RUN_TOL = 1e-10
LEAK_TOL = 1e-6
CUT = 6.0
PER_EFOLD = 8
STORE_CAP = 20_000_000
DROP = 1e-30


class Box:
    """H restricted to sites -L..L (Dirichlet), applied as a tridiagonal matvec."""

    def __init__(self, model, L):
        L = int(L)
        if L < 0 or 2 * L + 1 > SITE_CAP:
            raise DomainError(f"box half-width {L} outside [0, {(SITE_CAP - 1) // 2}]")
        self.L = L
        w, v = model.sample(-L, L + 1)
        self.w = w[:-1].copy()
        self.wc = np.conj(self.w)
        self.v = v.astype(float)
        self.sites = np.arange(-L, L + 1)
        radius = np.zeros(2 * L + 1)
        radius[:-1] += np.abs(self.w)
        radius[1:] += np.abs(self.w)
        lo, hi = float(np.min(self.v - radius)), float(np.max(self.v + radius))
        self.center = 0.5 * (lo + hi)
        self.half = max(0.5 * (hi - lo), 1e-12)

    def apply(self, psi, lo=0):
        """H psi for psi supported on sites lo..lo+len(psi)-1 of the box (Dirichlet ends)."""
        hi = lo + len(psi)
        out = self.v[lo:hi] * psi
        out[:-1] += self.w[lo:hi - 1] * psi[1:]
        out[1:] += self.wc[lo:hi - 1] * psi[:-1]
        return out

    def energy(self, psi):
        return float(np.real(np.vdot(psi, self.apply(psi))))


def chebyshev_terms(z, tol=STEP_TOL):
    """Number of terms K with a certified tail sum_{k>=K} 2|J_k(z)| <= tol.

    For k > z/2, |J_k(z)| <= (z/2)^k / k!, and the ratio of consecutive
    bounds is below z / (2(K+1)) < 1/2 once K >= z.
    """
    z = abs(z)
    K = max(int(math.ceil(z)), 1)
    while True:
        logb = K * math.log(z / 2) - math.lgamma(K + 1) if z > 0 else -math.inf
        r = z / (2 * (K + 1))
        if r < 0.5 and math.log(4.0) + logb - math.log1p(-r) <= math.log(tol):
            return K
        K += 1


class Propagator:
    """Fixed-step e^{-i tau H} by a Chebyshev series."""

    def __init__(self, box, tau, tol=STEP_TOL):
        self.box = box
        self.tau = float(tau)
        z = self.tau * box.half
        self.K = chebyshev_terms(z, tol)
        k = np.arange(self.K)
        c = jv(k, z) * (-1j) ** k
        c[1:] *= 2
        self.coeffs = c * np.exp(-1j * self.tau * box.center)

    def _scaled(self, psi, lo):
        b = self.box
        return (b.apply(psi, lo) - b.center * psi) / b.half

    def step(self, psi, lo=0):
        """One step of a vector living on box indices lo..lo+len(psi)-1."""
        t0 = psi
        if self.K == 1:
            return self.coeffs[0] * t0
        t1 = self._scaled(psi, lo)
        out = self.coeffs[0] * t0 + self.coeffs[1] * t1
        for c in self.coeffs[2:]:
            t0, t1 = t1, 2 * self._scaled(t1, lo) - t0
            out += c * t1
        return out


@dataclass
class Snapshots:
    t: np.ndarray
    L: int
    sums: dict
    norm_error: np.ndarray
    energy: np.ndarray
    leakage: np.ndarray
    prob: np.ndarray = None
    psi_last: np.ndarray = field(default=None, repr=False)
    truncated: bool = False

    @property
    def max_norm_error(self):
        return float(np.max(self.norm_error))

    @property
    def energy_drift(self):
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def moment_sum(self, p):
        if p in self.sums:
            return self.sums[p]
        if self.prob is None:
            raise DomainError(f"p = {p} was not recorded and profiles were not kept")
        n = np.abs(np.arange(-self.L, self.L + 1)).astype(float)
        return self.prob @ n ** p


def auto_box(model, t_max):
    """L >= 4 t_max, scaled by the largest hopping amplitude."""
    amp = max(1.0, model.c_scale())
    return int(math.ceil(4 * amp * t_max)) + 1


def evolve(model, L, t_grid, p_list=(2.0,), keep=None, edge=None):
    """psi(t) = e^{-itH} delta_0 on sites -L..L at a uniform time grid starting at 0.

    Records sum_n |n|^p |psi_n|^2 for each p, the norm error, <psi, H psi>
    and the mass on the outer ``edge`` sites of each end.  Profiles |psi|^2
    are kept when ``keep`` is true (default: when they fit in memory).
    Raises LeakageExceeded (carrying the snapshots so far) when the edge mass
    passes 1e-6.  The per-step truncation tolerance is the smaller of 1e-10
    and 1e-10 / steps.
    """
    t = np.asarray(t_grid, dtype=float)
    if t[0] != 0 or len(t) < 2:
        raise DomainError("time grid must start at 0 and have >= 2 points")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, t[-1]):
        raise DomainError("time grid must be uniform")
    box = Box(model, L)
    # truncation errors add up over the steps, so the run shares one budget
    prop = Propagator(box, dt[0], min(STEP_TOL, RUN_TOL / (len(t) - 1)))
    S = 2 * box.L + 1
    if keep is None:
        keep = S * len(t) <= STORE_CAP
    edge = edge or max(2, box.L // 100)
    absn = np.abs(box.sites).astype(float)
    weights = {float(p): absn ** p for p in p_list}

    psi = np.zeros(S, dtype=complex)
    psi[box.L] = 1.0
    sums = {p: np.empty(len(t)) for p in weights}
    nerr, en, leak = np.empty(len(t)), np.empty(len(t)), np.empty(len(t))
    prob = np.empty((len(t), S)) if keep else None

    # psi vanishes (below DROP) outside box indices [a, b); a step of K terms
    # reaches at most K - 1 sites further, so propagating on [a-K, b+K) is exact
    a, b = box.L, box.L + 1

    def record(i):
        sub = psi[a:b]
        pr = np.abs(sub) ** 2
        for p, wgt in weights.items():
            sums[p][i] = float(pr @ wgt[a:b])
        nerr[i] = abs(math.sqrt(float(pr.sum())) - 1.0)
        en[i] = float(np.real(np.vdot(sub, box.apply(sub, a))))
        edge_mass = np.abs(psi[:edge]) ** 2, np.abs(psi[-edge:]) ** 2
        leak[i] = float(edge_mass[0].sum() + edge_mass[1].sum()) if box.L > 0 else 0.0
        if keep:
            prob[i] = np.abs(psi) ** 2

    def snap(upto, truncated=False):
        return Snapshots(t[:upto], box.L, {p: s[:upto] for p, s in sums.items()},
                         nerr[:upto], en[:upto], leak[:upto],
                         prob[:upto] if keep else None, psi.copy(), truncated)

    record(0)
    for i in range(1, len(t)):
        lo, hi = max(0, a - prop.K), min(S, b + prop.K)
        psi[lo:hi] = prop.step(psi[lo:hi], lo)
        big = np.flatnonzero(np.abs(psi[lo:hi]) > DROP)
        a, b = lo + int(big[0]), lo + int(big[-1]) + 1
        psi[lo:a] = 0
        psi[b:hi] = 0
        record(i)
        if leak[i] > LEAK_TOL:
            raise LeakageExceeded(f"edge mass {leak[i]:.2e} at t = {t[i]:g}",
                                  snapshots=snap(i, True))
    return snap(len(t))


@dataclass
class MomentSeries:
    p: float
    T: np.ndarray
    values: np.ndarray
    quad_error: np.ndarray
    tail_estimate: np.ndarray
    L: int
    leakage: float
    truncated: bool = False

    def as_rows(self):
        return [(float(T), float(v)) for T, v in zip(self.T, self.values)]


def moments(snaps, p, T_grid, cut=CUT):
    """Abel averages at each T by composite Simpson on the snapshot grid up to cut*T.

    ``quad_error`` is |Simpson - trapezoid|.  ``tail_estimate`` extends the
    last recorded moment with the ballistic envelope (t/t_c)^p past the cut.
    Raises GridTooCoarse if the step exceeds T/16 or the run stops before cut*T.
    """
    T_grid = np.asarray(T_grid, dtype=float)
    t = snaps.t
    dt = t[1] - t[0]
    m = snaps.moment_sum(float(p))
    vals, errs, tails = [], [], []
    for T in T_grid:
        if dt > T / (2 * PER_EFOLD):
            raise GridTooCoarse(f"step {dt:g} does not resolve e^(-2t/T) at T = {T:g}")
        n_cut = int(math.floor(cut * T / dt + 1e-9))
        if n_cut >= len(t):
            raise GridTooCoarse(f"snapshots end at {t[-1]:g} < {cut:g}T = {cut * T:g}")
        if n_cut % 2:
            n_cut -= 1
        y = (2.0 / T) * np.exp(-2 * t[:n_cut + 1] / T) * m[:n_cut + 1]
        simpson = dt / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
        trap = dt * (y.sum() - 0.5 * (y[0] + y[-1]))
        tc = t[n_cut]
        # int_tc^inf (2/T) e^{-2t/T} m(tc) (t/tc)^p dt, via the upper incomplete gamma
        if m[n_cut] > 0 and tc > 0:
            s = 2 * tc / T
            tail = m[n_cut] * s ** (-p) * gamma(p + 1) * gammaincc(p + 1, s)
        else:
            tail = 0.0
        vals.append(simpson)
        errs.append(abs(simpson - trap))
        tails.append(tail)
    return MomentSeries(float(p), T_grid, np.array(vals), np.array(errs), np.array(tails),
                        snaps.L, float(np.max(snaps.leakage)), snaps.truncated)


@dataclass
class ExponentFit:
    beta_minus: float
    beta_plus: float
    windows: list
    degenerate: bool = False

    def as_dict(self):
        return {"beta_minus": self.beta_minus, "beta_plus": self.beta_plus,
                "degenerate": self.degenerate,
                "windows": [dict(w) for w in self.windows]}


def transport_exponents(series, window=0.5, stride=None, min_decades=1.5):
    """Extreme least-squares slopes of ln<|X|^p> against p ln T.

    Windows span ``window`` decades and slide (by a grid point, or
    ``stride`` decades) across the upper half of the log-T range.
    """
    T, y = series.T, series.values
    lt = np.log10(T)
    if lt[-1] - lt[0] < min_decades - 1e-9:
        raise RangeTooShort(f"{lt[-1] - lt[0]:.2f} decades of T, need {min_decades}")
    if np.all(y == 0):
        return ExponentFit(0.0, 0.0, [], degenerate=True)
    if np.any(y <= 0):
        raise DomainError("moments must be positive for a log fit")
    mid = 0.5 * (lt[0] + lt[-1])
    starts = lt[(lt >= mid - 1e-12) & (lt + window <= lt[-1] + 1e-9)]
    if stride:
        starts = np.arange(mid, lt[-1] - window + 1e-9, stride)
    if not len(starts):
        raise RangeTooShort("upper half of the range is shorter than one window")
    rows = []
    for s in starts:
        sel = (lt >= s - 1e-12) & (lt <= s + window + 1e-12)
        if sel.sum() < 3:
            continue
        x = series.p * np.log(T[sel])
        A = np.vstack([x, np.ones_like(x)]).T
        coef, res, *_ = np.linalg.lstsq(A, np.log(y[sel]), rcond=None)
        resid = float(np.max(np.abs(A @ coef - np.log(y[sel]))))
        rows.append({"T_lo": float(10 ** s), "T_hi": float(10 ** (s + window)),
                     "slope": float(coef[0]), "residual": resid})
    if not rows:
        raise RangeTooShort("no window holds 3 or more T points")
    slopes = [r["slope"] for r in rows]
    return ExponentFit(float(min(slopes)), float(max(slopes)), rows)


@dataclass
class TransportRun:
    series: MomentSeries
    fit: ExponentFit
    snaps: Snapshots
    dt: float
    L: int


def run_transport(model, p=2.0, T_lo=10 ** 1.5, T_hi=1e3, points=None, box="auto", dt=None,
                  cut=CUT):
    """Evolve, integrate and fit in one go.

    On leakage the T-range is truncated to what the snapshots still cover
    and the series is flagged.
    """
    decades = math.log10(T_hi / T_lo)
    points = points or max(int(round(12 * decades)) + 1, 3)
    T = np.logspace(math.log10(T_lo), math.log10(T_hi), points)
    dt = dt or min(T_lo / (2 * PER_EFOLD), 1.0)
    t_max = cut * T_hi
    steps = int(math.ceil(t_max / dt)) + 2
    t = dt * np.arange(steps)
    L = auto_box(model, t_max) if box == "auto" else int(box)
    try:
        snaps = evolve(model, L, t, (float(p),))
    except LeakageExceeded as e:
        snaps = e.snapshots
        T = T[cut * T <= snaps.t[-1] - 2 * dt]
        if len(T) < 3:
            raise
    series = moments(snaps, p, T, cut)
    fit = transport_exponents(series)
    return TransportRun(series, fit, snaps, dt, L)
