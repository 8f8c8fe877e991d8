"""Summation identities checked numerically: the Kloosterman delta method,
Poisson summation in residue classes, and Voronoi summation (holomorphic and
Maass) with the Mellin-Barnes transform evaluated by contour quadrature.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .bump import BumpFunction, fourier_transform_direct, make_U, make_V
from .forms import CoefficientCacheError, Eigenform, MaassCoefficientFile
from .oscillatory import FourierMellinQuery, u_natural
from .special import c_plus_minus, log_gamma_ratio_k

TWO_PI = 2.0 * math.pi


def e(x):
    return np.exp(2j * np.pi * np.asarray(x, dtype=np.float64))


def modular_inverse(a: int, q: int) -> int:
    """a-bar with 0 <= a-bar < q and a a-bar = 1 mod q (0 when q = 1)."""
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")
    if q == 1:
        return 0
    return pow(a, -1, q)


# ------------------------------------------------------------ delta method


@dataclass(frozen=True)
class DeltaMethodConfig:
    Q: float
    n: int
    x_integration: str = "closed-form"

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError(f"Q must be >= 1, got {self.Q}")
        if self.x_integration not in ("closed-form", "quadrature"):
            raise ValueError(f"unknown x_integration {self.x_integration!r}")


def delta_cells(Q: float):
    """(q, a, a-bar) with 1 <= q <= Q, Q < a <= q + Q, gcd(a, q) = 1."""
    cells = []
    for q in range(1, int(math.floor(Q)) + 1):
        coprime = np.gcd(np.arange(q), q) == 1  # residues coprime to q
        a_lo = int(math.floor(Q)) + 1
        for a in range(a_lo, int(math.floor(q + Q)) + 1):
            if coprime[a % q]:
                cells.append((q, a, modular_inverse(a, q)))
    return cells


def x_integral(n, aq, method: str = "closed-form"):
    """int_0^1 e(-n x / (a q)) dx."""
    z = -np.asarray(n, dtype=np.float64) / aq
    if method == "quadrature":
        # 24-point Gauss-Legendre panels, one per oscillation
        xg, wg = np.polynomial.legendre.leggauss(24)
        out = np.empty(z.shape, dtype=np.complex128)
        for i, zi in enumerate(z.ravel()):
            p = int(math.ceil(abs(zi))) + 1
            edges = np.linspace(0.0, 1.0, p + 1)
            x = (0.5 * (edges[1:] + edges[:-1]))[:, None] + (0.5 / p) * xg[None, :]
            out.flat[i] = np.sum(np.exp(2j * np.pi * zi * x) @ wg) * 0.5 / p
        return out if out.ndim else complex(out)
    out = np.ones(z.shape, dtype=np.complex128)
    nz = z != 0
    w = 2j * np.pi * z[nz]
    out[nz] = np.expm1(w) / w
    return out


def delta_kloosterman(n: int, Q: float, x_integration: str = "closed-form") -> float:
    """2 Re sum_q sum*_a (1/(aq)) e(n a-bar / q) int_0^1 e(-n x/(aq)) dx, which equals [n = 0]."""
    cfg = DeltaMethodConfig(Q, int(n), x_integration)
    terms = []
    for q, a, ab in delta_cells(cfg.Q):
        X = complex(x_integral(n, a * q, cfg.x_integration))
        terms.append(cmath.exp(2j * math.pi * ((n * ab) % q) / q) * X / (a * q))
    return 2.0 * _backend.csum(np.array(terms, dtype=np.complex128)).real if terms else 0.0


# ------------------------------------------------------------ Poisson step


def poisson_lhs(T: float, N: float, q: int, a: int, x: float, U: BumpFunction | None = None) -> complex:
    """sum_m m^(-iT) e(-m a-bar/q) e(m x/(a q)) U(m/N)."""
    U = U or make_U()
    ab = modular_inverse(a, q)
    lo, hi = U.support
    m = np.arange(max(1, int(math.floor(lo * N))), int(math.ceil(hi * N)) + 1)
    ph = -T * np.log(m) / TWO_PI - ((m * ab) % q) / q + m * x / (a * q)
    return _backend.csum(U.eval(m / N) * np.exp(2j * np.pi * ph))


def poisson_dual_terms(T: float, N: float, q: int, a: int, x: float, M: int, U: BumpFunction | None = None):
    """(m, term) for m = a-bar mod q, |m| <= M, with term = U-natural(N(ma - x)/(aq), 1 - iT)."""
    U = U or make_U()
    ab = modular_inverse(a, q)
    ms = [m for m in range(-M, M + 1) if (m - ab) % q == 0]
    out = []
    for m in ms:
        r = N * (m * a - x) / (a * q)
        out.append((m, u_natural(FourierMellinQuery(U, r, complex(1.0, -T)), "oracle", tol=1e-12)))
    return out


def poisson_dual_check(t: float, v: float, N: float, q: int, a: int, x: float, M: int | None = None,
                       tol: float = 1e-6) -> dict:
    """Residual of the first Poisson step (x-sign as it arises in S^+, see README).

    ``M`` defaults to 4 q t / N + 2q.  The study of the truncation actually
    needed is in ``needed_m``: the smallest M' such that keeping |m| <= M'
    already meets the tolerance.
    """
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")
    if N > 1e4 or t > 1e4:
        raise ValueError("cost guard: N, t <= 1e4")
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    T = t + v
    if M is None:
        M = int(math.ceil(4 * q * T / N)) + 2 * q
    lhs = poisson_lhs(T, N, q, a, x)
    pref = N * cmath.exp(-1j * T * math.log(N))
    terms = poisson_dual_terms(T, N, q, a, x, M)
    vals = np.array([pref * z for _, z in terms], dtype=np.complex128)
    rhs = _backend.csum(vals)
    residual = abs(lhs - rhs)
    bound = tol * (1 + abs(lhs))
    # truncation study: partial sums over |m| <= M'
    order = np.argsort([abs(m) for m, _ in terms], kind="stable")
    ms_sorted = [abs(terms[i][0]) for i in order]
    partial = np.cumsum(vals[order])
    needed = M
    for Mp in sorted(set(ms_sorted), reverse=True):
        idx = max(i for i, mm in enumerate(ms_sorted) if mm <= Mp)
        if abs(lhs - partial[idx]) <= bound:
            needed = Mp
        else:
            break
    scale = q * T / N
    return {
        "params": {"t": t, "v": v, "N": N, "q": q, "a": a, "x": x, "M": M},
        "lhs": [lhs.real, lhs.imag],
        "rhs": [rhs.real, rhs.imag],
        "abs_lhs": abs(lhs),
        "residual": residual,
        "tolerance": bound,
        "converged": residual <= bound,
        "pass": residual <= bound,
        "needed_m": needed,
        "qt_over_N": scale,
        "needed_ratio": needed / scale,
    }


# --------------------------------------------------------- Mellin-Barnes


_MB_STEP = 0.5


def contour_step(x_max: float, N: float, edge: float | None = None) -> float:
    """tau step for the contour trapezoid.  The rule aliases G(x) with
    G(x e^(-2 pi / h)); the image must sit where pi^2 x N is far below 1 so
    the Bessel kernel has died off: 2 pi / h >= log(40 pi^2 N x_max) + 6.
    When x^sigma G(x) only vanishes like x^edge at 0 (edge = distance from
    the line to the first pole), also 2 pi / h >= 36 / edge."""
    need = math.log(max(40 * math.pi**2 * N * x_max, 1.0)) + 6.0
    if edge is not None:
        need = max(need, 36.0 / edge)
    # integer denominators keep the cached Mellin lines few
    return min(_MB_STEP, TWO_PI / math.ceil(need))


@lru_cache(maxsize=16)
def _mellin_on_line(w_key: str, sigma: float, T: float, h: float):
    """tau_j = j h (|tau_j| <= T) and M(tau_j) = int W(u) u^(-sigma - 1 - i tau_j) du.

    With u = e^w this is the Fourier transform of W(e^w) e^(-sigma w); the
    trapezoid sum on a grid of period 2 pi / h is evaluated by one FFT.
    """
    W = {"V": make_V(), "U": make_U()}[w_key]
    lo, hi = W.support
    wlo, whi = math.log(lo), math.log(hi)
    period = TWO_PI / h
    if whi - wlo >= period:
        raise ValueError("tau step too coarse for the support of the weight")
    K = int(math.floor(T / h))
    # Nyquist well above T: the transform decays like exp(-c sqrt(tau))
    n = 1 << max(12, int(math.ceil(math.log2(8 * K + 16))))
    dw = period / n
    w = wlo + dw * np.arange(n)
    inside = w < whi
    phi = np.zeros(n)
    phi[inside] = W.eval(np.exp(w[inside])) * np.exp(-sigma * w[inside])
    F = np.fft.fft(phi) * dw
    m = np.arange(-K, K + 1)
    tau = h * m
    # sum_j phi_j e^(-i m h (wlo + j dw)) = e^(-i tau wlo) F[m mod n]
    out = np.exp(-1j * tau * wlo) * F[m % n]
    return tau, out


@lru_cache(maxsize=16)
def mellin_cutoff(w_key: str = "V", sigma: float = -0.5, rel: float = 1e-12) -> float:
    """Contour height: twice the point past which |M(tau)| < rel |M(0)|, so the
    whole last octave of the truncated line is below the threshold."""
    T = 250.0
    # both gamma quotients grow like |tau|^(1 + 2 sigma) on the line
    grow = 1.0 + 2.0 * sigma
    while T < 2e5:
        tau, M = _mellin_on_line(w_key, sigma, 2 * T, _MB_STEP)
        mag = np.abs(M) * np.maximum(1.0, np.abs(tau)) ** grow
        tail = mag[np.abs(tau) >= T]
        if np.max(tail) <= rel * np.max(mag):
            return 2 * T
        T *= 1.25
    raise RuntimeError("Mellin transform does not decay")


@dataclass(frozen=True)
class VoronoiQuery:
    """Voronoi summation for g(y) = V(y/N) twisted by e(a n / q)."""

    f: Eigenform
    a: int
    q: int
    N: float
    sigma: float = -0.5
    T: float | None = None
    n_dual_max: int | None = None
    reading: str = "corrected"
    weight: str = "V"

    def __post_init__(self):
        if math.gcd(self.a, self.q) != 1:
            raise ValueError(f"gcd({self.a}, {self.q}) != 1")
        if not self.sigma > -1 - (self.f.weight + 1) / 2:
            raise ValueError("sigma outside the half-plane of validity")

    @property
    def g(self) -> BumpFunction:
        return {"V": make_V(), "U": make_U()}[self.weight].rescaled(self.N)


def _contour_transform(log_kernel, x, N: float, sigma: float, T: float, w_key: str, h: float = _MB_STEP):
    """int_(sigma) (pi^2 x)^(-s) K(s) g~(-s) ds / i dtau, g(y) = W(y/N).

    Returns sum_j h K(s_j) g~(-s_j) (pi^2 x)^(-s_j) for each x, i.e. the
    tau-integral; callers apply the constant in front.
    """
    tau, M = _mellin_on_line(w_key, sigma, T, h)
    s = sigma + 1j * tau
    # g~(-s) = N^(-s) M(tau)
    w = h * np.exp(log_kernel(s)) * M
    logx = np.log(np.pi**2 * np.asarray(x, dtype=np.float64) * N)
    S = _backend.phase_line_sum(np.ascontiguousarray(w.real), np.ascontiguousarray(w.imag), float(tau[0]), h,
                                np.ascontiguousarray(logx))
    return S * np.exp(-sigma * logx)


def _tail_estimate(log_kernel, sigma: float, T: float, w_key: str, h: float = _MB_STEP) -> float:
    """Contribution bound of the last octave |tau| in [T/2, T] (absolute, x-free up to (pi^2 x N)^-sigma)."""
    tau, M = _mellin_on_line(w_key, sigma, T, h)
    k = np.abs(np.exp(log_kernel(sigma + 1j * tau)) * M)
    return float(h * np.sum(k[np.abs(tau) >= T / 2]))


def voronoi_transform_G(vq: VoronoiQuery, x) -> tuple[np.ndarray, float]:
    """G(x) = i^(k-1)/(2 pi^2) int_(sigma) (pi^2 x)^(-s) gamma(s, k) g~(-s) ds.

    Returns (values, error estimate); the estimate is the absolute size of the
    last-octave contribution of the truncated contour, a conservative bound.
    """
    k = vq.f.weight
    T = vq.T or mellin_cutoff(vq.weight, vq.sigma)

    def logk(s):
        return log_gamma_ratio_k(s, k, vq.reading)

    xs = np.asarray(x, dtype=np.float64)
    h = contour_step(float(np.max(xs)), vq.N)
    vals = _contour_transform(logk, xs, vq.N, vq.sigma, T, vq.weight, h)
    # ds = i dtau
    const = 1j ** (k - 1) * 1j / (2 * math.pi**2)
    tail = _tail_estimate(logk, vq.sigma, T, vq.weight, h) / (2 * math.pi**2)
    tail_x = tail * np.max((np.pi**2 * np.atleast_1d(xs) * vq.N) ** (-vq.sigma))
    return const * vals, float(tail_x)


_DUAL_TOL = 1e-8


def voronoi_check(vq: VoronoiQuery, rel_tol: float = 1e-5) -> dict:
    """LHS = sum lambda(n) e(an/q) g(n); RHS = q sum lambda(n)/n e(-a-bar n/q) G(n/q^2).

    The dual sum runs to n_dual_max if given, else to the point past which
    every term is below 1e-8 of the l1 size of the LHS.
    """
    f, a, q, N = vq.f, vq.a, vq.q, vq.N
    g = vq.g
    lo, hi = g.support
    n = np.arange(max(1, int(math.floor(lo))), int(math.ceil(hi)) + 1)
    f.require(int(n[-1]))
    lam = f.lam
    gn = g.eval(n.astype(np.float64))
    lhs = _backend.csum(lam[n] * e(((a * n) % q) / q) * gn)
    abs_scale = float(np.sum(np.abs(lam[n]) * gn))
    ab = modular_inverse(a, q)
    T = vq.T or mellin_cutoff(vq.weight, vq.sigma)
    vq_t = VoronoiQuery(f, a, q, N, vq.sigma, T, vq.n_dual_max, vq.reading, vq.weight)
    n_dual = vq.n_dual_max or max(8, dual_n_cutoff(vq_t, _DUAL_TOL * abs_scale)["n_cut"])
    f.require(n_dual)
    nn = np.arange(1, n_dual + 1)
    G, tail = voronoi_transform_G(vq_t, nn / q**2)
    rhs = _backend.csum(q * lam[nn] * e(-((ab * nn) % q) / q) * G / nn)
    # size of the last dual terms: the truncation of the dual sum
    last = float(np.max(np.abs(q * lam[nn[-8:]] * G[-8:] / nn[-8:])))
    residual = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    # relative residual against the l1 scale is the honest measure when |LHS| is tiny
    residual_l1 = abs(lhs - rhs) / abs_scale
    rel = min(residual, residual_l1) if abs(lhs) < 1e-3 * abs_scale else residual
    return {
        "params": {"q": q, "a": a, "N": N, "sigma": vq.sigma, "T": T, "reading": vq.reading, "k": f.weight},
        "lhs": [lhs.real, lhs.imag],
        "rhs": [rhs.real, rhs.imag],
        "residual": rel,
        "residual_abs": abs(lhs - rhs),
        "l1_scale": abs_scale,
        "n_dual": n_dual,
        "dual_tail": last,
        "contour_tail": tail,
        "tolerance": rel_tol,
        "pass": rel <= rel_tol,
    }


def bessel_G(k: int, N: float, x, weight: str = "V", n_y: int = 4096) -> np.ndarray:
    """Independent route: G(x) = 2 pi i^k x int g(y) J_{k-1}(4 pi sqrt(x y)) dy."""
    from scipy.special import jv

    W = {"V": make_V(), "U": make_U()}[weight]
    lo, hi = W.support
    y = np.linspace(lo * N, hi * N, n_y + 1)
    gy = W.eval(y / N)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    J = jv(k - 1, 4 * np.pi * np.sqrt(np.outer(x, y)))
    return 2 * np.pi * (1j**k) * x * (J @ gy) * (hi - lo) * N / n_y


def dual_n_cutoff(vq: VoronoiQuery, abs_tol: float, n_probe: int = 160) -> dict:
    """Dual length from the decay of G: the smallest n such that
    q |G(x)| <= abs_tol for every probed x >= n/q^2.

    G decays like exp(-c (xN)^(1/4)), so the probe runs on a geometric grid
    up to xN = 1e7 and reports the last probe above the threshold.
    """
    q, N = vq.q, vq.N
    x = np.geomspace(1.0 / q**2, 1e7 / N, n_probe)
    G, _ = voronoi_transform_G(vq, x)
    big = np.nonzero(q * np.abs(G) > abs_tol)[0]
    if big.size and big[-1] == x.size - 1:
        raise RuntimeError("G has not decayed by x N = 1e7")
    x_cut = x[big[-1] + 1] if big.size else x[0]
    return {"x_cut": float(x_cut), "n_cut": int(math.ceil(x_cut * q * q))}


# ------------------------------------------------------------------ Maass


def voronoi_check_maass(file: MaassCoefficientFile | None, a: int, q: int, N: float, sigma: float = -0.5,
                        rel_tol: float = 1e-5, polar_zeta: complex | None = None) -> dict:
    """The Maass analogue: LHS = sum lambda(n) e(an/q) h(n) against
    q sum_+- sum lambda(n)/n e(+-a-bar n/q) H^+-(n/q^2), H^+- built from
    C^+(-s) +- C^-(-s); even form assumed.

    For the non-cuspidal divisor model pass polar_zeta = zeta(1 + 2 i nu):
    the polar term (2/q) Re zeta(1+2i nu) int h(x) (x/q^2)^(i nu) dx is then
    moved to the left.
    """
    if file is None:
        return {"status": "skipped: no coefficient source", "pass": None}
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")
    nu = file.nu
    V = make_V()
    g = V.rescaled(N)
    lo, hi = g.support
    n = np.arange(max(1, int(math.floor(lo))), int(math.ceil(hi)) + 1)
    if n[-1] > file.n_max:
        return {"status": f"skipped: file holds n <= {file.n_max}, need {int(n[-1])}", "pass": None}
    lam = np.asarray(file.lam)
    lhs = _backend.csum(lam[n] * e(((a * n) % q) / q) * g.eval(n.astype(np.float64)))
    abs_scale = float(np.sum(np.abs(lam[n]) * g.eval(n.astype(np.float64))))
    polar = 0.0
    if polar_zeta is not None:
        xg, wg = np.polynomial.legendre.leggauss(200)
        xx = lo + (hi - lo) * (xg + 1) / 2
        polar = (2.0 / q) * float(np.real(polar_zeta * np.sum(wg * g.eval(xx) * (xx / q**2) ** (1j * nu)))) * (hi - lo) / 2
        lhs = lhs - polar
    ab = modular_inverse(a, q)
    T = mellin_cutoff("V", sigma)

    def log_c(sign):
        def fn(s):
            cp, cm = c_plus_minus(-s, nu)
            with np.errstate(divide="ignore"):
                return np.log(cp + sign * cm)

        return fn

    def h_pm(x):
        h = contour_step(float(np.max(x)), N, edge=sigma + 1.0)
        hp = -1j / (4 * math.pi**2) * 1j * _contour_transform(log_c(+1), x, N, sigma, T, "V", h)
        hm = -1j / (4 * math.pi**2) * 1j * _contour_transform(log_c(-1), x, N, sigma, T, "V", h)
        return hp, hm

    # dual length from the decay of H^+- on a geometric probe
    xp = np.geomspace(1.0 / q**2, 1e7 / N, 160)
    hp, hm = h_pm(xp)
    big = np.nonzero(q * (np.abs(hp) + np.abs(hm)) > _DUAL_TOL * abs_scale)[0]
    n_used = int(math.ceil(xp[min(big[-1] + 1, xp.size - 1)] * q * q)) if big.size else 8
    if n_used > file.n_max:
        return {"status": f"skipped: dual sum needs n <= {n_used}, file holds {file.n_max}", "pass": None}
    nn = np.arange(1, n_used + 1)
    hp, hm = h_pm(nn / q**2)
    # lambda(-n) = lambda(n) for an even form
    rhs = _backend.csum(q * lam[nn] / nn * (e(((ab * nn) % q) / q) * hp + e(-((ab * nn) % q) / q) * hm))
    residual = abs(lhs - rhs) / max(abs(lhs), abs_scale)
    return {
        "status": "evaluated",
        "params": {"nu": nu, "q": q, "a": a, "N": N, "sigma": sigma, "T": T},
        "polar_term": polar,
        "lhs": [lhs.real, lhs.imag],
        "rhs": [rhs.real, rhs.imag],
        "residual": residual,
        "n_dual": n_used,
        "tolerance": rel_tol,
        "pass": residual <= rel_tol,
    }


def divisor_model_coefficients(nu: float, n_max: int) -> np.ndarray:
    """lambda(n) = sum_{ab=n} (a/b)^(i nu) (real, even in nu); index 0 unused."""
    lam = np.zeros(n_max + 1, dtype=np.complex128)
    for d in range(1, n_max + 1):
        m = np.arange(d, n_max + 1, d)
        lam[m] += np.exp(1j * nu * (np.log(d) - np.log(m // d)))
    return lam.real.copy()
