"""The conductor-lowering pipeline as executable identities and monitors:
S(N), the K-average, the S^+- decomposition, the G1/G2 comparison and the
savings ledger.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from .bump import BumpFunction, make_U, make_V
from .forms import Eigenform
from .summation import delta_cells, e, poisson_dual_check, x_integral


@dataclass(frozen=True)
class PipelineConfig:
    """Block scale N, height t, averaging length K and modulus bound Q = sqrt(N/K)."""

    N: float
    t: float
    K: float
    Q: float | None = None
    eps: float = 0.0
    tol: float = 1e-6

    def __post_init__(self):
        if not (self.N > 0 and self.t > 0 and self.K > 0):
            raise ValueError("N, t, K must be positive")
        if not 1 <= self.K <= self.t:
            raise ValueError(f"K must lie in [1, t], got K={self.K}, t={self.t}")
        q = math.sqrt(self.N / self.K)
        if self.Q is None:
            object.__setattr__(self, "Q", q)
        elif abs(self.Q - q) > 1e-12 * q:
            raise ValueError(f"Q must equal sqrt(N/K) = {q}, got {self.Q}")


def _guard(cfg: PipelineConfig, n_max: float = 1e4) -> None:
    if cfg.N > n_max:
        raise ValueError(f"cost guard: N <= {n_max:g}")


# ------------------------------------------------------------------ S(N)


def _n_range(w: BumpFunction, N: float) -> np.ndarray:
    lo, hi = w.support
    return np.arange(max(1, int(math.ceil(lo * N))), int(math.floor(hi * N)) + 1)


def s_of_n(cfg: PipelineConfig, f: Eigenform, V: BumpFunction | None = None) -> complex:
    """S(N) = sum lambda(n) n^-it V(n/N)."""
    _guard(cfg)
    V = V or make_V()
    n = _n_range(V, cfg.N)
    f.require(int(n[-1]))
    return _backend.csum(f.lam[n] * np.exp(-1j * cfg.t * np.log(n)) * V.eval(n / cfg.N))


def conductor_average_check(cfg: PipelineConfig, f: Eigenform, U: BumpFunction | None = None) -> dict:
    """(1/K) int V(u/K) sum_(m=n) lambda(n) (n/m)^(iu) m^-it V(n/N) U(m/N) du against S(N)."""
    _guard(cfg)
    V = make_V()
    U = U or make_U()
    n = _n_range(V, cfg.N)
    f.require(int(n[-1]))
    base = f.lam[n] * np.exp(-1j * cfg.t * np.log(n)) * V.eval(n / cfg.N) * U.eval(n / cfg.N)
    # u-average on 8 Gauss-Legendre panels over supp V(u/K)
    xg, wg = np.polynomial.legendre.leggauss(32)
    edges = np.linspace(cfg.K, 2 * cfg.K, 9)
    total = 0.0 + 0.0j
    logn = np.log(n)
    for lo, hi in zip(edges[:-1], edges[1:]):
        u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg
        for uj, wj in zip(u, wg * 0.5 * (hi - lo)):
            # m = n: (n/m)^(iu) is identically 1
            ph = np.exp(1j * uj * (logn - logn))
            total += wj * V.eval(uj / cfg.K) / cfg.K * _backend.csum(base * ph)
    s = s_of_n(cfg, f, V)
    res = abs(total - s) / max(abs(s), 1e-300)
    return {"lhs": [total.real, total.imag], "s_of_n": [s.real, s.imag], "residual": res, "pass": res <= 1e-10}


# ------------------------------------------------------------------ S^+-


def _diagonal_weights(cfg: PipelineConfig, f: Eigenform, U: BumpFunction):
    """B(h) = sum_(n - m = h) lambda(n) m^-it V(n/N) U(m/N) V-hat(K log(m/n) / 2 pi).

    V-hat(K log(m/n)/2 pi) is the v-average (1/K) int V(v/K) (n/m)^(iv) dv.
    """
    V = make_V()
    n = _n_range(V, cfg.N)
    m = _n_range(U, cfg.N)
    f.require(int(n[-1]))
    a_n = f.lam[n] * V.eval(n / cfg.N)
    b_m = np.exp(-1j * cfg.t * np.log(m)) * U.eval(m / cfg.N)
    xi = cfg.K * (np.log(m)[None, :] - np.log(n)[:, None]) / (2 * math.pi)
    ft = V.fourier_transform(xi.ravel()).reshape(xi.shape)
    T = a_n[:, None] * b_m[None, :] * ft
    h = (n[:, None] - m[None, :]).ravel()
    h0 = int(h.min())
    size = int(h.max()) - h0 + 1
    B = np.bincount(h - h0, weights=T.real.ravel(), minlength=size) + 1j * np.bincount(
        h - h0, weights=T.imag.ravel(), minlength=size
    )
    return np.arange(h0, h0 + size), B


def _cell_terms(cells, hs: np.ndarray, B: np.ndarray, sign: int, x_sign: int) -> list[complex]:
    out = []
    for q, a, ab in cells:
        add = e(sign * ((hs * ab) % q) / q)
        X = x_integral(x_sign * sign * hs, a * q)
        out.append(_backend.csum(add * X * B) / (a * q))
    return out


def s_plus_minus(cfg: PipelineConfig, f: Eigenform, U: BumpFunction | None = None, x_sign: int = 1,
                 workers: int = 1) -> tuple[complex, complex]:
    """(S^+, S^-): the delta method with Q = sqrt(N/K) applied to n - m = h.

    S^+- = sum_(q, a) (1/aq) sum_h e(+- h a-bar/q) int_0^1 e(-+ h x/(aq)) dx B(h).
    ``x_sign = -1`` flips the sign of the x-phase (a negative control).
    """
    _guard(cfg, 1024)
    U = U or make_U()
    hs, B = _diagonal_weights(cfg, f, U)
    cells = delta_cells(cfg.Q)
    out = []
    for sign in (+1, -1):
        if workers > 1:
            # contiguous blocks, reduced cell by cell in a fixed order
            step = -(-len(cells) // workers)
            blocks = [cells[i : i + step] for i in range(0, len(cells), step)]
            with ThreadPoolExecutor(workers) as ex:
                terms = [z for blk in ex.map(lambda c: _cell_terms(c, hs, B, sign, x_sign), blocks) for z in blk]
        else:
            terms = _cell_terms(cells, hs, B, sign, x_sign)
        out.append(_backend.csum(np.array(terms, dtype=np.complex128)) if terms else 0.0j)
    return out[0], out[1]


def diagonal_term(cfg: PipelineConfig, f: Eigenform) -> complex:
    """B(0): the n = m terms, equal to S(N) when delta is exact."""
    hs, B = _diagonal_weights(cfg, f, make_U())
    return complex(B[hs == 0][0])


def decomposition_check(cfg: PipelineConfig, f: Eigenform, **kw) -> dict:
    sp, sm = s_plus_minus(cfg, f, **kw)
    s = s_of_n(cfg, f)
    res = abs(sp + sm - s) / abs(s)
    return {
        "params": {"N": cfg.N, "K": cfg.K, "t": cfg.t, "Q": cfg.Q},
        "s_plus": [sp.real, sp.imag],
        "s_minus": [sm.real, sm.imag],
        "s_of_n": [s.real, s.imag],
        "residual": res,
        "tolerance": cfg.tol,
        "pass": res <= cfg.tol,
    }


# ------------------------------------------------------------------ G1 / G2


def dual_a(q: int, m: int, Q: float) -> int:
    """The a in (Q, q + Q] with a m = 1 mod q (requires gcd(m, q) = 1)."""
    if math.gcd(m, q) != 1:
        raise ValueError(f"gcd({m}, {q}) != 1")
    lo = int(math.floor(Q)) + 1
    for a in range(lo, lo + q):
        if (a * m) % q == 1 % q:
            return a
    raise AssertionError("unreachable")


def _gl_panels(lo: float, hi: float, n_panels: int, n_nodes: int = 16):
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


def _fm_matrix(W: BumpFunction, r: np.ndarray, s: np.ndarray, per_rad: float) -> np.ndarray:
    """W-natural(r_i, s_j) = int W(u) e(-r_i u) u^(s_j - 1) du as a complex matrix (dense quadrature)."""
    lo, hi = W.support
    rate = 2 * math.pi * float(np.max(np.abs(r))) + float(np.max(np.abs(s.imag))) / lo
    n_pan = max(8, int(math.ceil(rate * (hi - lo) / (16 * per_rad))))
    u, wu = _gl_panels(lo, hi, n_pan)
    base = wu * W.eval(u)
    right = (base[:, None] * np.exp(np.outer(np.log(u), s - 1))).astype(np.complex128)
    out = np.empty((r.size, s.size), dtype=np.complex128)
    for i in range(0, r.size, 64):
        left = np.exp(-2j * math.pi * np.outer(r[i : i + 64], u))
        out[i : i + 64] = left @ right
    return out


def g1_eval(q: int, m: int, tau: float, cfg: PipelineConfig, a: int | None = None, n_x: int = 64,
            n_v: int = 16, per_rad: float = 0.25, with_error: bool = False):
    """G1(q, m, tau) = int_0^1 int V(v) U-nat(N(ma - x)/(aq), 1 - i(t + Kv))
    V-nat(Nx/(aq), 1/2 - i tau + iKv) dv dx by tensor Gauss-Legendre panels.

    n_x, n_v are panel counts (16 nodes each); ``with_error`` also returns the
    difference against a run with half the panels.
    """
    if cfg.t > 2e3:
        raise ValueError("cost guard: t <= 2e3")
    a = dual_a(q, m, cfg.Q) if a is None else a
    val = _g1(q, m, tau, cfg, a, n_x, n_v, per_rad)
    if not with_error:
        return val
    coarse = _g1(q, m, tau, cfg, a, n_x // 2, n_v // 2, per_rad)
    return val, abs(val - coarse)


def _g1(q, m, tau, cfg, a, n_x, n_v, per_rad) -> complex:
    U, V = make_U(), make_V()
    N, t, K = cfg.N, cfg.t, cfg.K
    x, wx = _gl_panels(0.0, 1.0, n_x)
    v, wv = _gl_panels(1.0, 2.0, n_v)
    Un = _fm_matrix(U, N * (m * a - x) / (a * q), 1 - 1j * (t + K * v), per_rad)
    Vn = _fm_matrix(V, N * x / (a * q), 0.5 - 1j * tau + 1j * K * v, per_rad)
    return complex(np.sum(wx[:, None] * (wv * V.eval(v))[None, :] * Un * Vn))


def g2_eval(q: int, m: int, tau: float, cfg: PipelineConfig, c2: complex = 1.0, a: int | None = None) -> complex:
    """The closed form
    c2/((t+tau)^(1/2) K) z_e^(3/2 - i(t+tau)) V(z) int_0^1 V(tau/K - (t+tau)x/(Kma)) dx,
    z = -(t+tau) q/(2 pi N m), z_e = z / e.  Exactly 0 off the support of V.
    """
    a = dual_a(q, m, cfg.Q) if a is None else a
    N, t, K = cfg.N, cfg.t, cfg.K
    T = t + tau
    if m >= 0 or T <= 0:
        return 0.0j
    V = make_V()
    z = -T * q / (2 * math.pi * N * m)
    vz = V.eval(z)
    if vz == 0.0:
        return 0.0j
    # x with w(x) = tau/K - T x/(K m a) in [1, 2]; w is increasing in x (m < 0)
    slope = -T / (K * m * a)
    x_lo = max(0.0, (1 - tau / K) / slope)
    x_hi = min(1.0, (2 - tau / K) / slope)
    if x_hi <= x_lo:
        return 0.0j
    xs, ws = _gl_panels(x_lo, x_hi, 8, 16)
    ix = float(np.sum(ws * V.eval(tau / K + slope * xs)))
    if ix == 0.0:
        return 0.0j
    ze = z / math.e
    pref = c2 / (math.sqrt(T) * K)
    return complex(pref * ze**1.5 * np.exp(-1j * T * math.log(ze)) * vz * ix)


def error_scale(C: float, tau: float, cfg: PipelineConfig) -> float:
    """E(C, tau) = t^eps [min(1, 100K/|tau|)/(t^(1/2) K^2) + QC/(N K t^(1/2)) + N/(QC K^3 t^(1/2))]."""
    t, K, N, Q = cfg.t, cfg.K, cfg.N, cfg.Q
    te = t**cfg.eps
    m1 = 1.0 if tau == 0 else min(1.0, 100 * K / abs(tau))
    return te * (m1 / (math.sqrt(t) * K**2) + Q * C / (N * K * math.sqrt(t)) + N / (Q * C * K**3 * math.sqrt(t)))


# reference case for the one-time c2 calibration (q = 1, m = -1 puts the
# stationary point (t + tau) q / (2 pi N |m|) = 1.5 in the middle of supp V)
REFERENCE_T = 1500.0
REFERENCE_Q_M_TAU = (1, -1, 0.0)


def reference_config() -> PipelineConfig:
    t = REFERENCE_T
    K = t ** (2 / 3)
    N = t / (2 * math.pi * 1.5)
    return PipelineConfig(N=N, t=t, K=K)


@lru_cache(maxsize=1)
def calibrate_c2() -> complex:
    """c2 = g1 / g2(c2 = 1) on the reference case; computed once and frozen."""
    cfg = reference_config()
    q, m, tau = REFERENCE_Q_M_TAU
    return g1_eval(q, m, tau, cfg) / g2_eval(q, m, tau, cfg, c2=1.0)


def g1_g2_check(q: int, m: int, tau: float, cfg: PipelineConfig, c2: complex | None = None,
                factor: float = 10.0) -> dict:
    c2 = calibrate_c2() if c2 is None else c2
    g1, err = g1_eval(q, m, tau, cfg, with_error=True)
    g2 = g2_eval(q, m, tau, cfg, c2=c2)
    E = error_scale(q, tau, cfg)
    diff = abs(g1 - g2)
    return {
        "params": {"q": q, "m": m, "tau": tau, "N": cfg.N, "t": cfg.t, "K": cfg.K, "a": dual_a(q, m, cfg.Q)},
        "g1": [g1.real, g1.imag],
        "g2": [g2.real, g2.imag],
        "c2": [c2.real, c2.imag],
        "diff": diff,
        "quad_err": err,
        "E": E,
        "ratio": diff / E,
        "pass": diff <= factor * E,
    }


# ------------------------------------------------------------------ savings ledger


@dataclass
class LedgerStage:
    stage: str
    magnitude: float
    predicted: float
    note: str = ""


@dataclass
class SavingsLedger:
    params: dict
    stages: list[LedgerStage] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"params": self.params, "stages": [asdict(s) for s in self.stages]}, indent=2,
                          sort_keys=True)


def voronoi_dual_length(cfg: PipelineConfig, f: Eigenform, q: int, a: int, v: float, x: float,
                        rel: float = 1e-6, n_y: int = 4096) -> int:
    """Dual n needed in the Voronoi step for g(y) = y^(iv) e(-xy/(aq)) V(y/N): the last n with
    q |G(n/q^2)|/n above rel * sum |g|; G by the Bessel integral."""
    from scipy.special import jv

    V = make_V()
    y, wy = _gl_panels(cfg.N, 2 * cfg.N, max(8, n_y // 16))
    g = V.eval(y / cfg.N) * np.exp(1j * v * np.log(y) - 2j * math.pi * x * y / (a * q))
    scale = float(np.sum(wy * np.abs(g)))
    k = f.weight
    n = np.unique(np.geomspace(1, 64 * cfg.K * q * q, 200).astype(np.int64))
    xx = n / q**2
    G = 2 * math.pi * xx * (jv(k - 1, 4 * math.pi * np.sqrt(np.outer(xx, y))) @ (wy * g))
    big = np.nonzero(q * np.abs(G) / n > rel * scale)[0]
    return int(n[big[-1]]) if big.size else 0


def savings_ledger(cfg: PipelineConfig, f: Eigenform, poisson: bool = True) -> SavingsLedger:
    """Magnitudes along the pipeline against the narrative savings (monitor only)."""
    N, t, K, Q = cfg.N, cfg.t, cfg.K, cfg.Q
    led = SavingsLedger({"N": N, "t": t, "K": K, "Q": Q})
    s = s_of_n(cfg, f)
    V = make_V()
    n = _n_range(V, N)
    trivial = float(np.sum(np.abs(f.lam[n]) * V.eval(n / N)))
    led.stages.append(LedgerStage("S(N)", abs(s), trivial, "predicted = sum |lambda(n)| V(n/N)"))
    sp, sm = s_plus_minus(cfg, f)
    led.stages.append(LedgerStage("S+", abs(sp), trivial, "S+ + S- = S(N)"))
    led.stages.append(LedgerStage("S-", abs(sm), trivial))
    q = max(1, int(math.floor(Q)))
    a = int(math.floor(Q)) + 1
    while math.gcd(a, q) != 1:
        a += 1
    if poisson and t <= 1e3:
        pr = poisson_dual_check(t, 1.5 * K, N, q, a, 0.5)
        led.stages.append(LedgerStage("poisson dual m-range", float(pr["needed_m"]), q * t / N,
                                      f"needed |m| vs q t/N; residual {pr['residual']:.2e}"))
    nd = voronoi_dual_length(cfg, f, q, a, 1.5 * K, 0.5)
    led.stages.append(LedgerStage("voronoi dual n-range", float(nd), K, f"needed n vs K at q = {q}, a = {a}"))
    led.stages.append(LedgerStage("saving step 1", N / math.sqrt(t), N / math.sqrt(t), "N / sqrt(t)"))
    led.stages.append(LedgerStage("saving step 2", math.sqrt(N / K), math.sqrt(N / K), "sqrt(N/K)"))
    led.stages.append(LedgerStage("saving step 3", math.sqrt(K), math.sqrt(K), "sqrt(K)"))
    led.stages.append(LedgerStage("saving step 4", K**0.25, K**0.25, "K^(1/4)"))
    led.stages.append(LedgerStage("|S(N)|/sqrt(N)", abs(s) / math.sqrt(N), math.sqrt(t), "convexity scale t^(1/2)"))
    return led
