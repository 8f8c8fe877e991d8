"""Compactly supported smooth weights built from the mollifier exp(-1/(1-x^2)).

Every weight carries a Taylor-jet evaluator, so derivatives to order 8 are
exact to rounding (forward-mode differentiation of the closed form).  The
plateau ramps are normalised integrals of the mollifier; their value is a
Gauss-Legendre quadrature, their derivatives are mollifier jets.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from ._jet import Jet

MAX_ORDER = 8
# exp(-1/w) below e^-700 is treated as zero (it underflows anyway)
_INV_W_CUT = 700.0

_GL_N = 64
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)
# tanh substitution: the integrand exp(-cosh^2 u) sech^2 u is < 1e-110 for |u| > 3.5
_U_LO = -3.5


class PartitionCoverageError(ValueError):
    """The j-list leaves a gap, or does not reach the requested range."""


def mollifier_jet(t, order: int) -> np.ndarray:
    """Taylor coefficients of m(t) = exp(-1/(1 - t^2)) (zero for |t| >= 1).

    Returns an array of shape (order + 1, len(t)).
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros((order + 1, t.size))
    w0 = 1.0 - t * t
    inside = w0 > 1.0 / _INV_W_CUT
    if np.any(inside):
        u = Jet.variable(t[inside], order)
        w = 1.0 - u * u
        out[:, inside] = (-w.reciprocal()).exp().c
    return out


def _mollifier_primitive_raw(t: np.ndarray) -> np.ndarray:
    # int_{-1}^{t} m(y) dy for t in [-1, 0], via y = tanh(u)
    upper = np.arctanh(np.clip(t, -1.0, 0.0))
    upper = np.maximum(upper, _U_LO)
    half = 0.5 * (upper - _U_LO)
    mid = 0.5 * (upper + _U_LO)
    u = mid[:, None] + half[:, None] * _GL_X[None, :]
    ch = np.cosh(u)
    f = np.exp(-ch * ch) / (ch * ch)
    return half * (f @ _GL_W)


def _mollifier_mass() -> float:
    return 2.0 * float(_mollifier_primitive_raw(np.array([0.0]))[0])


MOLLIFIER_MASS = _mollifier_mass()


def ramp_jet(t, order: int) -> np.ndarray:
    """Jet of R(t) = (1/I) int_{-1}^t m: 0 for t <= -1, 1 for t >= 1, smooth between."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros((order + 1, t.size))
    out[0, t >= 1.0] = 1.0
    mid = (t > -1.0) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        # symmetric evaluation keeps full relative accuracy near both ends
        neg = tm <= 0
        val = np.empty_like(tm)
        val[neg] = _mollifier_primitive_raw(tm[neg]) / MOLLIFIER_MASS
        val[~neg] = 1.0 - _mollifier_primitive_raw(-tm[~neg]) / MOLLIFIER_MASS
        out[0, mid] = val
        if order >= 1:
            mj = mollifier_jet(tm, order - 1)
            for j in range(1, order + 1):
                out[j, mid] = mj[j - 1] / (j * MOLLIFIER_MASS)
    return out


def _affine(jet_fn, alpha: float, beta: float):
    """Jet of x -> jet_fn(alpha x + beta)."""

    def fn(x, order):
        c = jet_fn(alpha * x + beta, order)
        scale = alpha ** np.arange(order + 1)
        return c * scale[:, None]

    return fn


# ------------------------------------------------------------------ the type


@dataclass(frozen=True, eq=False)
class BumpFunction:
    """A smooth weight supported on [a, b] with exact derivatives to order 8.

    ``constants[j]`` is a recorded bound for sup |x^j w^(j)(x)| (sampled on a
    dense grid, with a 5% margin).
    """

    support: tuple[float, float]
    jet_fn: Callable[[np.ndarray, int], np.ndarray] = field(repr=False)
    kind: str = "mass-one"
    label: str = ""
    constants: tuple[float, ...] = field(init=False, repr=False)
    _ft: dict = field(init=False, repr=False, default_factory=dict)
    _ft_lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self):
        a, b = self.support
        if not b > a:
            raise ValueError(f"empty support {self.support}")
        x = np.linspace(a, b, 4001)
        d = self.derivs(x, MAX_ORDER)
        powers = np.abs(x)[None, :] ** np.arange(MAX_ORDER + 1)[:, None]
        sup = np.max(np.abs(d) * powers, axis=1)
        object.__setattr__(self, "constants", tuple(float(1.05 * s + 1e-300) for s in sup))

    # -- evaluation
    def _jet_array(self, x, order: int) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        flat = x.ravel()
        out = np.zeros((order + 1, flat.size))
        a, b = self.support
        inside = (flat > a) & (flat < b)
        if np.any(inside):
            out[:, inside] = self.jet_fn(flat[inside], order)
        return out.reshape((order + 1,) + x.shape)

    def jet(self, x, order: int) -> Jet:
        return Jet(self._jet_array(x, order))

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        out = self._jet_array(x, 0)[0]
        return float(out.ravel()[0]) if np.ndim(x) == 0 else out

    def deriv(self, x, j: int):
        if not 0 <= j <= MAX_ORDER:
            raise ValueError(f"derivative order must be in [0, {MAX_ORDER}], got {j}")
        out = self._jet_array(x, j)[j] * math.factorial(j)
        return float(out.ravel()[0]) if np.ndim(x) == 0 else out

    def derivs(self, x, order: int) -> np.ndarray:
        """All derivatives 0..order at x, shape (order + 1,) + shape(x)."""
        return Jet(self._jet_array(x, order)).derivatives()

    # -- transforms of the weight
    def rescaled(self, N: float, label: str | None = None) -> "BumpFunction":
        """x -> w(x / N), supported on [N a, N b]."""
        a, b = self.support
        return BumpFunction(
            (N * a, N * b), _affine(self.jet_fn, 1.0 / N, 0.0), self.kind, label or f"{self.label}(x/{N:g})"
        )

    def integral(self, n: int = 4096) -> float:
        """Trapezoid quadrature; spectrally accurate for these flat weights."""
        a, b = self.support
        x = np.linspace(a, b, n + 1)
        return float(np.sum(self.eval(x)) * (b - a) / n)

    # -- Fourier transform  int w(x) e(-xi x) dx
    def _ft_table(self):
        with self._ft_lock:
            if "spline" not in self._ft:
                self._ft.update(_build_ft_table(self))
            return self._ft

    def fourier_transform(self, xi):
        """int w(x) e(-xi x) dx (cubic interpolation for |xi| <= 32, quadrature beyond)."""
        tab = self._ft_table()
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        out = np.empty(xi_arr.shape, dtype=np.complex128)
        a_xi = np.abs(xi_arr)
        near = a_xi <= tab["xi_max"]
        if np.any(near):
            env = tab["spline_re"](a_xi[near]) + 1j * tab["spline_im"](a_xi[near])
            env = np.where(xi_arr[near] < 0, np.conj(env), env)
            out[near] = env * np.exp(-2j * np.pi * xi_arr[near] * tab["center"])
        if np.any(~near):
            out[~near] = fourier_transform_direct(self, xi_arr[~near])
        return complex(out[0]) if np.ndim(xi) == 0 else out

    @property
    def ft_calibration_error(self) -> float:
        return self._ft_table()["calibration_error"]


FT_XI_MAX = 32.0
FT_STEP = 1.0 / 256


def fourier_transform_direct(w: BumpFunction, xi) -> np.ndarray:
    """int w(x) e(-xi x) dx by trapezoid, resolution adapted to |xi|."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    a, b = w.support
    c = 0.5 * (a + b)
    out = np.empty(xi.shape, dtype=np.complex128)
    for i, z in enumerate(xi.ravel()):
        n = int(max(4096, 16 * abs(z) * (b - a)))
        x = np.linspace(a, b, n + 1)
        val = w.eval(x) * np.exp(-2j * np.pi * z * (x - c))
        out.flat[i] = np.sum(val) * (b - a) / n * np.exp(-2j * np.pi * z * c)
    return out


def _build_ft_table(w: BumpFunction) -> dict:
    # trapezoid samples zero-padded into one FFT: bin k is xi = k / (P dx)
    a, b = w.support
    c = 0.5 * (a + b)
    dx = 1.0 / 2048
    n = int(math.ceil((b - a) / dx))
    P = 1 << 19
    while P < 4 * n:
        P *= 2
    dx = 1.0 / (FT_STEP * P)
    n = int(math.ceil((b - a) / dx))
    x = a + dx * np.arange(n + 1)
    samples = np.zeros(P)
    samples[: n + 1] = w.eval(x)
    K = int(round(FT_XI_MAX / FT_STEP))
    spec = np.fft.fft(samples)[: K + 1] * dx
    xi = FT_STEP * np.arange(K + 1)
    # shift phase from the left end a to the centre c
    env = spec * np.exp(-2j * np.pi * xi * (a - c))
    sre = CubicSpline(xi, env.real)
    sim = CubicSpline(xi, env.imag)
    # calibration: midpoints against direct quadrature
    cal = (np.arange(0, K, K // 64) + 0.5) * FT_STEP
    direct = fourier_transform_direct(w, cal) * np.exp(2j * np.pi * cal * c)
    err = float(np.max(np.abs(sre(cal) + 1j * sim(cal) - direct)))
    return {
        "spline": True,
        "spline_re": sre,
        "spline_im": sim,
        "center": c,
        "xi_max": FT_XI_MAX,
        "calibration_error": err,
    }


# ------------------------------------------------------------ constructors


def mollifier_bump(a: float, b: float, label: str = "") -> BumpFunction:
    """Mass-one bump c * m((2x - a - b) / (b - a)) on [a, b]."""
    alpha = 2.0 / (b - a)
    beta = -(a + b) / (b - a)
    norm = alpha / MOLLIFIER_MASS
    base = _affine(mollifier_jet, alpha, beta)
    return BumpFunction((a, b), lambda x, order: norm * base(x, order), "mass-one", label)


def plateau_bump(a: float, a2: float, b2: float, b: float, label: str = "") -> BumpFunction:
    """Equal to 1 on [a2, b2], 0 outside (a, b), mollifier-integral ramps between."""
    if not a < a2 <= b2 < b:
        raise ValueError(f"need a < a2 <= b2 < b, got {(a, a2, b2, b)}")
    up = _affine(ramp_jet, 2.0 / (a2 - a), -(a + a2) / (a2 - a))
    down = _affine(ramp_jet, -2.0 / (b - b2), (b + b2) / (b - b2))

    def fn(x, order):
        # product of the two ramps; exactly one of them differs from 1 at any x
        return (Jet(up(x, order)) * Jet(down(x, order))).c

    return BumpFunction((a, b), fn, "plateau", label)


@lru_cache(maxsize=1)
def make_V() -> BumpFunction:
    """The mass-one weight on [1, 2]."""
    V = mollifier_bump(1.0, 2.0, label="V")
    V._ft_table()
    return V


@lru_cache(maxsize=1)
def make_U() -> BumpFunction:
    """Plateau weight, 1 on [1, 2], supported on [3/4, 9/4]."""
    U = plateau_bump(0.75, 1.0, 2.0, 2.25, label="U")
    U._ft_table()
    return U


# ---------------------------------------------------------- partition of unity


def dyadic_j_list(T: float, j1: float = 0.9375, ratio: float = 1.25) -> list[float]:
    """j_i = j1 ratio^(i-1), extended until 4 j_n / 3 >= 1.1 T."""
    js = [j1]
    while 4 * js[-1] / 3 < 1.1 * T:
        js.append(js[-1] * ratio)
    return js


@dataclass(frozen=True)
class Partition:
    """W_0 on [-1, 1] plus W_j on [j, 4j/3] (and mirrored [4j/3, j] for j < 0)."""

    T: float
    members: tuple[tuple[float, BumpFunction], ...]

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def total(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        s = np.zeros(x.shape)
        for _, w in self.members:
            s = s + w.eval(x)
        return s


def make_partition(T: float, j_list: list[float] | None = None) -> Partition:
    """Smooth partition of unity on [-T, T] by telescoping plateau functions.

    P_i = 1 on [-A_i, A_i], 0 outside (-B_i, B_i); W_0 = P_0 and
    W_i = P_i - P_{i-1}, split into its x > 0 and x < 0 halves.  Outside
    [-T, T] the sum decays to 0.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    js = list(dyadic_j_list(T) if j_list is None else j_list)
    if not js:
        raise PartitionCoverageError("empty j-list")
    n = len(js)
    B = [1.0] + [4 * j / 3 for j in js]
    if js[0] >= 1.0:
        raise PartitionCoverageError(f"first j = {js[0]} must be < 1 (W_0 lives on [-1, 1])")
    for i in range(1, n):
        if not js[i] < B[i]:
            raise PartitionCoverageError(f"gap: j = {js[i]} >= 4/3 * {js[i - 1]}")
        if not js[i] >= B[i - 1]:
            raise PartitionCoverageError(f"j = {js[i]} overlaps the support of W at j = {js[i - 2] if i >= 2 else 0}")
    if B[n] <= T:
        raise PartitionCoverageError(f"j-list reaches {B[n]:g}, range needs {T:g}")
    A = js + [max(T, B[n - 1])]
    if not A[n] < B[n]:
        raise PartitionCoverageError(f"last plateau end {A[n]:g} not below {B[n]:g}")
    P = [_even_plateau(A[i], B[i]) for i in range(n + 1)]

    members: list[tuple[float, BumpFunction]] = [(0.0, BumpFunction((-1.0, 1.0), P[0], "partition-member", "W_0"))]
    for i in range(1, n + 1):
        lo, hi = A[i - 1], B[i]
        diff = _difference(P[i], P[i - 1])
        members.append((js[i - 1], BumpFunction((lo, hi), diff, "partition-member", f"W_{js[i - 1]:g}")))
        members.append((-js[i - 1], BumpFunction((-hi, -lo), diff, "partition-member", f"W_-{js[i - 1]:g}")))
    return Partition(T=float(T), members=tuple(members))


def _even_plateau(A: float, B: float):
    down = _affine(ramp_jet, -2.0 / (B - A), (B + A) / (B - A))
    up = _affine(ramp_jet, 2.0 / (B - A), (B + A) / (B - A))

    def fn(x, order):
        # ramp down on the right, its mirror image on the left
        return (Jet(down(x, order)) * Jet(up(x, order))).c

    return fn


def _difference(f, g):
    def fn(x, order):
        return f(x, order) - g(x, order)

    return fn
