"""Oscillatory integrals int g(x) e(f(x)) dx: a reference quadrature and the
asymptotic tools measured against it.

``e(x) = exp(2 pi i x)`` throughout.  Phases and amplitudes are given as
derivative oracles ``fn(x, order) -> array[order + 1, len(x)]`` holding
f, f', ..., f^(order) at each point.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ._jet import Jet
from .bump import BumpFunction

Deriv = Callable[[np.ndarray, int], np.ndarray]

TWO_PI = 2.0 * math.pi


class BudgetError(RuntimeError):
    """Quadrature cost guard exceeded; ``diagnostics`` holds what was measured."""

    def __init__(self, msg: str, diagnostics: dict):
        super().__init__(f"{msg}: {diagnostics}")
        self.diagnostics = diagnostics


class PreconditionError(ValueError):
    """A sampled hypothesis of an estimate does not hold."""


class ModeError(ValueError):
    """Asymptotic evaluation requested outside its range of validity."""


def e(x):
    return np.exp(2j * np.pi * np.asarray(x))


# ------------------------------------------------------------- oracles


def polynomial_phase(coeffs, center: float = 0.0, scale: float = 1.0) -> Deriv:
    """f(x) = scale * sum_k coeffs[k] (x - center)^k."""
    c = np.asarray(coeffs, dtype=np.float64) * scale
    polys = [np.polynomial.Polynomial(c)]
    for _ in range(8):
        polys.append(polys[-1].deriv())

    def fn(x, order):
        y = np.asarray(x, dtype=np.float64) - center
        return np.stack([polys[j](y) for j in range(order + 1)])

    return fn


def log_linear_phase(beta: float, r: float) -> Deriv:
    """f(x) = beta log(x) / (2 pi) - r x, the Fourier-Mellin phase."""

    def fn(x, order):
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((order + 1,) + x.shape)
        out[0] = beta * np.log(x) / TWO_PI - r * x
        for j in range(1, order + 1):
            out[j] = (-1) ** (j - 1) * math.factorial(j - 1) * beta / (TWO_PI * x**j)
        if order >= 1:
            out[1] -= r
        return out

    return fn


def bump_amplitude(w: BumpFunction) -> Deriv:
    return w.derivs


def fm_amplitude(U: BumpFunction, sigma: float) -> Deriv:
    """g(x) = U(x) x^(sigma - 1)."""

    def fn(x, order):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros((order + 1,) + x.shape)
        pos = x > 0
        if np.any(pos):
            xp = x[pos]
            power = Jet.variable(xp, order) ** (sigma - 1.0)
            out[:, pos] = (U.jet(xp, order) * power).derivatives()
        return out

    return fn


@dataclass(frozen=True)
class OscillatoryIntegrand:
    """int_a^b g(x) e(f(x)) dx with scale parameters for the estimates."""

    a: float
    b: float
    phase: Deriv
    amplitude: Deriv
    theta_f: float = 1.0
    omega_f: float = 1.0
    omega_g: float = 1.0
    lam: float | None = None
    x0: float | None = None

    def f(self, x, j: int = 0):
        return self.phase(np.asarray(x, dtype=np.float64), j)[j]

    def g(self, x, j: int = 0):
        return self.amplitude(np.asarray(x, dtype=np.float64), j)[j]

    def conjugate(self) -> "OscillatoryIntegrand":
        """Integrand of the complex conjugate (real amplitude)."""
        ph = self.phase
        return replace(self, phase=lambda x, order: -ph(x, order))

    def sample(self, n: int = 1000) -> np.ndarray:
        return np.linspace(self.a, self.b, n)

    def check_scales(self, c_upper: float = 10.0, c_lower: float = 0.1, orders=(1, 2), n: int = 1000) -> dict:
        """Sampled |f^(i)| <= c Theta/Omega^i, |g^(j)| <= c / Omega_g^j, f'' >= c' Theta / Omega^2."""
        x = self.sample(n)
        fd = self.phase(x, max(max(orders), 2))
        gd = self.amplitude(x, 2)
        worst = {}
        for i in orders:
            worst[f"f{i}"] = float(np.max(np.abs(fd[i])) / (self.theta_f / self.omega_f**i))
        for j in range(3):
            worst[f"g{j}"] = float(np.max(np.abs(gd[j])) * self.omega_g**j)
        worst["f2_lower"] = float(np.min(fd[2]) / (self.theta_f / self.omega_f**2))
        ok = all(v <= c_upper for k, v in worst.items() if k != "f2_lower") and worst["f2_lower"] >= c_lower
        return {"ok": ok, "ratios": worst}


# ------------------------------------------------------------ quadrature


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    n_panels: int
    converged: bool

    def __complex__(self):
        return complex(self.value)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def panel_edges(fprime_abs: Callable[[np.ndarray], np.ndarray], a: float, b: float, per_osc: float,
                n_min: int, max_variation: float, max_panels: int) -> np.ndarray:
    """Edges with at most 1/per_osc oscillation per panel (and >= n_min panels).

    Places edges at equal increments of int (per_osc |f'| + n_min/(b-a)).
    """
    grid = np.linspace(a, b, 4097)
    dens = fprime_abs(grid)
    variation = float(np.trapezoid(dens, grid))
    if not math.isfinite(variation) or variation > max_variation:
        raise BudgetError("total phase variation above guard", {"variation": variation, "guard": max_variation})
    want = per_osc * variation + n_min
    if want > max_panels:
        raise BudgetError("panel budget exceeded", {"variation": variation, "panels": want, "guard": max_panels})
    n_grid = int(min(max(4097, 8 * want), 2**23))
    if n_grid > grid.size:
        grid = np.linspace(a, b, n_grid)
        dens = fprime_abs(grid)
    dens = per_osc * dens + n_min / (b - a)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    n_pan = max(int(math.ceil(cum[-1])), 1)
    edges = np.interp(np.linspace(0.0, cum[-1], n_pan + 1), cum, grid)
    edges[0], edges[-1] = a, b
    return edges


def _panel_sum(edges: np.ndarray, n: int, integrand: Callable[[np.ndarray], np.ndarray], chunk: int = 1 << 18):
    xg, wg = _gl(n)
    total_re = []
    total_im = []
    per = max(chunk // n, 1)
    n_pan = edges.size - 1
    for i in range(0, n_pan, per):
        stop = min(i + per, n_pan)
        lo = edges[i:stop]
        hi = edges[i + 1 : stop + 1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * xg[None, :]
        vals = integrand(x.ravel()).reshape(x.shape) @ wg * half
        total_re.extend(vals.real.tolist())
        total_im.extend(vals.imag.tolist())
    # exactly rounded, order independent
    return complex(math.fsum(total_re), math.fsum(total_im))


def quad_osc(I: OscillatoryIntegrand, tol: float = 1e-10, n_nodes: int = 16, per_osc: float = 4.0,
             n_min: int = 64, max_variation: float = 1e9, max_panels: int = 20_000_000) -> QuadResult:
    """Gauss-Legendre panels with at most 1/4 oscillation each.

    The error estimate is the difference from a 10-point rule on the same
    panels (a conservative bound for the 16-point value); the panel density
    is doubled until it is below ``tol``.
    """
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    a, b = float(I.a), float(I.b)
    if not b > a:
        return QuadResult(0j, 0.0, 0, True)
    n_min_eff = max(n_min, int(math.ceil(4 * (b - a) / I.omega_g)))

    def fabs(x):
        return np.abs(I.phase(x, 1)[1])

    def integrand(x):
        d = I.phase(x, 0)[0]
        return I.amplitude(x, 0)[0] * np.exp(2j * np.pi * d)

    est = math.inf
    val = 0j
    edges = np.array([a, b])
    for _ in range(6):
        edges = panel_edges(fabs, a, b, per_osc, n_min_eff, max_variation, max_panels)
        val = _panel_sum(edges, n_nodes, integrand)
        low = _panel_sum(edges, 10, integrand)
        est = abs(val - low)
        if est <= tol:
            return QuadResult(val, est, edges.size - 1, True)
        per_osc *= 2
        n_min_eff *= 2
    return QuadResult(val, est, edges.size - 1, False)


# ------------------------------------------------------- non-stationary


def nonstationary_decay_check(family: Callable[[float], OscillatoryIntegrand], Bs, j: int) -> dict:
    """Fit log|I(B)| against log B; the integration-by-parts bound wants slope <= -j.

    Each member must satisfy |f'| >= B on [a, b] and have g vanishing at the
    endpoints.  Sweeps stop entering the fit once |I| hits the rounding floor.
    """
    Bs = [float(B) for B in Bs]
    vals = []
    for B in Bs:
        I = family(B)
        x = I.sample()
        if np.min(np.abs(I.f(x, 1))) < B * (1 - 1e-12):
            raise PreconditionError(f"|f'| < B = {B:g} somewhere on [{I.a}, {I.b}]")
        ends = np.abs(I.g(np.array([I.a, I.b])))
        scale = float(np.max(np.abs(I.g(x))))
        if np.any(ends > 1e-14 * max(scale, 1.0)):
            raise PreconditionError("amplitude does not vanish at the endpoints")
        res = quad_osc(I, tol=1e-12)
        vals.append(abs(res.value))
    floor = 1e-15
    use = [(math.log(B), math.log(v)) for B, v in zip(Bs, vals) if v > floor]
    if len(use) >= 2:
        xs, ys = zip(*use)
        slope = float(np.polyfit(xs, ys, 1)[0])
    elif len(use) == 1 and len(Bs) >= 2:
        # decayed into the floor: the measured slope is at least this steep
        slope = (math.log(floor) - use[0][1]) / (math.log(Bs[-1]) - use[0][0])
    else:
        slope = -math.inf
    return {"B": Bs, "abs_values": vals, "slope": slope, "j": j, "pass": slope <= -j + 0.1,
            "floor_reached": any(v <= floor for v in vals)}


def first_derivative_bound(I: OscillatoryIntegrand) -> float:
    """(Theta/(Omega^2 Lambda^3)) (1 + Omega_f/Omega_g + (Omega_f/Omega_g)^2 Lambda/(Theta/Omega_f))."""
    lam = I.lam
    if lam is None:
        lam = float(np.min(np.abs(I.f(I.sample(), 1))))
    if not lam > 0:
        raise ValueError("Lambda = min |f'| must be positive")
    th, of, og = I.theta_f, I.omega_f, I.omega_g
    return th / (of**2 * lam**3) * (1 + of / og + (of / og) ** 2 * lam / (th / of))


# ----------------------------------------------------------- stationary


def _stationary_data(I: OscillatoryIntegrand):
    if I.x0 is None:
        raise ValueError("stationary point x0 not set")
    x0 = float(I.x0)
    kappa = min(I.b - x0, x0 - I.a)
    if not kappa > 0:
        raise ValueError(f"stationary point x0 = {x0} is not interior (kappa = {kappa})")
    fd = I.phase(np.array([x0]), 4)[:, 0]
    gd = I.amplitude(np.array([x0]), 2)[:, 0]
    if abs(fd[1]) > 1e-10 * max(1.0, I.theta_f / I.omega_f):
        raise ValueError(f"f'(x0) = {fd[1]:g} is not zero")
    if not fd[2] > 0:
        raise ValueError("f' must change sign from negative to positive at x0")
    return x0, kappa, fd, gd


def stationary_main(I: OscillatoryIntegrand) -> complex:
    """g(x0) e(f(x0) + 1/8) / sqrt(f''(x0))."""
    _, _, fd, gd = _stationary_data(I)
    return complex(gd[0] * cmath.exp(2j * math.pi * (fd[0] + 0.125)) / math.sqrt(fd[2]))


def stationary_main_error_bound(I: OscillatoryIntegrand) -> float:
    _, kappa, _, _ = _stationary_data(I)
    th, of, og = I.theta_f, I.omega_f, I.omega_g
    return of**4 / (th**2 * kappa**3) + of / th**1.5 + of**3 / (th**1.5 * og**2)


def stationary_second_order(I: OscillatoryIntegrand, printed: bool = False) -> complex:
    """Main term with the first correction.

    The g' f''' coefficient is -i/(4 pi f''^2); ``printed=True`` uses
    -i/(16 pi f''^2) instead, which loses an order (kept as a control).
    """
    _, _, fd, gd = _stationary_data(I)
    f0, _, f2, f3, f4 = fd
    g0, g1, g2 = gd
    pi = math.pi
    c_g1 = 16 * pi if printed else 4 * pi
    bracket = (
        g0
        + 1j * g2 / (4 * pi * f2)
        - 1j * g0 * f4 / (16 * pi * f2**2)
        - 1j * g1 * f3 / (c_g1 * f2**2)
        + 5j * g0 * f3**2 / (48 * pi * f2**3)
    )
    return complex(bracket * cmath.exp(2j * pi * (f0 + 0.125)) / math.sqrt(f2))


# ------------------------------------------------------- stationary corpus


def stationary_corpus() -> list[tuple[str, Callable[[float], OscillatoryIntegrand]]]:
    """20 families lambda -> integrand with a single interior stationary point.

    Phases lambda * phi(x) with phi'' > 0 on the interval; amplitudes are
    mollifier bumps and plateaus, some tilted by a polynomial.
    """
    from .bump import make_U, make_V, mollifier_bump, plateau_bump

    V = make_V()
    amps = [
        ("V", bump_amplitude(V), 1.0, 2.0, 0.25),
        ("U", bump_amplitude(make_U()), 0.75, 2.25, 0.125),
        ("bump[1.1,1.9]", bump_amplitude(mollifier_bump(1.1, 1.9)), 1.0, 2.0, 0.2),
        ("plateau", bump_amplitude(plateau_bump(1.0, 1.3, 1.7, 2.0)), 1.0, 2.0, 0.15),
        ("V*(1+x)", _tilted(V, [1.0, 1.0]), 1.0, 2.0, 0.25),
    ]
    shapes = [
        ("quad", lambda x0: [0.0, 0.0, 1.0]),
        ("cubic", lambda x0: [0.0, 0.0, 1.0, 0.4]),
        ("quartic", lambda x0: [0.0, 0.0, 1.0, 0.0, 0.3]),
        ("mixed", lambda x0: [0.1, 0.0, 0.8, -0.3, 0.2]),
    ]
    out = []
    for aname, amp, a, b, og in amps:
        for sname, coeffs in shapes:
            x0 = 1.5 if sname != "mixed" else 1.45

            def family(lam, amp=amp, a=a, b=b, og=og, x0=x0, c=coeffs(x0)):
                return OscillatoryIntegrand(a, b, polynomial_phase(c, x0, lam), amp, theta_f=lam,
                                            omega_f=1.0, omega_g=og, x0=x0)

            out.append((f"{aname}/{sname}", family))
    return out


def _tilted(w: BumpFunction, poly) -> Deriv:
    p = np.polynomial.Polynomial(poly)

    def fn(x, order):
        x = np.asarray(x, dtype=np.float64)
        pj = Jet(np.stack([p.deriv(j)(x) / math.factorial(j) if j else p(x) for j in range(order + 1)]))
        return (w.jet(x, order) * pj).derivatives()

    return fn


def fit_order(lams, errs) -> float:
    """-slope of log err against log lambda."""
    return float(-np.polyfit(np.log(lams), np.log(errs), 1)[0])


STATPHASE_COLUMNS = ("case_id", "Theta_f", "oracle_re", "oracle_im", "approx_re", "approx_im", "abs_err",
                     "predicted_err")


@dataclass
class SweepResult:
    """Rows in STATPHASE_COLUMNS order plus the fitted order per case."""

    rows: list[tuple]
    orders: dict[str, float]

    @property
    def min_order(self) -> float:
        return min(self.orders.values())

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STATPHASE_COLUMNS)
            for row in self.rows:
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def stationary_sweep(lams=(1e2, 1e3, 1e4), order: str = "main", printed: bool = False) -> SweepResult:
    """Stationary phase approximation against quadrature over the 20-case corpus.

    ``order`` is ``main`` (error of order Theta^(-3/2)) or ``second``
    (order Theta^(-5/2)).
    """
    if order not in ("main", "second"):
        raise ValueError(f"order must be 'main' or 'second', got {order!r}")
    rows, orders = [], {}
    for name, fam in stationary_corpus():
        errs = []
        for lam in lams:
            I = fam(lam)
            ora = complex(quad_osc(I, tol=1e-12).value)
            app = stationary_main(I) if order == "main" else stationary_second_order(I, printed)
            pred = stationary_main_error_bound(I) if order == "main" else I.theta_f ** -2.5
            errs.append(abs(ora - app))
            rows.append((name, lam, ora.real, ora.imag, app.real, app.imag, errs[-1], pred))
        orders[name] = fit_order(lams, errs)
    return SweepResult(rows, orders)


def fm_expansion_sweep(betas=(1e3, 1e4, 1e5), x0s=(1.2, 1.5, 1.8), sigmas=(0.0, 0.5), printed: bool = False,
                       U: BumpFunction | None = None) -> SweepResult:
    """Two-term U-natural expansion against quadrature at beta = -|beta|, r = beta/(2 pi x0)."""
    from .bump import make_U

    U = U or make_U()
    rows, orders = [], {}
    for sigma in sigmas:
        for x0 in x0s:
            name = f"{U.label or 'W'}/sigma={sigma:g}/x0={x0:g}"
            errs = []
            for b in betas:
                q = FourierMellinQuery(U, -b / (TWO_PI * x0), complex(sigma, -b))
                ora = u_natural(q, "oracle")
                app = u_natural(q, "asymptotic", printed=printed)
                errs.append(abs(ora - app))
                rows.append((name, b, ora.real, ora.imag, app.real, app.imag, errs[-1], b**-2.5))
            orders[name] = fit_order(betas, errs)
    return SweepResult(rows, orders)


# ------------------------------------------------------------------ 2D


@dataclass(frozen=True)
class Amplitude2D:
    """g(x, y) and its mixed partial, with support inside ``support``."""

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    mixed: Callable[[np.ndarray, np.ndarray], np.ndarray] | None
    support: tuple[float, float, float, float]
    # (gx, gy, tilt) when g = (1 + tilt x y) gx(x) gy(y); lets tensor rules tabulate once
    factors: tuple | None = None


def product_amplitude(gx: BumpFunction, gy: BumpFunction, tilt: float = 0.0) -> Amplitude2D:
    """(1 + tilt x y) gx(x) gy(y)."""

    def value(x, y):
        return (1 + tilt * x * y) * gx.eval(x) * gy.eval(y)

    def mixed(x, y):
        a0, a1 = gx.eval(x), gx.deriv(x, 1)
        b0, b1 = gy.eval(y), gy.deriv(y, 1)
        return tilt * a0 * b0 + tilt * x * a1 * b0 + tilt * y * a0 * b1 + (1 + tilt * x * y) * a1 * b1

    ax, bx = gx.support
    ay, by = gy.support
    return Amplitude2D(value, mixed, (ax, bx, ay, by), (gx, gy, tilt))


def _check_interior(g: Amplitude2D, rect) -> None:
    a, b, c, d = rect
    sa, sb, sc, sd = g.support
    if not (a <= sa and sb <= b and c <= sc and sd <= d):
        raise PreconditionError(f"support {g.support} not inside rectangle {rect}")
    # sampled: the amplitude must vanish on the boundary of the rectangle
    s = np.linspace(0, 1, 101)
    edge = [g.value(a + (b - a) * s, np.full_like(s, c)), g.value(a + (b - a) * s, np.full_like(s, d)),
            g.value(np.full_like(s, a), c + (d - c) * s), g.value(np.full_like(s, b), c + (d - c) * s)]
    if max(float(np.max(np.abs(v))) for v in edge) > 0:
        raise PreconditionError("amplitude does not vanish on the rectangle boundary")


def mixed_partial_fd(g: Amplitude2D, x, y, h: float = 1e-3):
    """Fourth-order central finite difference of d^2 g / dx dy."""
    w = {1: 8.0, 2: -1.0}
    out = 0.0
    for i, wi in w.items():
        for j, wj in w.items():
            for sx in (1, -1):
                for sy in (1, -1):
                    out = out + sx * sy * wi * wj * g.value(x + sx * i * h, y + sy * j * h)
    return out / (144.0 * h * h)


def total_variation(g: Amplitude2D, rect, n_panels: int = 400, n_nodes: int = 8) -> float:
    """int int |d^2 g / dx dy| over the rectangle, by tensor Gauss-Legendre panels."""
    _check_interior(g, rect)
    if g.mixed is None:
        raise ValueError("amplitude has no mixed-derivative oracle")
    a, b, c, d = g.support
    xs, wx = _tensor_nodes(a, b, n_panels, n_nodes)
    ys, wy = _tensor_nodes(c, d, n_panels, n_nodes)
    total = []
    for i in range(0, ys.size, 256):
        Y = ys[i : i + 256]
        vals = np.abs(g.mixed(xs[None, :], Y[:, None]))
        total.extend((vals @ wx * wy[i : i + 256]).tolist())
    return math.fsum(total)


def _tensor_nodes(a: float, b: float, n_panels: int, n_nodes: int, edges=None):
    xg, wg = _gl(n_nodes)
    if edges is None:
        edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * xg).ravel(), (half[:, None] * wg).ravel()


@dataclass(frozen=True)
class Phase2D:
    """f(x, y) with gradient and Hessian oracles."""

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    hessian: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    # (A, B, C, cx, cy) for quadratic phases: e(f) then factors except for the cross term
    quadratic: tuple | None = None


def quadratic_phase_2d(A: float, B: float, C: float, cx: float = 0.0, cy: float = 0.0) -> Phase2D:
    """f = A (x-cx)^2 + B (x-cx)(y-cy) + C (y-cy)^2."""

    def value(x, y):
        u, v = x - cx, y - cy
        return A * u * u + B * u * v + C * v * v

    def grad(x, y):
        u, v = x - cx, y - cy
        return 2 * A * u + B * v, B * u + 2 * C * v

    def hessian(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))
        return np.full(shape, 2.0 * A), np.full(shape, float(B)), np.full(shape, 2.0 * C)

    return Phase2D(value, grad, hessian, (A, B, C, cx, cy))


def quad_osc_2d(f: Phase2D, g: Amplitude2D, n_nodes: int = 16, per_osc: float = 0.5, n_min: int = 32,
                max_nodes: int = 1_000_000_000) -> QuadResult:
    """Tensor Gauss-Legendre over the support of g, 16 nodes per two oscillations.

    Panel edges per axis follow the largest |df/dx| (resp. |df/dy|) over the
    other variable; the error estimate compares with a 12-point rule.
    """
    a, b, c, d = g.support
    ys_s = np.linspace(c, d, 65)
    xs_s = np.linspace(a, b, 65)

    def fx_abs(x):
        return np.max(np.abs(f.grad(x[:, None], ys_s[None, :])[0]), axis=1)

    def fy_abs(y):
        return np.max(np.abs(f.grad(xs_s[None, :], y[:, None])[1]), axis=1)

    ex = panel_edges(fx_abs, a, b, per_osc, n_min, 1e9, 10**7)
    ey = panel_edges(fy_abs, c, d, per_osc, n_min, 1e9, 10**7)
    if (ex.size - 1) * (ey.size - 1) * n_nodes**2 > max_nodes:
        raise BudgetError("2D node budget exceeded", {"panels_x": ex.size - 1, "panels_y": ey.size - 1})

    def rule(n):
        xs, wx = _tensor_nodes(a, b, 0, n, ex)
        ys, wy = _tensor_nodes(c, d, 0, n, ey)
        if g.factors is not None:
            gx, gy, tilt = g.factors
            GX, GY = gx.eval(xs), gy.eval(ys)
        if f.quadratic is not None:
            A, B, C, cx, cy = f.quadratic
            u, v = xs - cx, ys - cy
            EX, EY = np.exp(2j * np.pi * A * u * u), np.exp(2j * np.pi * C * v * v)
        re, im = [], []
        step = max(1, 2_000_000 // xs.size)
        X = xs[None, :]
        for i in range(0, ys.size, step):
            Y = ys[i : i + step, None]
            if g.factors is not None:
                amp = GY[i : i + step, None] * GX[None, :]
                if tilt:
                    amp = amp * (1 + tilt * X * Y)
            else:
                amp = g.value(X, Y)
            if f.quadratic is not None:
                ph = EY[i : i + step, None] * EX[None, :]
                if B:
                    ph = ph * np.exp(2j * np.pi * B * np.outer(v[i : i + step], u))
            else:
                ph = np.exp(2j * np.pi * f.value(X, Y))
            vals = (amp * ph) @ wx * wy[i : i + step]
            re.extend(vals.real.tolist())
            im.extend(vals.imag.tolist())
        return complex(math.fsum(re), math.fsum(im))

    val = rule(n_nodes)
    low = rule(12)
    return QuadResult(val, abs(val - low), (ex.size - 1) * (ey.size - 1), True)


def double_osc_bound(f: Phase2D, g: Amplitude2D, rect, r1: float, r2: float, c_lower: float = 0.1,
                     n_sample: int = 33) -> float:
    """var(g) / (r1 r2), after sampling f_xx >= c r1^2, f_yy >= c r2^2, det >= c (r1 r2)^2."""
    a, b, c, d = rect
    X, Y = np.meshgrid(np.linspace(a, b, n_sample), np.linspace(c, d, n_sample))
    fxx, fxy, fyy = f.hessian(X, Y)
    det = fxx * fyy - fxy**2
    if np.min(fxx) < c_lower * r1**2:
        raise PreconditionError(f"f_xx >= c r1^2 fails (min {np.min(fxx):g})")
    if np.min(fyy) < c_lower * r2**2:
        raise PreconditionError(f"f_yy >= c r2^2 fails (min {np.min(fyy):g})")
    if np.min(det) < c_lower * (r1 * r2) ** 2:
        raise PreconditionError(f"Hessian determinant condition fails (min {np.min(det):g})")
    return total_variation(g, rect) / (r1 * r2)


def double_corpus():
    """10 (label, phase, amplitude, rect, r1, r2) cases for the two-dimensional bound."""
    from .bump import make_V, mollifier_bump

    V = make_V()
    m = mollifier_bump(-1.0, 1.0)
    m2 = mollifier_bump(-0.5, 0.8)
    rect0 = (-1.0, 1.0, -1.0, 1.0)
    rect1 = (1.0, 2.0, 1.0, 2.0)
    cases = []
    for lam in (1e2, 1e3):
        cases.append((f"iso/{lam:g}", quadratic_phase_2d(lam, 0, lam), product_amplitude(m, m), rect0,
                      math.sqrt(lam), math.sqrt(lam)))
        cases.append((f"sheared/{lam:g}", quadratic_phase_2d(lam, 0.5 * lam, lam), product_amplitude(m, m2, 0.3),
                      rect0, math.sqrt(lam), math.sqrt(lam)))
        cases.append((f"aniso/{lam:g}", quadratic_phase_2d(lam, 0, lam / 16), product_amplitude(m2, m), rect0,
                      math.sqrt(lam), math.sqrt(lam / 16)))
        cases.append((f"offcentre/{lam:g}", quadratic_phase_2d(lam, 0, lam, 1.5, 1.4), product_amplitude(V, V),
                      rect1, math.sqrt(lam), math.sqrt(lam)))
        cases.append((f"tilted/{lam:g}", quadratic_phase_2d(lam / 4, -0.2 * lam, lam, 0.2, -0.1),
                      product_amplitude(m, m, -0.4), rect0, math.sqrt(lam / 4), math.sqrt(lam)))
    return cases


# ----------------------------------------------------- Fourier-Mellin


@dataclass(frozen=True)
class FourierMellinQuery:
    """U^natural(r, s) = int U(x) e(-r x) x^(s-1) dx."""

    U: BumpFunction
    r: float
    s: complex

    @property
    def sigma(self) -> float:
        return complex(self.s).real

    @property
    def beta(self) -> float:
        return complex(self.s).imag

    @property
    def x0(self) -> float:
        return self.beta / (TWO_PI * self.r) if self.r != 0 else math.inf

    def integrand(self) -> OscillatoryIntegrand:
        a, b = self.U.support
        return OscillatoryIntegrand(a, b, log_linear_phase(self.beta, self.r), fm_amplitude(self.U, self.sigma),
                                    theta_f=max(abs(self.beta), abs(self.r), 1.0), omega_g=0.1)


def u1_weight(U: BumpFunction, sigma: float, x, printed: bool = False):
    """U_1(sigma, x) = U_0 + c x^2 (U_0/x)' + 6 x^3 (U_0/x)'' with c = 12 (c = 3 if printed)."""
    x = np.asarray(x, dtype=np.float64)
    h = Jet(U.jet(x, 2).c) * (Jet.variable(x, 2) ** (sigma - 1.0))
    hd = h.derivatives()
    c = 3.0 if printed else 12.0
    return x * hd[0] + c * x**2 * hd[1] + 6 * x**3 * hd[2]


def u_natural(q: FourierMellinQuery, mode: str = "oracle", j: int = 2, tol: float = 1e-12, printed: bool = False):
    """U^natural by quadrature (``oracle``), the two-term stationary phase
    expansion (``asymptotic``), or the integration-by-parts bound (``bound``)."""
    beta, r, sigma = q.beta, q.r, q.sigma
    if mode == "oracle":
        return complex(quad_osc(q.integrand(), tol=tol).value)
    if mode == "bound":
        if r == 0 and beta == 0:
            return 1.0
        b1 = ((1 + abs(beta)) / abs(r)) ** j if r != 0 else math.inf
        b2 = ((1 + abs(r)) / abs(beta)) ** j if beta != 0 else math.inf
        return min(b1, b2)
    if mode != "asymptotic":
        raise ValueError(f"unknown mode {mode!r}")
    a, b = q.U.support
    x0 = q.x0
    if not (abs(beta) >= 10 and a / 2 <= x0 <= 2 * b):
        raise ModeError(f"asymptotic U-natural needs |beta| >= 10 and x0 in [{a / 2}, {2 * b}], got "
                        f"beta={beta:g}, x0={x0:g}; use mode='oracle'")
    if beta > 0:
        # U real: conj U(r, sigma + i beta) = U(-r, sigma - i beta)
        mirror = FourierMellinQuery(q.U, -r, complex(sigma, -beta))
        return u_natural(mirror, "asymptotic", printed=printed).conjugate()
    u0 = float(q.U.eval(x0)) * x0**sigma
    u1 = float(u1_weight(q.U, sigma, np.array([x0]), printed)[0])
    lead = math.sqrt(TWO_PI) * cmath.exp(0.25j * math.pi) / math.sqrt(-beta)
    # (beta / (2 pi e r))^(i beta) with a positive base
    phase = cmath.exp(1j * beta * (math.log(x0) - 1.0))
    return complex(lead * phase * (u0 - 1j / (12 * beta) * u1))
