from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from gl2lfun import oscillatory as osc
from gl2lfun.bump import make_U, make_V, mollifier_bump, plateau_bump


def _integrand(a, b, coeffs, amp, **kw):
    return osc.OscillatoryIntegrand(a, b, osc.polynomial_phase(coeffs), amp, **kw)


def test_quad_osc_mass():
    I = _integrand(1, 2, [0.0], osc.bump_amplitude(make_V()))
    assert complex(osc.quad_osc(I).value) == pytest.approx(1.0, abs=1e-12)


def test_quad_osc_fresnel():
    g = plateau_bump(-12.0, -10.0, 10.0, 12.0)
    I = _integrand(-12, 12, [0.0, 0.0, 1.0], osc.bump_amplitude(g), theta_f=144.0)
    val = complex(osc.quad_osc(I, tol=1e-11).value)
    # int e(x^2) dx = e(1/8)/sqrt(2); the smooth cut-off leaves a tail of order 1/|f'| at |x| ~ 10
    assert abs(val - cmath.exp(0.25j * math.pi) / math.sqrt(2)) <= 5e-3
    # oracle: g = 1 on [-10, 10], where int e(x^2) dx = C(20) + i S(20) (substitute t = 2x);
    # the two ramps are integrated separately
    from scipy.special import fresnel

    S, C = fresnel(20.0)
    inner = C + 1j * S
    ramp_l = osc.quad_osc(_integrand(-12, -10, [0.0, 0.0, 1.0], osc.bump_amplitude(g), theta_f=144.0), tol=1e-12)
    ramp_r = osc.quad_osc(_integrand(10, 12, [0.0, 0.0, 1.0], osc.bump_amplitude(g), theta_f=144.0), tol=1e-12)
    assert abs(val - (inner + ramp_l.value + ramp_r.value)) <= 1e-6


def test_quad_osc_nonstationary_small():
    I = _integrand(1, 2, [0.0, 100.0], osc.bump_amplitude(make_V()), theta_f=100.0)
    val = complex(osc.quad_osc(I, tol=1e-12).value)
    assert abs(val) <= 1e-8
    # oracle: the Fourier transform of V at xi = -100
    assert abs(val - make_V().fourier_transform(-100.0)) <= 1e-12


def test_quad_osc_tol_guard():
    I = _integrand(1, 2, [0.0], osc.bump_amplitude(make_V()))
    with pytest.raises(ValueError):
        osc.quad_osc(I, tol=1e-14)


def _linear_family(B):
    return _integrand(1, 2, [0.0, B], osc.bump_amplitude(mollifier_bump(1.0, 2.0)), theta_f=B)


def test_nonstationary_decay_slopes():
    r = osc.nonstationary_decay_check(_linear_family, [1e1, 2e1, 4e1], 2)
    assert r["slope"] <= -1.9 and r["pass"]
    r1 = osc.nonstationary_decay_check(_linear_family, [1e1, 2e1, 4e1], 1)
    assert r1["slope"] <= -0.9


def test_nonstationary_precondition():
    def fam(B):
        # U equals 1 at x = 1, so the amplitude does not vanish at the endpoint
        return _integrand(1, 2, [0.0, B], osc.bump_amplitude(make_U()), theta_f=B)

    with pytest.raises(osc.PreconditionError):
        osc.nonstationary_decay_check(fam, [10.0], 1)


def test_first_derivative_bound():
    for B in (10.0, 30.0, 100.0):
        I = _linear_family(B)
        I = osc.OscillatoryIntegrand(I.a, I.b, I.phase, I.amplitude, theta_f=B, omega_f=1.0, omega_g=0.25)
        actual = abs(complex(osc.quad_osc(I, tol=1e-12).value))
        assert osc.first_derivative_bound(I) >= actual
    base = osc.OscillatoryIntegrand(1, 2, osc.polynomial_phase([0.0, 1.0]), osc.bump_amplitude(make_V()),
                                    theta_f=10.0, omega_f=1.0, omega_g=0.5, lam=4.0)
    doubled = osc.OscillatoryIntegrand(1, 2, osc.polynomial_phase([0.0, 1.0]), osc.bump_amplitude(make_V()),
                                       theta_f=10.0, omega_f=1.0, omega_g=0.5, lam=8.0)
    assert osc.first_derivative_bound(base) / osc.first_derivative_bound(doubled) >= 4
    wide = osc.OscillatoryIntegrand(1, 2, base.phase, base.amplitude, theta_f=10.0, omega_f=1.0, omega_g=1e12,
                                    lam=4.0)
    assert osc.first_derivative_bound(wide) == pytest.approx(10.0 / 4.0**3, rel=1e-9)


def _quadratic(lam, amp=None):
    amp = amp or osc.bump_amplitude(make_V())
    return osc.OscillatoryIntegrand(1, 2, osc.polynomial_phase([0.0, 0.0, 1.0], 1.5, lam), amp, theta_f=lam,
                                    x0=1.5)


def test_stationary_main_single_case():
    lam = 1e3
    I = _quadratic(lam)
    main = osc.stationary_main(I)
    assert main == pytest.approx(make_V().eval(1.5) * cmath.exp(0.25j * math.pi) / math.sqrt(2 * lam), rel=1e-13)
    assert abs(complex(osc.quad_osc(I, tol=1e-12).value) - main) <= 10 * lam**-1.5


def test_stationary_main_order():
    lams = [1e2, 1e3, 1e4]
    errs = [abs(complex(osc.quad_osc(_quadratic(l), tol=1e-12).value) - osc.stationary_main(_quadratic(l)))
            for l in lams]
    assert osc.fit_order(lams, errs) >= 1.5 - 0.2


def test_stationary_endpoint_error():
    I = osc.OscillatoryIntegrand(1, 2, osc.polynomial_phase([0.0, 0.0, 1.0], 1.0, 100.0),
                                 osc.bump_amplitude(make_V()), theta_f=100.0, x0=1.0)
    with pytest.raises(ValueError):
        osc.stationary_main(I)


def test_second_order_pure_quadratic_bracket():
    lam = 500.0
    I = _quadratic(lam)
    V = make_V()
    g0, g2 = V.eval(1.5), V.deriv(1.5, 2)
    f2 = 2 * lam
    expect = (g0 + 1j * g2 / (4 * math.pi * f2)) * cmath.exp(0.25j * math.pi) / math.sqrt(f2)
    assert osc.stationary_second_order(I) == pytest.approx(expect, rel=1e-12)


def test_second_order_cubic_rate():
    fam = dict(osc.stationary_corpus())["V/cubic"]
    lams = [1e2, 1e3, 1e4]
    errs = []
    for l in lams:
        I = fam(l)
        errs.append(abs(complex(osc.quad_osc(I, tol=1e-12).value) - osc.stationary_second_order(I)))
    assert osc.fit_order(lams, errs) >= 2.5 - 0.3


def test_total_variation_separable():
    m = mollifier_bump(-1.0, 1.0)
    g = osc.product_amplitude(m, m)
    from scipy.integrate import quad

    tv1 = quad(lambda x: abs(m.deriv(x, 1)), -1, 1, epsabs=1e-13, points=[0.0])[0]
    assert osc.total_variation(g, (-1, 1, -1, 1)) == pytest.approx(tv1**2, rel=1e-8)


def test_total_variation_precondition():
    m = mollifier_bump(-1.0, 1.0)
    with pytest.raises(osc.PreconditionError):
        osc.total_variation(osc.product_amplitude(m, m), (-0.5, 0.5, -1, 1))


def test_mixed_partial_fd():
    m, m2 = mollifier_bump(-1.0, 1.0), mollifier_bump(-0.5, 0.8)
    g = osc.product_amplitude(m, m2, 0.3)
    x = np.array([0.1, -0.4, 0.7])
    y = np.array([0.2, 0.0, -0.3])
    assert np.max(np.abs(g.mixed(x, y) - osc.mixed_partial_fd(g, x, y))) <= 1e-6


def test_double_bound_iso():
    m = mollifier_bump(-1.0, 1.0)
    g = osc.product_amplitude(m, m)
    rect = (-1.0, 1.0, -1.0, 1.0)
    for lam in (1e2, 1e3):
        f = osc.quadratic_phase_2d(lam, 0, lam)
        r = math.sqrt(lam)
        bound = osc.double_osc_bound(f, g, rect, r, r)
        assert bound == pytest.approx(osc.total_variation(g, rect) / lam, rel=1e-12)
        assert abs(complex(osc.quad_osc_2d(f, g).value)) <= bound


def test_double_bound_degenerate():
    m = mollifier_bump(-1.0, 1.0)
    f = osc.quadratic_phase_2d(100.0, 20.0, 1.0)
    with pytest.raises(osc.PreconditionError):
        osc.double_osc_bound(f, osc.product_amplitude(m, m), (-1, 1, -1, 1), 10.0, 10.0)


def test_double_separable_unequal():
    m = mollifier_bump(-1.0, 1.0)
    g = osc.product_amplitude(m, m)
    f = osc.quadratic_phase_2d(400.0, 0, 25.0)
    val = complex(osc.quad_osc_2d(f, g).value)
    # separable oracle: product of two 1D integrals
    Ix = osc.quad_osc(osc.OscillatoryIntegrand(-1, 1, osc.polynomial_phase([0, 0, 400.0]), osc.bump_amplitude(m),
                                               theta_f=400.0), tol=1e-12).value
    Iy = osc.quad_osc(osc.OscillatoryIntegrand(-1, 1, osc.polynomial_phase([0, 0, 25.0]), osc.bump_amplitude(m),
                                               theta_f=25.0), tol=1e-12).value
    assert abs(val - Ix * Iy) <= 1e-10
    assert abs(val) <= osc.double_osc_bound(f, g, (-1, 1, -1, 1), 20.0, 5.0)


def test_u_natural_trivial_and_decay():
    V = make_V()
    assert osc.u_natural(osc.FourierMellinQuery(V, 0.0, 1.0)) == pytest.approx(1.0, abs=1e-12)
    assert abs(osc.u_natural(osc.FourierMellinQuery(V, 0.0, complex(1, 1e3)))) <= 1e-8


def test_u_natural_asymptotic_single():
    U = make_U()
    b = 1e4
    q = osc.FourierMellinQuery(U, -b / (2 * math.pi * 1.5), complex(0.0, -b))
    assert abs(osc.u_natural(q, "oracle") - osc.u_natural(q, "asymptotic")) <= 20 * b**-2.5


def test_u_natural_asymptotic_conjugate_symmetry():
    U = make_U()
    b = 3e3
    q = osc.FourierMellinQuery(U, b / (2 * math.pi * 1.3), complex(0.0, b))
    assert abs(osc.u_natural(q, "oracle") - osc.u_natural(q, "asymptotic")) <= 20 * b**-2.5
    mirror = osc.FourierMellinQuery(U, -q.r, complex(0.0, -b))
    assert osc.u_natural(q, "asymptotic") == pytest.approx(np.conj(osc.u_natural(mirror, "asymptotic")), rel=1e-14)


def test_u_natural_mode_errors():
    U = make_U()
    with pytest.raises(osc.ModeError):
        osc.u_natural(osc.FourierMellinQuery(U, 1.0, complex(0, -5.0)), "asymptotic")
    with pytest.raises(ValueError):
        osc.u_natural(osc.FourierMellinQuery(U, 1.0, 1.0), "nope")
    assert osc.u_natural(osc.FourierMellinQuery(U, 100.0, complex(0, -1.0)), "bound") == pytest.approx(
        (2 / 100) ** 2)


def test_u_natural_bound_holds():
    U = make_U()
    for r, beta in [(200.0, -3.0), (3.0, -200.0)]:
        q = osc.FourierMellinQuery(U, r, complex(0.0, beta))
        assert abs(osc.u_natural(q)) <= 50 * osc.u_natural(q, "bound", j=2)


def test_sweeps_and_csv(tmp_path):
    sw = osc.fm_expansion_sweep()
    assert sw.min_order >= 2.2
    printed = osc.fm_expansion_sweep(printed=True)
    assert printed.min_order < 2.2
    p = tmp_path / "sp.csv"
    sw.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(osc.STATPHASE_COLUMNS)
    assert len(lines) == 1 + len(sw.rows)
    with pytest.raises(ValueError):
        osc.stationary_sweep(order="third")
