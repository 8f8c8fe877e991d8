from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from gl2lfun import bump


def _m(y):
    return math.exp(-1.0 / (1.0 - y * y)) if abs(y) < 1 else 0.0


def test_V_support_mass_and_centre():
    V = bump.make_V()
    assert V.eval(0.99) == 0.0 and V.eval(2.01) == 0.0
    mass = quad(V.eval, 1, 2, epsabs=1e-13, epsrel=1e-13)[0]
    assert mass == pytest.approx(1.0, abs=1e-12)
    # V(x) = c m(2x - 3) with c fixed by the normalisation
    c = 2.0 / quad(_m, -1, 1, epsabs=1e-14, epsrel=1e-13)[0]
    assert V.eval(1.5) == pytest.approx(c * math.exp(-1.0), rel=1e-13)


def test_V_derivatives_against_finite_differences():
    V = bump.make_V()
    x, h = 1.37, 1e-5
    fd = (V.eval(x + h) - V.eval(x - h)) / (2 * h)
    assert V.deriv(x, 1) == pytest.approx(fd, rel=1e-8)
    fd2 = (V.eval(x + h) - 2 * V.eval(x) + V.eval(x - h)) / h**2
    assert V.deriv(x, 2) == pytest.approx(fd2, rel=1e-5)
    with pytest.raises(ValueError):
        V.deriv(x, 99)


def test_U_plateau_and_support():
    U = bump.make_U()
    assert U.eval(1.37) == 1.0
    assert U.eval(0.75) == 0.0 and U.eval(2.25) == 0.0
    x = np.linspace(0.76, 2.24, 300)
    assert np.all(U.eval(x) > 0) and np.all(U.eval(x) <= 1.0)


def test_plateau_validation():
    with pytest.raises(ValueError):
        bump.plateau_bump(1.0, 0.9, 2.0, 2.5)


def test_partition_of_unity():
    P = bump.make_partition(50.0)
    assert P.total(0.0) == pytest.approx(1.0, abs=1e-15)
    nonzero = [w for _, w in P if w.eval(0.0) != 0.0]
    assert len(nonzero) == 1 and nonzero[0].label == "W_0"
    x = np.random.default_rng(1).uniform(-50, 50, 2000)
    assert np.max(np.abs(P.total(x) - 1)) <= 1e-10
    assert P.total(80.0) < 1.0


def test_partition_coverage_errors():
    with pytest.raises(bump.PartitionCoverageError):
        bump.make_partition(10.0, [0.9, 2.0])
    with pytest.raises(bump.PartitionCoverageError):
        bump.make_partition(100.0, [0.9, 1.1])


def test_fourier_transform():
    V = bump.make_V()
    assert V.fourier_transform(0.0) == pytest.approx(1.0, abs=1e-12)
    assert abs(V.fourier_transform(50.0)) <= 1e-6
    xi = np.array([-7.3, -0.4, 0.9, 3.3, 17.0, 31.0, 40.0])
    direct = bump.fourier_transform_direct(V, xi)
    assert np.max(np.abs(V.fourier_transform(xi) - direct)) <= 1e-10
    for x0 in (0.9, 3.3):
        ref = quad(lambda x: V.eval(x) * math.cos(2 * math.pi * x0 * x), 1, 2, epsabs=1e-14, limit=200)[0]
        assert V.fourier_transform(x0).real == pytest.approx(ref, abs=1e-11)
    assert V.ft_calibration_error <= 1e-10


def test_rescaled():
    V = bump.make_V()
    W = V.rescaled(100.0)
    assert W.support == (100.0, 200.0)
    assert W.eval(137.0) == pytest.approx(V.eval(1.37), rel=1e-15)
    assert W.integral() == pytest.approx(100.0, rel=1e-10)
