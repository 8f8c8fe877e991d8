from __future__ import annotations

import math

import numpy as np
import pytest

from gl2lfun import forms


def _tau_by_hand(n_max: int) -> list[int]:
    """Oracle: q * prod (1 - q^n)^24 by repeated schoolbook multiplication."""
    poly = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        for _ in range(24):
            # multiply by (1 - q^n)
            for i in range(n_max, n - 1, -1):
                poly[i] -= poly[i - n]
    return poly[:n_max]  # coefficient of q^(m+1) is poly[m]


def test_tau_table_matches_schoolbook_product():
    oracle = _tau_by_hand(40)
    assert forms.tau_table(40) == oracle
    assert oracle[0] == 1
    assert oracle[1] == -24


def test_tau_30_is_multiplicative():
    tau = forms.tau_table(30)
    assert tau[29] == tau[1] * tau[2] * tau[4]


def test_tau_table_limit():
    with pytest.raises(ValueError):
        forms.tau_table(forms.TAU_NMAX_LIMIT + 1)


def test_coefficient_values(delta20k):
    f = delta20k
    assert forms.coefficient(f, 1) == 1.0
    l2, l3 = forms.coefficient(f, 2), forms.coefficient(f, 3)
    assert forms.coefficient(f, 4) == pytest.approx(l2 * l2 - 1, rel=1e-13)
    assert forms.coefficient(f, 6) == pytest.approx(l2 * l3, rel=1e-13)
    assert l2 == pytest.approx(-24 / 2**5.5, rel=1e-15)


def test_coefficient_out_of_cache(delta20k):
    with pytest.raises(forms.CoefficientCacheError):
        forms.coefficient(delta20k, 20001)
    with pytest.raises(ValueError):
        forms.coefficient(delta20k, 0)


def test_hecke_prime_power_relation(delta20k):
    lam = delta20k.lam
    for p in (2, 3, 5, 7):
        for j in range(1, 5):
            if p ** (j + 1) <= 20000:
                assert lam[p ** (j + 1)] == pytest.approx(lam[p] * lam[p**j] - lam[p ** (j - 1)], abs=1e-12)


def test_deligne_and_multiplicativity(delta20k):
    assert forms.deligne_ratio_max(delta20k, 20000) <= 1.0
    r = forms.multiplicativity_error(delta20k, 20000)
    assert r["exact"] and r["max_rel_error"] <= 1e-12


def test_rankin_selberg(delta20k):
    assert forms.rankin_selberg_ratio(delta20k, 1) == 1.0
    r3 = forms.rankin_selberg_ratio(delta20k, 1e3)
    assert 0.1 <= r3 <= 10
    # direct summation oracle
    direct = math.fsum(float(x) ** 2 for x in delta20k.lam[1:1001]) / 1000
    assert r3 == pytest.approx(direct, rel=1e-13)


def test_rankin_selberg_slow_variation(delta100k):
    ratio = forms.rankin_selberg_ratio(delta100k, 1e5) / forms.rankin_selberg_ratio(delta100k, 1e4)
    assert 0.5 <= ratio <= 2


def test_coefficient_file_roundtrip(tmp_path, delta20k):
    p = tmp_path / "d.txt"
    forms.write_coefficient_file(p, delta20k.coeffs[:100])
    g = forms.load_eigenform(p)
    assert g.coeffs == delta20k.coeffs[:100] and g.weight == 12


def test_coefficient_file_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("# form=x k=12\n1\t1\n3\t5\n")
    with pytest.raises(ValueError, match=":3:"):
        forms.read_coefficient_file(p)


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GL2LFUN_CACHE_DIR", str(tmp_path))
    forms._tau_table_cached.cache_clear()
    a = forms.tau_table(77)
    assert (tmp_path / "delta_77.txt").exists()
    forms._tau_table_cached.cache_clear()
    assert forms.tau_table(77) == a
    forms._tau_table_cached.cache_clear()


def test_maass_file_roundtrip(tmp_path):
    lam = forms_lam = np.array([1.0, -0.5, 0.25])
    p = tmp_path / "m.txt"
    forms.write_maass_file(p, 9.53, forms_lam)
    m = forms.read_maass_file(p)
    assert m.nu == 9.53 and np.array_equal(m.lam[1:], lam)
    p.write_text("1\t1.0\n")
    with pytest.raises(ValueError, match="header"):
        forms.read_maass_file(p)


def test_weight_validation():
    with pytest.raises(ValueError):
        forms.Eigenform(weight=11, coeffs=(1,))
