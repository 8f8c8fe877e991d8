"""Pure-Python/numpy twins of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np

_I128_MAX = (1 << 127) - 1
_I128_MIN = -(1 << 127)

# three primes below 2**59; their product exceeds 2**176, far beyond the int128 range
_MODULI = (576460752303423433, 576460752303423263, 576460752303422327)
# signed partial sums stay below 8 * 2**59 = 2**62 between reductions
_REDUCE_EVERY = 7


def _pentagonal(n: int) -> tuple[np.ndarray, np.ndarray]:
    pent = [0]
    sgn = [1]
    k = 1
    while True:
        p1 = k * (3 * k - 1) // 2
        if p1 >= n:
            break
        s = -1 if k % 2 else 1
        pent.append(p1)
        sgn.append(s)
        p2 = k * (3 * k + 1) // 2
        if p2 < n:
            pent.append(p2)
            sgn.append(s)
        k += 1
    order = np.argsort(pent, kind="stable")
    return np.asarray(pent, dtype=np.int64)[order], np.asarray(sgn, dtype=np.int64)[order]


def _eta_power_mod(n: int, power: int, p: int, pent: np.ndarray, sgn: np.ndarray) -> np.ndarray:
    d = np.zeros(n, dtype=np.int64)
    d[0] = 1
    for _ in range(power):
        acc = d.copy()
        pending = 0
        for shift, s in zip(pent[1:], sgn[1:]):
            shift = int(shift)
            if s > 0:
                acc[shift:] += d[: n - shift]
            else:
                acc[shift:] -= d[: n - shift]
            pending += 1
            if pending == _REDUCE_EVERY:
                np.remainder(acc, p, out=acc)
                pending = 0
        d = np.remainder(acc, p)
    return d


def eta_power(n: int, power: int) -> list[int]:
    """Coefficients of prod_{j>=1} (1 - q^j)^power up to q^{n-1}, as Python ints.

    Multi-modular evaluation with CRT reconstruction. Intermediates are not
    visible here, so the int128 guard is applied to the final coefficients,
    which for power 24 are the largest that occur.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if power < 0:
        raise ValueError("power must be non-negative")
    pent, sgn = _pentagonal(n)
    residues = [_eta_power_mod(n, power, p, pent, sgn) for p in _MODULI]
    M = 1
    for p in _MODULI:
        M *= p
    basis = []
    for p in _MODULI:
        Mp = M // p
        basis.append(Mp * pow(Mp, -1, p))
    half = M // 2
    out = []
    for m in range(n):
        v = sum(int(r[m]) * b for r, b in zip(residues, basis)) % M
        if v > half:
            v -= M
        if v > _I128_MAX or v < _I128_MIN:
            raise OverflowError("eta-power coefficient exceeds signed 128-bit range")
        out.append(v)
    return out


def neumaier_sum(x) -> float:
    """Compensated (Neumaier) sum in index order; bit-identical to the compiled twin."""
    s = 0.0
    c = 0.0
    for v in np.asarray(x, dtype=np.float64).tolist():
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def phase_line_sum(w_re, w_im, tau0: float, h: float, logx, chunk: int = 256) -> np.ndarray:
    """S_i = sum_j w_j exp(-i (tau0 + j h) logx_i), by dense exponentials."""
    w = np.asarray(w_re, dtype=np.float64) + 1j * np.asarray(w_im, dtype=np.float64)
    L = np.asarray(logx, dtype=np.float64)
    tau = tau0 + h * np.arange(w.size)
    out = np.empty(L.size, dtype=np.complex128)
    for i in range(0, L.size, chunk):
        out[i : i + chunk] = np.exp(-1j * np.outer(L[i : i + chunk], tau)) @ w
    return out
