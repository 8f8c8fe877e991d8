"""Hecke eigenform coefficients for SL(2, Z).

Ramanujan's Delta is generated exactly from the q-expansion
q * prod (1 - q^n)^24; other forms enter through coefficient files.
Normalised coefficients are lambda(n) = a(n) / n^((k-1)/2).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import _backend

TAU_NMAX_LIMIT = 10**6


class CoefficientCacheError(LookupError):
    """Raised when a computation needs coefficients beyond the cached range."""

    def __init__(self, needed: int, have: int):
        super().__init__(f"coefficients needed up to n={needed}, cache holds n_max={have}")
        self.needed = needed
        self.have = have


def tau_table(n_max: int) -> list[int]:
    """Exact tau(1), ..., tau(n_max); index 0 of the result is tau(1).

    Raises ValueError for n_max < 1 or n_max > 10**6 and OverflowError if an
    intermediate leaves the signed 128-bit range.
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max!r}")
    if n_max > TAU_NMAX_LIMIT:
        raise ValueError(f"n_max={n_max} exceeds the supported limit {TAU_NMAX_LIMIT}")
    return list(_tau_table_cached(int(n_max)))


@lru_cache(maxsize=8)
def _tau_table_cached(n_max: int) -> tuple[int, ...]:
    cache_dir = os.environ.get("GL2LFUN_CACHE_DIR")
    if cache_dir:
        path = Path(cache_dir) / f"delta_{n_max}.txt"
        if path.exists():
            _, _, tau = read_coefficient_file(path)
            if len(tau) >= n_max:
                return tuple(tau[:n_max])
    # Delta = q * eta^24 shifted, so tau(n) is the q^(n-1) coefficient of prod(1-q^j)^24
    tau = tuple(_backend.eta_power(n_max, 24))
    if cache_dir:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        write_coefficient_file(Path(cache_dir) / f"delta_{n_max}.txt", tau, k=12)
    return tau


def divisor_count_table(n_max: int) -> np.ndarray:
    """d(n) for 0 <= n <= n_max (d(0) set to 0)."""
    d = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, n_max + 1):
        d[i::i] += 1
    return d


def prime_sieve(n_max: int) -> np.ndarray:
    """Sorted primes p <= n_max."""
    if n_max < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n_max + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(math.isqrt(n_max)) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p)


@dataclass(frozen=True)
class Eigenform:
    """A level-one holomorphic Hecke eigenform with a finite coefficient table.

    ``coeffs`` holds the exact integer Fourier coefficients a(1), ..., a(n_max);
    ``lam`` holds the normalised coefficients as float64 with ``lam[0] = 0``
    so that ``lam[n]`` is lambda(n).
    """

    weight: int
    coeffs: tuple[int, ...] = field(repr=False)
    label: str = "delta"
    lam: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.weight % 2 or self.weight < 12:
            raise ValueError(f"weight must be an even integer >= 12, got {self.weight}")
        if not self.coeffs or self.coeffs[0] != 1:
            raise ValueError("coefficient table must start with a(1) = 1")
        n = np.arange(1, len(self.coeffs) + 1, dtype=np.float64)
        expo = (self.weight - 1) / 2
        a = np.array([float(c) for c in self.coeffs], dtype=np.float64)
        lam = np.empty(len(self.coeffs) + 1, dtype=np.float64)
        lam[0] = 0.0
        lam[1:] = a / n**expo
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def n_max(self) -> int:
        return len(self.coeffs)

    def require(self, n: int) -> None:
        if n > self.n_max:
            raise CoefficientCacheError(int(n), self.n_max)

    def root_number(self) -> int:
        """epsilon(f) = i^k for level one, i.e. (-1)^(k/2)."""
        return -1 if (self.weight // 2) % 2 else 1


def delta(n_max: int = 20000) -> Eigenform:
    """Ramanujan's Delta with coefficients up to n_max."""
    return _delta_cached(int(n_max))


@lru_cache(maxsize=8)
def _delta_cached(n_max: int) -> Eigenform:
    return Eigenform(weight=12, coeffs=tuple(tau_table(n_max)), label="delta")


def coefficient(f: Eigenform, n: int) -> float:
    """Normalised coefficient lambda_f(n)."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    f.require(n)
    return float(f.lam[n])


def rankin_selberg_ratio(f: Eigenform, x: float) -> float:
    """(sum_{n <= x} lambda_f(n)^2) / x."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    m = int(math.floor(x))
    f.require(m)
    return _backend.neumaier_sum(np.ascontiguousarray(f.lam[1 : m + 1] ** 2)) / x


def deligne_ratio_max(f: Eigenform, n_max: int) -> float:
    """max_{n <= n_max} |lambda(n)| / d(n)."""
    f.require(n_max)
    d = divisor_count_table(n_max)
    return float(np.max(np.abs(f.lam[1 : n_max + 1]) / d[1:]))


def multiplicativity_error(f: Eigenform, n_max: int) -> dict:
    """Worst relative |lambda(mn) - lambda(m) lambda(n)| over coprime 1 < m < n, mn <= n_max,
    plus whether the exact integers satisfy a(mn) = a(m) a(n) on the same pairs."""
    f.require(n_max)
    lam = f.lam
    worst, exact = 0.0, True
    for m in range(2, int(math.isqrt(n_max)) + 1):
        n = np.arange(m + 1, n_max // m + 1)
        n = n[np.gcd(n, m) == 1]
        if n.size == 0:
            continue
        prod = lam[m] * lam[n]
        rel = np.abs(lam[m * n] - prod) / np.maximum(np.abs(prod), np.abs(lam[m * n]))
        worst = max(worst, float(np.max(rel)))
        am = f.coeffs[m - 1]
        exact = exact and all(f.coeffs[m * k - 1] == am * f.coeffs[k - 1] for k in n.tolist())
    return {"max_rel_error": worst, "exact": exact}


# ---------------------------------------------------------------- file formats


def write_coefficient_file(path, coeffs, k: int = 12, label: str = "delta") -> None:
    """Write ``# form=<label> k=<k> n_max=<N>`` followed by ``n<TAB>a(n)`` lines."""
    path = Path(path)
    lines = [f"# form={label} k={k} n_max={len(coeffs)}"]
    lines.extend(f"{n}\t{c}" for n, c in enumerate(coeffs, start=1))
    path.write_text("\n".join(lines) + "\n")


def read_coefficient_file(path) -> tuple[str, int, list[int]]:
    """Parse a holomorphic coefficient file; returns (label, k, [a(1), ...])."""
    path = Path(path)
    label, k, n_max = "delta", 12, None
    coeffs: list[int] = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "form":
                        label = val
                    elif key == "k":
                        k = int(val)
                    elif key == "n_max":
                        n_max = int(val)
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'n<TAB>a(n)'")
            n, c = int(parts[0]), int(parts[1])
            if n != len(coeffs) + 1:
                raise ValueError(f"{path}:{lineno}: expected n={len(coeffs) + 1}, got {n}")
            coeffs.append(c)
    if n_max is not None and n_max != len(coeffs):
        raise ValueError(f"{path}: header n_max={n_max} but {len(coeffs)} rows")
    return label, k, coeffs


def load_eigenform(path) -> Eigenform:
    label, k, coeffs = read_coefficient_file(path)
    return Eigenform(weight=k, coeffs=tuple(coeffs), label=label)


@dataclass(frozen=True)
class MaassCoefficientFile:
    """Externally supplied Hecke-Maass coefficients.

    Assumes the Hecke normalisation lambda(1) = 1 and an even form
    (lambda(-n) = lambda(n)); the file format cannot express anything else.
    """

    nu: float
    lam: np.ndarray = field(repr=False)  # lam[n] = lambda(n), lam[0] unused

    @property
    def n_max(self) -> int:
        return len(self.lam) - 1


def read_maass_file(path) -> MaassCoefficientFile:
    """Parse ``# maass nu=<float>`` then ``n<TAB>lambda(n)`` lines."""
    path = Path(path)
    nu = None
    vals: list[float] = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "nu":
                        nu = float(val)
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'n<TAB>lambda(n)'")
            n, v = int(parts[0]), float(parts[1])
            if n != len(vals) + 1:
                raise ValueError(f"{path}:{lineno}: n must increase from 1 in steps of 1")
            vals.append(v)
    if nu is None:
        raise ValueError(f"{path}: missing '# maass nu=<float>' header")
    if not vals:
        raise ValueError(f"{path}: no coefficients")
    if abs(vals[0] - 1.0) > 1e-8:
        raise ValueError(f"{path}: lambda(1) = {vals[0]} is not Hecke-normalised")
    lam = np.concatenate([[0.0], np.asarray(vals, dtype=np.float64)])
    return MaassCoefficientFile(nu=nu, lam=lam)


def write_maass_file(path, nu: float, lam) -> None:
    lines = [f"# maass nu={nu!r}"]
    lines.extend(f"{n}\t{float(v)!r}" for n, v in enumerate(lam, start=1))
    Path(path).write_text("\n".join(lines) + "\n")
