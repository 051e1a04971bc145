"""Truncated power series in one and two variables.

Exact mode works over ``Fraction``/``int`` and is error free; real mode uses
floats.  Real bivariate tables are stored scaled, ``a_{n,N} * scale**n``, so
that coefficients growing like ``rho**-n`` stay inside double range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .classes import CountingSequence, Domain
from .exceptions import IntegralityError


def _zero(domain: Domain):
    return Fraction(0) if domain is Domain.EXACT else 0.0


def _coerce(value, domain: Domain):
    if domain is Domain.EXACT:
        return value if isinstance(value, Fraction) else Fraction(value)
    return float(value)


@dataclass(frozen=True)
class UniSeries:
    """``a_0 + a_1 x + ... + a_K x^K``."""

    domain: Domain
    coeffs: tuple

    def __post_init__(self):
        domain = Domain.parse(self.domain)
        object.__setattr__(self, "domain", domain)
        if not self.coeffs:
            raise ValueError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(_coerce(a, domain) for a in self.coeffs))

    @classmethod
    def from_sequence(cls, seq: CountingSequence, K: Optional[int] = None) -> "UniSeries":
        K = seq.K if K is None else K
        return cls(seq.domain, tuple(seq.padded(K)))

    @classmethod
    def zero(cls, K: int, domain=Domain.EXACT) -> "UniSeries":
        return cls(domain, (0,) * (K + 1))

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def _check(self, other: "UniSeries"):
        if not isinstance(other, UniSeries):
            return NotImplemented
        if other.domain is not self.domain:
            raise ValueError("cannot mix exact and real series")
        return min(self.K, other.K)

    def __add__(self, other):
        K = self._check(other)
        if K is NotImplemented:
            return K
        return UniSeries(self.domain, tuple(a + b for a, b in zip(self.coeffs[:K + 1], other.coeffs)))

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            return UniSeries(self.domain, tuple(a * other for a in self.coeffs))
        K = self._check(other)
        if K is NotImplemented:
            return K
        out = [_zero(self.domain)] * (K + 1)
        for i, a in enumerate(self.coeffs[:K + 1]):
            if a:
                for j in range(K + 1 - i):
                    out[i + j] += a * other.coeffs[j]
        return UniSeries(self.domain, tuple(out))

    __rmul__ = __mul__

    def evaluate(self, x: float) -> float:
        return float(sum(float(a) * x**n for n, a in enumerate(self.coeffs)))

    def derivative(self) -> "UniSeries":
        if self.K == 0:
            return UniSeries(self.domain, (0,))
        return UniSeries(self.domain, tuple(n * a for n, a in enumerate(self.coeffs) if n > 0))

    def plethysm(self, j: int) -> "UniSeries":
        return plethysm(self, j)


def add(a: UniSeries, b: UniSeries) -> UniSeries:
    return a + b


def mul(a: UniSeries, b: UniSeries) -> UniSeries:
    return a * b


def plethysm(C: UniSeries, j: int) -> UniSeries:
    """``C(x^j)`` truncated at the order of ``C``."""
    if j < 1:
        raise ValueError("plethysm index must be >= 1")
    out = [_zero(C.domain)] * (C.K + 1)
    for k, c in enumerate(C.coeffs):
        if j * k > C.K:
            break
        out[j * k] = c
    return UniSeries(C.domain, tuple(out))


def exp_series(H: UniSeries) -> UniSeries:
    """``exp(H)`` for ``H(0) = 0`` via ``n g_n = sum_k k h_k g_{n-k}``."""
    if H.coeffs[0] != 0:
        raise ValueError("exp_series needs H(0) = 0")
    g = [_coerce(1, H.domain)]
    for n in range(1, H.K + 1):
        s = sum((k * H.coeffs[k] * g[n - k] for k in range(1, n + 1)), _zero(H.domain))
        g.append(s / n)
    return UniSeries(H.domain, tuple(g))


def log_series(A: UniSeries) -> UniSeries:
    """``log(A)`` for ``A(0) = 1``."""
    if A.coeffs[0] != 1:
        raise ValueError("log_series needs a unit constant term")
    a = A.coeffs
    log = [_zero(A.domain)]
    for n in range(1, A.K + 1):
        s = n * a[n] - sum((k * log[k] * a[n - k] for k in range(1, n)), _zero(A.domain))
        log.append(s / n)
    return UniSeries(A.domain, tuple(log))


# ---------------------------------------------------------------------------
# bivariate


@dataclass(frozen=True, eq=False)
class BiSeries:
    """Dense table of ``a_{n,N}``, ``0 <= n <= n_max``, ``0 <= N <= N_max``.

    ``values[n, N]`` holds ``a_{n,N} * scale**n``; exact tables always have
    ``scale == 1`` and an object array of Python ints.
    """

    domain: Domain
    values: np.ndarray
    scale: float = 1.0

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    @property
    def N_max(self) -> int:
        return self.values.shape[1] - 1

    def __getitem__(self, idx):
        n, N = idx
        if not (0 <= n <= self.n_max and 0 <= N <= self.N_max):
            raise IndexError(f"({n}, {N}) outside table {self.n_max} x {self.N_max}")
        v = self.values[n, N]
        if self.domain is Domain.EXACT:
            return v
        if self.scale == 1.0:
            return float(v)
        if v == 0:
            return 0.0
        return math.exp(self.log_abs(n, N))

    def log_abs(self, n: int, N: int) -> float:
        """``log |a_{n,N}|`` without overflow (``-inf`` for zero entries)."""
        v = self.values[n, N]
        if v == 0:
            return -math.inf
        return math.log(abs(v)) - n * math.log(self.scale)

    def row_sums(self) -> list:
        """``sum_N a_{n,N}`` for each ``n`` (the ``y = 1`` specialization)."""
        if self.domain is Domain.EXACT:
            return [sum(int(v) for v in row) for row in self.values]
        return [math.exp(math.log(s) - n * math.log(self.scale)) if s > 0 else 0.0
                for n, s in enumerate(self.values.sum(axis=1))]


def _default_N_max(seq: CountingSequence, n_max: int, N_max: Optional[int]) -> int:
    return n_max // seq.m if N_max is None else int(N_max)


def _default_scale(seq: CountingSequence, n_max: int) -> float:
    # c_k scale^k <= ~1 for k <= n_max when c_k^(1/k) is increasing
    logs = [math.log(c) / k for k, c in enumerate(seq.coeffs[:n_max], start=1) if c > 0]
    top = max(logs) if logs else 0.0
    return math.exp(-top) if top > 0 else 1.0


def _empty_table(domain: Domain, n_max: int, N_max: int) -> np.ndarray:
    if domain is Domain.EXACT:
        g = np.zeros((n_max + 1, N_max + 1), dtype=object)
        g[:] = 0
        g[0, 0] = 1
    else:
        g = np.zeros((n_max + 1, N_max + 1))
        g[0, 0] = 1.0
    return g


def generalized_binomials(c, J: int, exact: bool) -> list:
    """``binom(c + j - 1, j)`` for ``j = 0..J`` (multisets of size ``j`` from ``c`` types)."""
    out = [1 if exact else 1.0]
    b = out[0]
    for j in range(1, J + 1):
        b = b * (c + j - 1) // j if exact else b * (c + j - 1) / j
        out.append(b)
    return out


def mset_product_form(seq: CountingSequence, n_max: int, N_max: Optional[int] = None,
                      scale: Optional[float] = None) -> BiSeries:
    """``prod_k (1 - y x^k)^(-c_k)`` expanded to ``x^n_max y^N_max``.

    DP over the component size ``k``; the factor for ``j`` components of size
    ``k`` is the generalized binomial ``binom(c_k + j - 1, j)``.
    """
    n_max = int(n_max)
    N_max = _default_N_max(seq, n_max, N_max)
    if n_max < 0 or N_max < 0:
        raise ValueError("n_max and N_max must be >= 0")
    exact = seq.exact
    c = seq.padded(n_max)
    if exact:
        scale = 1.0
    elif scale is None:
        scale = _default_scale(seq, n_max)
    g = _empty_table(seq.domain, n_max, N_max)
    for k in range(1, n_max + 1):
        ck = c[k]
        if ck == 0:
            continue
        J = min(n_max // k, N_max)
        if J == 0:
            continue
        binoms = generalized_binomials(ck, J, exact)
        old = g.copy()
        for j in range(1, J + 1):
            w = binoms[j] if exact else binoms[j] * scale ** (j * k)
            g[j * k:, j:] += w * old[:n_max + 1 - j * k, :N_max + 1 - j]
    return BiSeries(seq.domain, g, scale)


def _divisors(a: int) -> list:
    small, large = [], []
    d = 1
    while d * d <= a:
        if a % d == 0:
            small.append(d)
            if d * d != a:
                large.append(a // d)
        d += 1
    return small + large[::-1]


def mset_exp(seq: CountingSequence, n_max: int, N_max: Optional[int] = None,
             scale: Optional[float] = None) -> BiSeries:
    """``exp(sum_j y^j C(x^j) / j)`` via the differential recurrence

        n g_{n,N} = sum_{a <= n} sum_{b | a, b <= N} (a/b) c_{a/b} g_{n-a, N-b}.

    In exact mode ``(a/b) c_{a/b}`` is an integer, so the recurrence runs over
    ints and every division by ``n`` is checked for integrality.
    """
    n_max = int(n_max)
    N_max = _default_N_max(seq, n_max, N_max)
    if n_max < 0 or N_max < 0:
        raise ValueError("n_max and N_max must be >= 0")
    exact = seq.exact
    c = seq.padded(n_max)
    if exact:
        scale = 1.0
    elif scale is None:
        scale = _default_scale(seq, n_max)
    g = _empty_table(seq.domain, n_max, N_max)
    divs = [None] + [_divisors(a) for a in range(1, n_max + 1)]
    for n in range(1, n_max + 1):
        acc = g[n].copy()
        acc[:] = 0
        for a in range(1, n + 1):
            prev = g[n - a]
            for b in divs[a]:
                if b > N_max:
                    break
                k = a // b
                if c[k] == 0:
                    continue
                w = k * c[k] if exact else k * c[k] * scale**a
                acc[b:] += w * prev[:N_max + 1 - b]
        if exact:
            for N, v in enumerate(acc):
                q, r = divmod(v, n)
                if r:
                    raise IntegralityError(f"n g_{{{n},{N}}} = {v} not divisible by {n}")
                acc[N] = q
            g[n] = acc
        else:
            g[n] = acc / n
    return BiSeries(seq.domain, g, scale)


def multiset_counts(seq: CountingSequence, n_max: int) -> list:
    """Univariate ``g_n = [x^n] prod_k (1 - x^k)^(-c_k)`` (Euler transform)."""
    exact = seq.exact
    c = seq.padded(n_max)
    g = [1 if exact else 1.0] + [0 if exact else 0.0] * n_max
    for k in range(1, n_max + 1):
        if c[k] == 0:
            continue
        binoms = generalized_binomials(c[k], n_max // k, exact)
        new = list(g)
        for j in range(1, n_max // k + 1):
            for n in range(j * k, n_max + 1):
                new[n] += binoms[j] * g[n - j * k]
        g = new
    return g
