"""Exact counts ``g_{n,N}``, the asymptotic formula
``g_{n,N} ~ A N^(c_m - 1) c_{n - m(N-1)}`` and the law of the total cycle
count ``P``.

Every infinite sum over the cycle length ``j`` (in ``A``, ``G(rho)``,
``G_{>m}(rho)`` and the generating function of ``P``) is cut through
:class:`RadiusSums`, whose truncation bounds come from

    1 <= C(z^j) / (c_m z^(jm)) <= 1 + A' z^j,   A' = C(rho) rho^(-2m) / c_m.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import mpmath as mp
import numpy as np

from .classes import CountingSequence, Domain, SeriesValue, evaluate_C
from .exceptions import DomainError, IntegralityError, TruncationRangeError, UncertifiedTailError
from .series import BiSeries, generalized_binomials, mset_product_form

# ---------------------------------------------------------------------------
# exact tables


@dataclass(frozen=True, eq=False)
class BivariateTable:
    """``g_{n,N}`` for one class; thin wrapper over :class:`BiSeries`."""

    seq_name: str
    m: int
    c_m: object
    series: BiSeries

    @property
    def n_max(self) -> int:
        return self.series.n_max

    @property
    def N_max(self) -> int:
        return self.series.N_max

    @property
    def domain(self) -> Domain:
        return self.series.domain

    @property
    def exact(self) -> bool:
        return self.domain is Domain.EXACT

    def __getitem__(self, idx):
        return self.series[idx]

    def g(self, n: int, N: int):
        if n > self.n_max or N > self.N_max or n < 0 or N < 0:
            raise TruncationRangeError(f"({n}, {N}) outside the table")
        return self.series[n, N]

    def log_g(self, n: int, N: int) -> float:
        return self.series.log_abs(n, N)

    @property
    def values(self) -> np.ndarray:
        return self.series.values

    def rows(self) -> Iterator[tuple]:
        """``(n, N, g_{n,N})`` over every stored entry."""
        for n in range(self.n_max + 1):
            for N in range(self.N_max + 1):
                yield n, N, self.series[n, N]


def exact_table(seq: CountingSequence, n_max: int, N_max: Optional[int] = None,
                scale: Optional[float] = None) -> BivariateTable:
    """Product-form table plus the closed-form check on the ``n = mN`` diagonal."""
    series = mset_product_form(seq, n_max, N_max, scale=scale)
    m, c_m = seq.m, seq.c_m
    binoms = generalized_binomials(c_m, series.N_max, seq.exact)
    for N in range(series.N_max + 1):
        if m * N > series.n_max:
            break
        if seq.exact:
            if series.values[m * N, N] != binoms[N]:
                raise IntegralityError(f"g_{{{m * N},{N}}} != binom(c_m+N-1, N)")
        else:
            got = series.log_abs(m * N, N)
            want = math.log(binoms[N])
            if abs(got - want) > 1e-9 * max(1.0, abs(want)):
                raise ArithmeticError(f"g_{{{m * N},{N}}} deviates from binom(c_m+N-1, N)")
    return BivariateTable(seq.name, m, c_m, series)


def _partitions_exact(n: int, N: int, largest: int) -> Iterator[tuple]:
    """Partitions of ``n`` into exactly ``N`` parts, each part <= ``largest``."""
    if N == 0:
        if n == 0:
            yield ()
        return
    for part in range(min(n - (N - 1), largest), 0, -1):
        if part * N < n:
            break
        for rest in _partitions_exact(n - part, N - 1, part):
            yield (part,) + rest


def enumerate_multisets(seq: CountingSequence, n: int, N: int) -> Iterator[tuple]:
    """Every multiset of size ``n`` with ``N`` components, as sorted
    ``((k, type_index, d), ...)`` tuples (type indices start at 1)."""
    if not seq.exact:
        raise DomainError("enumeration needs an integer counting sequence")
    for parts in _partitions_exact(n, N, n):
        sizes = sorted(set(parts))
        choices = []
        ok = True
        for k in sizes:
            j = parts.count(k)
            ck = seq[k]
            if ck == 0:
                ok = False
                break
            choices.append([(k, combo) for combo in
                            itertools.combinations_with_replacement(range(1, ck + 1), j)])
        if not ok:
            continue
        for pick in itertools.product(*choices):
            comps = []
            for k, combo in pick:
                for t in sorted(set(combo)):
                    comps.append((k, t, combo.count(t)))
            yield tuple(comps)


def brute_force_gnN(seq: CountingSequence, n: int, N: int) -> int:
    """Count ``G_{n,N}`` by listing its members one by one.  Test oracle only."""
    if not seq.exact:
        raise DomainError("brute force needs an integer counting sequence")
    if n > 14:
        raise ValueError("brute force is limited to n <= 14")
    if n < 0 or N < 0:
        return 0
    return sum(1 for _ in enumerate_multisets(seq, n, N))


# ---------------------------------------------------------------------------
# sums over cycle lengths


class RadiusSums:
    """Cached ``C(rho^j)`` and ``C(rho^j) - c_m rho^(jm)`` with their errors.

    ``c_tol`` is the absolute tolerance used for ``C(rho)``; deeper ``j`` are
    evaluated relative to their leading term ``c_m rho^(jm)``.
    """

    def __init__(self, seq: CountingSequence, rho: float, c_tol: float = 1e-9):
        if not 0 < rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        self.seq = seq
        self.rho = float(rho)
        self.c_tol = float(c_tol)
        self.m = seq.m
        self.c_m = float(seq.c_m)
        self._full: dict = {}
        self._excess: dict = {}
        self.C_rho = self.full(1).value
        self.A_prime = self.C_rho * self.rho ** (-2 * self.m) / self.c_m

    def leading(self, j: int) -> float:
        return self.c_m * self.rho ** (j * self.m)

    def _tol(self, j: int) -> float:
        return self.c_tol if j == 1 else self.c_tol * 1e-3 * self.leading(j)

    def full(self, j: int) -> SeriesValue:
        if j not in self._full:
            self._full[j] = evaluate_C(self.seq, self.rho, self.rho**j, self._tol(j))
        return self._full[j]

    def excess(self, j: int) -> SeriesValue:
        """``C(rho^j) - c_m rho^(jm)``, summed without cancellation."""
        if j not in self._excess:
            if self.seq.finite and self.seq.K == self.m:
                self._excess[j] = SeriesValue(0.0, 0.0, 0.0, "finite")
            else:
                self._excess[j] = evaluate_C(self.seq, self.rho, self.rho**j, self._tol(j),
                                             skip_leading=True)
        return self._excess[j]

    # tails of the j-sums, all from the majorant above
    def tail_log_G(self, J: int) -> float:
        """Bound on ``sum_{j>J} C(rho^j)/j``."""
        r = self.rho**self.m
        return self.c_m * (1 + self.A_prime * self.rho) * r ** (J + 1) / ((J + 1) * (1 - r))

    def tail_excess(self, J: int) -> float:
        """Bound on ``sum_{j>J} (C(rho^j) - c_m rho^(jm)) / (j rho^(jm))``."""
        return self.c_m * self.A_prime * self.rho ** (J + 1) / ((J + 1) * (1 - self.rho))

    def cutoff(self, tail, tol: float, j_max: int = 10_000) -> int:
        J = 1
        while tail(J) > tol:
            J += 1
            if J > j_max:
                raise UncertifiedTailError("cycle-length sum does not converge fast enough")
        return J

    def log_G(self, tol: float = 1e-12) -> tuple[float, int, float]:
        """``log G(rho) = sum_j C(rho^j)/j`` as ``(value, j_cutoff, error bound)``."""
        J = self.cutoff(self.tail_log_G, tol / 2)
        vals = [self.full(j) for j in range(1, J + 1)]
        s = sum(v.value / j for j, v in enumerate(vals, start=1))
        err = self.tail_log_G(J) + sum(v.error / j for j, v in enumerate(vals, start=1))
        return s, J, err

    def log_G_gtm(self, tol: float = 1e-12) -> tuple[float, int, float]:
        """``log G_{>m}(rho) = sum_j (C(rho^j) - c_m rho^(jm)) / (j rho^(jm))``."""
        J = self.cutoff(self.tail_excess, tol / 2)
        s = 0.0
        err = self.tail_excess(J)
        for j in range(1, J + 1):
            v = self.excess(j)
            lead = self.rho ** (j * self.m)
            s += v.value / (j * lead)
            err += v.error / (j * lead)
        return s, J, err

    def cycle_ratio(self, j: int) -> float:
        """``C(rho^j) / (c_m rho^(jm))``."""
        return 1.0 + self.excess(j).value / self.leading(j)


# ---------------------------------------------------------------------------
# asymptotic model


@dataclass(frozen=True)
class AsymptoticModel:
    rho: float
    A: float
    c_m: object
    m: int
    j_cutoff: int
    tail_bound: float
    log_sum: float = field(default=0.0)  # sum_j (C(rho^j) - c_m rho^(jm)) / (j rho^(jm))


def constant_A(seq: CountingSequence, rho: float, tol: float = 1e-8,
               c_tol: Optional[float] = None, radius: Optional[RadiusSums] = None) -> AsymptoticModel:
    """``A = exp(sum_j (C(rho^j) - c_m rho^(jm)) / (j rho^(jm))) / Gamma(c_m)``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if radius is None:
        radius = RadiusSums(seq, rho, c_tol if c_tol is not None else tol * rho**seq.m / 2)
    s, J, err = radius.log_G_gtm(tol)
    if err >= tol:
        raise UncertifiedTailError(f"A is only certified to {err:.3g} (tol {tol:.3g}); raise K")
    c_m = seq.c_m
    A = math.exp(s - math.lgamma(float(c_m)))
    return AsymptoticModel(float(rho), A, c_m, seq.m, J, err, s)


def log_asymptotic_gnN(model: AsymptoticModel, seq: CountingSequence, n: int, N: int) -> float:
    idx = n - model.m * (N - 1)
    if idx > seq.K and not seq.finite:
        raise TruncationRangeError(f"needs c_{idx} but {seq.name} stops at K={seq.K}")
    if N < 1 or idx < 1:
        return -math.inf
    c = seq[idx]
    if c == 0:
        return -math.inf
    return math.log(model.A) + (float(model.c_m) - 1) * math.log(N) + math.log(c)


def asymptotic_gnN(model: AsymptoticModel, seq: CountingSequence, n: int, N: int) -> float:
    """``A N^(c_m - 1) c_{n - m(N-1)}`` (may overflow to ``inf``; see the log form)."""
    v = log_asymptotic_gnN(model, seq, n, N)
    if v == -math.inf:
        return 0.0
    return math.exp(v) if v < 709 else math.inf


def ratio_grid(table: BivariateTable, model: AsymptoticModel, seq: CountingSequence,
               points) -> list[dict]:
    """Exact over asymptotic at each ``(n, N)``; computed in log space."""
    rows = []
    for n, N in points:
        lg = table.log_g(n, N)
        la = log_asymptotic_gnN(model, seq, n, N)
        ratio = math.exp(lg - la) if math.isfinite(lg) and math.isfinite(la) else float("nan")
        rows.append({"n": n, "N": N, "log_exact": lg, "log_asymptotic": la,
                     "ratio": ratio, "rel_error": abs(ratio - 1)})
    return rows


# ---------------------------------------------------------------------------
# distribution of P = sum_j j P_j


def _exp_coeffs(h: list, N_max: int) -> list:
    """Coefficients of ``exp(sum_j h_j x^j)`` (``h[0]`` ignored) in mpmath."""
    b = [mp.mpf(1)] + [mp.mpf(0)] * N_max
    for n in range(1, N_max + 1):
        b[n] = mp.fsum(j * h[j] * b[n - j] for j in range(1, min(n, len(h) - 1) + 1)) / n
    return b


@dataclass(frozen=True, eq=False)
class PDistribution:
    """Law of ``P = sum_j j P_j`` with ``P_j ~ Pois(lambda_j)``.

    ``lambdas`` are the certified ``C(rho^j)/j`` for ``j <= j_cutoff``; beyond
    the cutoff the model uses the leading part ``c_m rho^(jm)/j``, whose
    neglected excess is inside ``lambda_error``.  All coefficient work is done
    in ``mpmath`` at ``dps`` digits, so the geometric approach of
    ``Pr[P=N]`` to its leading term stays visible well below double
    precision.
    """

    rho: float
    c_m: object
    m: int
    lambdas: tuple
    j_cutoff: int
    N_max: int
    dps: int
    lambda_error: float
    tail: float

    def _h(self, ell: int = 0) -> list:
        r = mp.mpf(self.rho) ** self.m
        c_m = mp.mpf(float(self.c_m))
        h = [mp.mpf(0)]
        for j in range(1, self.N_max + 1):
            if j <= ell:
                h.append(mp.mpf(0))
            elif j <= self.j_cutoff:
                h.append(mp.mpf(self.lambdas[j - 1]))
            else:
                h.append(c_m * r**j / j)
        return h

    def _log_norm(self, ell: int = 0):
        """``log F^(ell)(1)`` of the unnormalized series (``ell = 0``: ``log G``)."""
        r = mp.mpf(self.rho) ** self.m
        c_m = mp.mpf(float(self.c_m))
        s = -c_m * mp.log1p(-r)
        for j in range(1, self.j_cutoff + 1):
            lead = c_m * r**j / j
            s += (mp.mpf(self.lambdas[j - 1]) - lead) if j > ell else -lead
        for j in range(self.j_cutoff + 1, ell + 1):
            s -= c_m * r**j / j
        return s

    def _coeffs(self, ell: int = 0) -> list:
        with mp.workdps(self.dps):
            key = ("coeffs", ell)
            cache = self.__dict__.setdefault("_cache", {})
            if key not in cache:
                norm = mp.exp(-self._log_norm(ell))
                cache[key] = [b * norm for b in _exp_coeffs(self._h(ell), self.N_max)]
            return cache[key]

    @property
    def G_rho(self) -> float:
        with mp.workdps(self.dps):
            return float(mp.exp(self._log_norm(0)))

    @property
    def probs(self) -> tuple:
        return tuple(float(p) for p in self._coeffs(0))

    def _log_B0(self):
        r = mp.mpf(self.rho) ** self.m
        c_m = mp.mpf(float(self.c_m))
        s = mp.fsum((mp.mpf(self.lambdas[j - 1]) - c_m * r**j / j) / r**j
                    for j in range(1, self.j_cutoff + 1))
        return s - self._log_norm(0) - mp.loggamma(c_m)

    @property
    def B0(self) -> float:
        with mp.workdps(self.dps):
            return float(mp.exp(self._log_B0()))

    @property
    def A(self) -> float:
        """``A = B0 G(rho)`` implied by the same lambdas."""
        return self.B0 * self.G_rho

    def leading(self, N: int) -> float:
        """``B0 N^(c_m - 1) rho^(mN)``."""
        return self.B0 * N ** (float(self.c_m) - 1) * self.rho ** (self.m * N)

    def ratio_mp(self, N: int):
        with mp.workdps(self.dps):
            lead = (mp.exp(self._log_B0()) * mp.mpf(N) ** (mp.mpf(float(self.c_m)) - 1)
                    * mp.mpf(self.rho) ** (self.m * N))
            return self._coeffs(0)[N] / lead

    def ratio(self, N: int) -> float:
        """``Pr[P=N] / (B0 N^(c_m-1) rho^(mN))``."""
        return float(self.ratio_mp(N))

    def ratio_deviation(self, N: int) -> float:
        """``|ratio - 1|``, resolved below double precision."""
        with mp.workdps(self.dps):
            return float(abs(self.ratio_mp(N) - 1))

    def tail_coeffs(self, ell: int) -> np.ndarray:
        """Probabilities of ``sum_{j > ell} j P_j`` up to ``N_max``."""
        return np.array([float(b) for b in self._coeffs(ell)])

    def _conditional_mp(self, N: int) -> list:
        with mp.workdps(self.dps):
            lam1 = mp.mpf(self.lambdas[0])
            f1 = self._coeffs(1)
            pN = self._coeffs(0)[N]
            return [mp.exp(-lam1) * lam1**p / mp.factorial(p) * f1[N - p] / pN
                    for p in range(N + 1)]

    def conditional_P1(self, N: int) -> np.ndarray:
        """``Pr[P_1 = p | P = N]`` for ``p = 0..N``."""
        return np.array([float(v) for v in self._conditional_mp(N)])

    def conditional_P1_tv(self, N: int) -> float:
        """Total variation between ``P_1 | P = N`` and ``Pois(C(rho) rho^-m)``."""
        with mp.workdps(self.dps):
            mu = mp.mpf(self.lambdas[0]) * mp.mpf(self.rho) ** (-self.m)
            cond = self._conditional_mp(N)
            diff = mp.fsum(abs(c - mp.exp(-mu) * mu**p / mp.factorial(p))
                           for p, c in enumerate(cond))
            pois_mass = mp.fsum(mp.exp(-mu) * mu**p / mp.factorial(p) for p in range(N + 1))
            return float((diff + (1 - pois_mass)) / 2)


def p_distribution(seq: CountingSequence, rho: float, N_max: int, tol: float = 1e-8,
                   radius: Optional[RadiusSums] = None) -> PDistribution:
    """Law of ``P`` with generating function
    ``F(x) = exp(sum_j C(rho^j) x^j / j) / G(rho)``.

    ``B0`` is computed from the same ``lambda_j`` as the coefficients, so the
    reported ratio measures the coefficient asymptotics and nothing else.
    """
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    if radius is None:
        radius = RadiusSums(seq, rho, tol * rho**seq.m / 2)
    _, J_G, err_G = radius.log_G(tol)
    _, J_A, err_A = radius.log_G_gtm(tol)
    if max(err_G, err_A) >= tol:
        raise UncertifiedTailError(f"radius sums only certified to {max(err_G, err_A):.3g}")
    J = max(J_G, J_A)
    lambdas = tuple(radius.full(j).value / j for j in range(1, J + 1))
    lam_err = sum(radius.full(j).error / j for j in range(1, J + 1)) + radius.tail_excess(J)
    # rho^(mN) must stay resolvable next to 1 with room for the deviation
    dps = 30 + int(N_max * seq.m * -math.log10(rho)) * 2
    tail = _chernoff_tail(radius, lambdas, N_max)
    return PDistribution(float(rho), seq.c_m, seq.m, lambdas, J, int(N_max), dps, lam_err, tail)


def _chernoff_tail(radius: RadiusSums, lambdas: tuple, N_max: int) -> float:
    """``Pr[P > N_max] <= min_x F(x) / x^(N_max+1)`` over ``1 < x < rho^-m``."""
    r = radius.rho**radius.m
    best = 1.0
    for frac in np.linspace(0.05, 0.95, 19):
        x = 1 + frac * (1 / r - 1)
        # log F(x) = sum_j lambda_j (x^j - 1); beyond the cached j use the majorant
        s = 0.0
        for j, lam in enumerate(lambdas, start=1):
            s += lam * (x**j - 1)
        J = len(lambdas)
        xr = x * r
        s += radius.c_m * (1 + radius.A_prime * radius.rho) * xr ** (J + 1) / ((J + 1) * (1 - xr))
        best = min(best, math.exp(s - (N_max + 1) * math.log(x)))
    return best


def poisson_pmf(lam: float, size: int) -> np.ndarray:
    p = np.arange(size)
    return np.exp(-lam + p * math.log(lam) - np.array([math.lgamma(k + 1) for k in p]))


def conditional_P1_tv(pdist: PDistribution, N: int) -> float:
    return pdist.conditional_P1_tv(N)
