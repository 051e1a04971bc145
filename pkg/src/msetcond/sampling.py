"""Random multisets: the Poisson-cycle Boltzmann sampler at the radius, an exact
uniform sampler for fixed size and component count, and the limit law of the
remainder.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .classes import CountingSequence
from .enumeration import BivariateTable, RadiusSums
from .exceptions import DomainError, EmptySequenceError, EmptyStratumError, TruncationRangeError
from .rng import RandomStream, as_stream

Component = tuple  # (size k, type index t, multiplicity d)


@dataclass(frozen=True)
class MultisetObject:
    """A multiset of typed components, stored as sorted ``(k, t, d)`` triples."""

    components: tuple = ()

    def __post_init__(self):
        merged: dict = {}
        for k, t, d in self.components:
            k, t, d = int(k), int(t), int(d)
            if k < 1 or t < 1 or d < 0:
                raise ValueError(f"bad component {(k, t, d)}")
            if d:
                merged[(k, t)] = merged.get((k, t), 0) + d
        object.__setattr__(self, "components",
                           tuple((k, t, d) for (k, t), d in sorted(merged.items())))

    @property
    def total_size(self) -> int:
        return sum(k * d for k, _, d in self.components)

    n = total_size

    @property
    def kappa(self) -> int:
        return sum(d for _, _, d in self.components)

    def __len__(self):
        return len(self.components)

    def __bool__(self):
        return bool(self.components)

    def size_counts(self) -> dict:
        out: dict = {}
        for k, _, d in self.components:
            out[k] = out.get(k, 0) + d
        return out

    def check(self, seq: CountingSequence) -> None:
        """Raise unless every type index is valid for its size."""
        for k, t, _ in self.components:
            if t > seq[k]:
                raise ValueError(f"type index {t} exceeds c_{k} = {seq[k]}")

    def to_dict(self) -> dict:
        return {"n": self.total_size, "kappa": self.kappa,
                "components": [list(c) for c in self.components]}

    @classmethod
    def from_dict(cls, data: dict) -> "MultisetObject":
        return cls(tuple(tuple(c) for c in data["components"]))


@dataclass(frozen=True)
class SizeProfile:
    """Multiplicities by size only; used for real-valued classes."""

    counts: tuple = ()  # sorted (k, d)

    def __post_init__(self):
        merged: dict = {}
        for k, d in self.counts:
            if d < 0:
                raise ValueError("negative multiplicity")
            if d:
                merged[int(k)] = merged.get(int(k), 0) + int(d)
        object.__setattr__(self, "counts", tuple(sorted(merged.items())))

    @property
    def total_size(self) -> int:
        return sum(k * d for k, d in self.counts)

    n = total_size

    @property
    def kappa(self) -> int:
        return sum(d for _, d in self.counts)

    def __bool__(self):
        return bool(self.counts)

    def size_counts(self) -> dict:
        return dict(self.counts)

    def to_dict(self) -> dict:
        return {"n": self.total_size, "kappa": self.kappa,
                "sizes": [list(c) for c in self.counts]}


Sample = Union[MultisetObject, SizeProfile]


# ---------------------------------------------------------------------------
# Boltzmann parameters


@dataclass(frozen=True, eq=False)
class BoltzmannParams:
    """Everything the Poisson-cycle sampler needs at a fixed ``rho``.

    ``tail_masses[j-1]`` is the size-law mass beyond ``K_j[j-1]`` that the
    sampler drops (it samples the law conditioned on ``k <= K_j``).  For
    ``j = 1`` at the radius this mass decays only polynomially in ``K`` and is
    usually far above ``epsilon``; ``epsilon_effective`` is a bound on the
    total variation between the truncated sampler and the exact model.
    """

    rho: float
    m: int
    c_values: tuple
    j_cutoff: int
    K_j: tuple
    tail_masses: tuple
    index_tail: float
    epsilon: float
    seed: int = 0
    _cdfs: tuple = field(default=(), repr=False)

    @property
    def lambdas(self) -> tuple:
        return tuple(c / j for j, c in enumerate(self.c_values, start=1))

    @property
    def epsilon_effective(self) -> float:
        return self.index_tail + sum(lam * t for lam, t in zip(self.lambdas, self.tail_masses))

    def size_law(self, j: int) -> np.ndarray:
        """``Pr[size = k]`` for ``k = 1..K_j`` under the truncated law."""
        cdf = self._cdfs[j - 1]
        return np.diff(np.concatenate(([0.0], cdf)))

    def to_dict(self) -> dict:
        return {"rho": self.rho, "m": self.m, "j_cutoff": self.j_cutoff,
                "c_values": list(self.c_values), "K_j": list(self.K_j),
                "tail_masses": list(self.tail_masses), "index_tail": self.index_tail,
                "epsilon": self.epsilon, "epsilon_effective": self.epsilon_effective}


def boltzmann_params(seq: CountingSequence, rho: float, epsilon: float = 1e-12,
                     c_tol: float = 1e-8, radius: Optional[RadiusSums] = None,
                     seed: int = 0) -> BoltzmannParams:
    """Build the cycle intensities ``C(rho^j)/j`` and truncated size laws."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if radius is None:
        radius = RadiusSums(seq, rho, c_tol)
    J = radius.cutoff(radius.tail_log_G, epsilon)
    c_values, K_j, tails, cdfs = [], [], [], []
    for j in range(1, J + 1):
        val = radius.full(j)
        terms = seq.terms(rho**j)
        # suffix[k] = sum of terms with index > k (1-based), plus the tail past K
        beyond = val.tail + val.error
        suffix = np.concatenate((np.cumsum(terms[::-1])[::-1][1:], [0.0])) + beyond
        rel = suffix / val.value
        ok = np.nonzero(rel < epsilon)[0]
        K = int(ok[0]) + 1 if ok.size else seq.K
        K = max(K, seq.m)
        part = terms[:K]
        cdf = np.cumsum(part) / part.sum()
        cdf[-1] = 1.0
        c_values.append(val.value)
        K_j.append(K)
        tails.append(float(rel[K - 1]))
        cdfs.append(cdf)
    return BoltzmannParams(float(rho), seq.m, tuple(c_values), J, tuple(K_j), tuple(tails),
                           radius.tail_log_G(J), float(epsilon), int(seed), tuple(cdfs))


def _type_index(seq: CountingSequence, k: int, rng: RandomStream) -> int:
    return rng.randbelow(seq[k]) + 1


def sample_gamma_C(seq: CountingSequence, params: BoltzmannParams, j: int, rng=None):
    """One draw from the Boltzmann law of the class at ``z = rho^j``.

    Returns ``(size, type_index)`` for integer classes and ``size`` otherwise.
    """
    if not 1 <= j <= params.j_cutoff:
        raise TruncationRangeError(f"cycle length {j} beyond j_cutoff={params.j_cutoff}")
    rng = as_stream(rng if rng is not None else params.seed)
    k = int(np.searchsorted(params._cdfs[j - 1], rng.random(), side="right")) + 1
    if not seq.exact:
        return k
    return k, _type_index(seq, k, rng)


def sample_lambda_G(seq: CountingSequence, params: BoltzmannParams, rng=None) -> Sample:
    """Poisson-cycle sampler: ``P_j ~ Pois(C(rho^j)/j)`` cycles of length ``j``,
    each carrying one Boltzmann object at ``rho^j`` repeated ``j`` times."""
    rng = as_stream(rng if rng is not None else params.seed)
    parts = []
    for j, lam in enumerate(params.lambdas, start=1):
        for _ in range(int(rng.poisson(lam))):
            draw = sample_gamma_C(seq, params, j, rng)
            parts.append((*draw, j) if seq.exact else (draw, j))
    return MultisetObject(tuple(parts)) if seq.exact else SizeProfile(tuple(parts))


def lambda_G_size_kappa(params: BoltzmannParams, M: int, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """``(|G|, kappa(G))`` for ``M`` independent Poisson-cycle draws, vectorized.

    Type indices do not affect either statistic, so they are not drawn.
    """
    rng = as_stream(rng if rng is not None else params.seed)
    gen = rng.generator
    n = np.zeros(M, dtype=np.int64)
    kappa = np.zeros(M, dtype=np.int64)
    for j, lam in enumerate(params.lambdas, start=1):
        P = gen.poisson(lam, M)
        total = int(P.sum())
        if total == 0:
            continue
        sizes = np.searchsorted(params._cdfs[j - 1], gen.random(total), side="right") + 1
        owner = np.repeat(np.arange(M), P)
        n += j * np.bincount(owner, weights=sizes, minlength=M).astype(np.int64)
        kappa += j * P
    return n, kappa


# ---------------------------------------------------------------------------
# uniform sampling on G_{n,N}


class UniformSampler:
    """Exact uniform draws from the multisets of size ``n`` with ``N`` components.

    Uses the component-pointing identity

        N g_{n,N} = sum_{j >= 1} sum_k c_k g_{n - jk, N - j},

    which is a bijection: marking the ``j``-th copy of a component ``C`` in a
    multiset corresponds to removing ``j`` copies of ``C``.  Each step draws
    ``(j, k)`` with exact integer weights, a uniform type of size ``k``, and
    recurses.  Cumulative weights are cached per visited state.
    """

    def __init__(self, table: BivariateTable, seq: CountingSequence):
        if not table.exact or not seq.exact:
            raise DomainError("uniform sampling needs an integer class")
        self.table = table
        self.seq = seq
        self._g = table.series.values
        self._c = seq.padded(min(table.n_max, seq.K) if not seq.finite else table.n_max)
        self._cache: dict = {}

    def _weights(self, n: int, N: int):
        key = (n, N)
        if key not in self._cache:
            g, c, m = self._g, self._c, self.seq.m
            choices, cum, total = [], [], 0
            for j in range(1, N + 1):
                rest = N - j
                k_max = (n - m * rest) // j
                for k in range(m, min(k_max, len(c) - 1) + 1):
                    if c[k] == 0:
                        continue
                    w = c[k] * int(g[n - j * k, rest])
                    if w:
                        total += w
                        choices.append((j, k))
                        cum.append(total)
            if total != N * int(g[n, N]):
                raise ArithmeticError(f"pointing identity fails at ({n}, {N})")
            self._cache[key] = (choices, cum, total)
        return self._cache[key]

    def sample(self, n: int, N: int, rng=None) -> MultisetObject:
        if not (0 <= n <= self.table.n_max and 0 <= N <= self.table.N_max):
            raise TruncationRangeError(f"({n}, {N}) outside the table")
        if self._g[n, N] == 0:
            raise EmptyStratumError(f"g_{{{n},{N}}} = 0")
        rng = as_stream(rng)
        parts = []
        while N > 0:
            choices, cum, total = self._weights(n, N)
            j, k = choices[bisect.bisect_right(cum, rng.randbelow(total))]
            parts.append((k, _type_index(self.seq, k, rng), j))
            n -= j * k
            N -= j
        return MultisetObject(tuple(parts))


def sample_uniform_gnN(table: BivariateTable, seq: CountingSequence, n: int, N: int,
                       rng=None, sampler: Optional[UniformSampler] = None) -> MultisetObject:
    sampler = sampler or UniformSampler(table, seq)
    return sampler.sample(n, N, rng)


# ---------------------------------------------------------------------------
# largest component and remainder


def largest_component(obj: Sample) -> int:
    if not obj:
        raise ValueError("empty multiset has no largest component")
    return max(obj.size_counts())


def _canonical_largest(obj: MultisetObject) -> Component:
    k = largest_component(obj)
    return min((c for c in obj.components if c[0] == k), key=lambda c: c[1])


def remainder(obj: Sample, m: int) -> Sample:
    """Drop every size-``m`` component and one copy of the canonical largest one
    (largest size, then smallest type index)."""
    if isinstance(obj, SizeProfile):
        k = largest_component(obj)
        counts = [(s, d - (s == k)) for s, d in obj.counts if s != m]
        return SizeProfile(tuple(counts))
    big = _canonical_largest(obj)
    out = []
    for comp in obj.components:
        k, t, d = comp
        if k == m:
            continue
        if comp == big:
            d -= 1
        out.append((k, t, d))
    return MultisetObject(tuple(out))


@dataclass(frozen=True)
class RemainderStats:
    size: int
    kappa: int
    size_gtm: int  # |R| - m kappa(R)


def remainder_stats(obj: Sample, m: int) -> RemainderStats:
    R = remainder(obj, m)
    n, kap = R.total_size, R.kappa
    return RemainderStats(n, kap, n - m * kap)


# ---------------------------------------------------------------------------
# limit law of the remainder


def shifted_params(seq: CountingSequence, rho: float, epsilon: float = 1e-12,
                   c_tol: float = 1e-8, seed: int = 0) -> tuple[CountingSequence, BoltzmannParams]:
    try:
        shifted = seq.shifted()
    except EmptySequenceError as exc:
        raise DomainError("class is supported only at m; the limit is the empty multiset") from exc
    return shifted, boltzmann_params(shifted, rho, epsilon, c_tol, seed=seed)


def sample_boltzmann_Ggtm(seq: CountingSequence, rho: float, rng=None,
                          params: Optional[BoltzmannParams] = None,
                          epsilon: float = 1e-12) -> Sample:
    """Boltzmann draw for the class with sizes shifted down by ``m``, mapped back.

    A component of shifted size ``k`` is the original component of size
    ``k + m`` with the same type index.
    """
    shifted = seq.shifted() if params is not None else None
    if params is None:
        shifted, params = shifted_params(seq, rho, epsilon)
    draw = sample_lambda_G(shifted, params, rng)
    m = seq.m
    if isinstance(draw, SizeProfile):
        return SizeProfile(tuple((k + m, d) for k, d in draw.counts))
    return MultisetObject(tuple((k + m, t, d) for k, t, d in draw.components))


def batch(sampler, count: int, seed: int = 0) -> Iterable:
    """``count`` draws, draw ``i`` on stream ``i`` of ``seed`` (order independent)."""
    for i in range(count):
        yield sampler(RandomStream(seed, i))
