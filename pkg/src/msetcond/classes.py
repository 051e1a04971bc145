"""Counting sequences of combinatorial classes: construction, file I/O and
subexponentiality diagnostics.

A :class:`CountingSequence` holds ``c_1 .. c_K`` (index = size in atoms).  In
exact mode the coefficients are Python ints; in real mode they are floats.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import zeta

from .exceptions import (
    EmptySequenceError,
    NegativeCoefficientError,
    RhoEstimateError,
    SequenceFormatError,
    TruncationRangeError,
    UncertifiedTailError,
    UnknownClassError,
)

# safety factor on z/rho for the geometric tail majorant
TAIL_EPS = 0.05


class Domain(str, enum.Enum):
    EXACT = "exact-integer"
    REAL = "real"

    @classmethod
    def parse(cls, value) -> "Domain":
        if isinstance(value, Domain):
            return value
        value = str(value).lower()
        if value in ("exact", "exact-integer", "integer", "int"):
            return cls.EXACT
        if value in ("real", "float"):
            return cls.REAL
        raise ValueError(f"unknown coefficient domain {value!r}")


@dataclass(frozen=True)
class CountingSequence:
    """Truncated counting sequence ``c_1..c_K``.

    ``finite=True`` declares that every coefficient beyond ``K`` is zero (the
    class is a polynomial); otherwise coefficients past ``K`` are unknown.
    """

    name: str
    domain: Domain
    coeffs: tuple
    finite: bool = False
    m: int = field(init=False)

    def __post_init__(self):
        domain = Domain.parse(self.domain)
        object.__setattr__(self, "domain", domain)
        if domain is Domain.EXACT:
            coeffs = []
            for c in self.coeffs:
                if isinstance(c, float):
                    if not c.is_integer():
                        raise ValueError(f"non-integer coefficient {c} in exact mode")
                    c = int(c)
                coeffs.append(int(c))
        else:
            coeffs = [float(c) for c in self.coeffs]
        if any(c < 0 for c in coeffs):
            raise NegativeCoefficientError("counting sequences must be non-negative")
        nonzero = [k for k, c in enumerate(coeffs, start=1) if c > 0]
        if not nonzero:
            raise EmptySequenceError("all-zero counting sequence")
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "m", nonzero[0])

    @property
    def K(self) -> int:
        return len(self.coeffs)

    @property
    def exact(self) -> bool:
        return self.domain is Domain.EXACT

    @property
    def c_m(self):
        return self.coeffs[self.m - 1]

    def __getitem__(self, k: int):
        if k < 1:
            return 0 if self.exact else 0.0
        if k > self.K:
            if self.finite:
                return 0 if self.exact else 0.0
            raise TruncationRangeError(f"c_{k} requested but {self.name} is truncated at K={self.K}")
        return self.coeffs[k - 1]

    def __len__(self):
        return self.K

    def padded(self, n: int) -> list:
        """``[0, c_1, .., c_n]`` (leading zero so that index = size)."""
        if n > self.K and not self.finite:
            raise TruncationRangeError(f"need c_1..c_{n} but {self.name} is truncated at K={self.K}")
        zero = 0 if self.exact else 0.0
        out = [zero] + list(self.coeffs[:n])
        out.extend([zero] * (n + 1 - len(out)))
        return out

    def log_terms(self, z: float) -> np.ndarray:
        """``log(c_k z^k)`` for ``k = 1..K`` (``-inf`` where ``c_k = 0``)."""
        logz = math.log(z)
        out = np.full(self.K, -np.inf)
        for k, c in enumerate(self.coeffs, start=1):
            if c > 0:
                out[k - 1] = math.log(c) + k * logz
        return out

    def terms(self, z: float) -> np.ndarray:
        """``c_k z^k`` as floats, computed in log space so huge ints are safe."""
        return np.exp(self.log_terms(z))

    def shifted(self) -> "CountingSequence":
        """Coefficients of ``(C(x) - c_m x^m) / x^m``, i.e. ``c'_k = c_{k+m}``."""
        tail = self.coeffs[self.m:]
        return CountingSequence(f"{self.name}>m", self.domain, tail, finite=self.finite)

    def to_float(self) -> "CountingSequence":
        return CountingSequence(self.name, Domain.REAL, [float(c) for c in self.coeffs], self.finite)


def sequence_from_coeffs(coeffs: Sequence, name: str = "custom", domain=None, finite: bool = False):
    """Build a sequence, guessing the domain from the values when not given."""
    if domain is None:
        exact = all(isinstance(c, (int, np.integer)) for c in coeffs)
        domain = Domain.EXACT if exact else Domain.REAL
    return CountingSequence(name, domain, tuple(coeffs), finite=finite)


# ---------------------------------------------------------------------------
# builtin classes


@lru_cache(maxsize=8)
def _rooted_tree_counts(K: int) -> tuple:
    # r_{n+1} = (1/n) sum_{k=1..n} (sum_{d|k} d r_d) r_{n+1-k}
    r = [0, 1]
    a = [0]
    for n in range(1, K):
        s = 0
        d = 1
        while d * d <= n:
            if n % d == 0:
                s += d * r[d]
                if d * d != n:
                    s += (n // d) * r[n // d]
            d += 1
        a.append(s)
        total = sum(a[k] * r[n + 1 - k] for k in range(1, n + 1))
        q, rem = divmod(total, n)
        assert rem == 0
        r.append(q)
    return tuple(r[1:K + 1])


def _free_tree_counts(K: int) -> tuple:
    # f(x) = r(x) - (r(x)^2 - r(x^2)) / 2, coefficientwise
    r = (0,) + _rooted_tree_counts(K)
    f = []
    for n in range(1, K + 1):
        sq = sum(r[i] * r[n - i] for i in range(1, n))
        rx2 = r[n // 2] if n % 2 == 0 else 0
        v = 2 * r[n] - sq + rx2
        assert v % 2 == 0
        f.append(v // 2)
    return tuple(f)


BUILTIN_CLASSES = ("partitions", "plane_partitions", "polya_trees", "free_trees", "synthetic")


def builtin_class(name: str, K: int, params: Optional[dict] = None) -> CountingSequence:
    """Exact counting sequence of a named class up to ``K`` atoms.

    ``synthetic`` takes ``params={"alpha": .., "rho0": ..}`` and yields real
    ``c_k = k^-alpha rho0^-k``; with ``"integer": True`` the values are rounded
    up to integers so the class can be sampled.
    """
    if K is None or int(K) < 1:
        raise ValueError("K must be >= 1")
    K = int(K)
    params = dict(params or {})
    if name == "partitions":
        return CountingSequence(name, Domain.EXACT, (1,) * K)
    if name == "plane_partitions":
        return CountingSequence(name, Domain.EXACT, tuple(range(1, K + 1)))
    if name == "polya_trees":
        return CountingSequence(name, Domain.EXACT, _rooted_tree_counts(K))
    if name == "free_trees":
        return CountingSequence(name, Domain.EXACT, _free_tree_counts(K))
    if name == "synthetic":
        try:
            alpha = float(params["alpha"])
            rho0 = float(params["rho0"])
        except KeyError as exc:
            raise ValueError("synthetic class needs params alpha and rho0") from exc
        if not alpha > 1 or not 0 < rho0 < 1:
            raise ValueError("synthetic class needs alpha > 1 and 0 < rho0 < 1")
        logs = [-alpha * math.log(k) - k * math.log(rho0) for k in range(1, K + 1)]
        if params.get("integer"):
            coeffs = tuple(max(1, math.ceil(math.exp(v) - 1e-9)) if v < 700 else
                           _ceil_exp_big(v) for v in logs)
            label = f"synthetic_int(alpha={alpha:g},rho0={rho0:g})"
            return CountingSequence(label, Domain.EXACT, coeffs)
        label = f"synthetic(alpha={alpha:g},rho0={rho0:g})"
        if max(logs) > 709:
            raise ValueError(f"real synthetic coefficients overflow a double beyond "
                             f"K={next(k for k, v in enumerate(logs) if v > 709)}")
        return CountingSequence(label, Domain.REAL, tuple(math.exp(v) for v in logs))
    raise UnknownClassError(f"unknown class {name!r}; expected one of {BUILTIN_CLASSES}")


def _ceil_exp_big(v: float) -> int:
    # exp(v) beyond float range; only the leading ~15 digits are meaningful anyway
    e = int(v / math.log(2)) - 52
    return math.ceil(math.exp(v - e * math.log(2))) << e


# ---------------------------------------------------------------------------
# file format: one "k c_k" pair per line, k ascending, missing k means 0


def load_sequence(path, domain="exact-integer", name: Optional[str] = None) -> CountingSequence:
    domain = Domain.parse(domain)
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    values = {}
    last = 0
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1 and not header_seen and last == 0 and parts[0].isdigit():
            header_seen = True  # optional single-integer header line before the pairs
            continue
        if len(parts) != 2:
            raise SequenceFormatError(f"{path}:{lineno}: expected 'k c_k', got {raw!r}")
        try:
            k = int(parts[0])
            c = int(parts[1]) if domain is Domain.EXACT else float(parts[1])
        except ValueError as exc:
            raise SequenceFormatError(f"{path}:{lineno}: {exc}") from exc
        if k <= last:
            raise SequenceFormatError(f"{path}:{lineno}: indices must be ascending and >= 1")
        if c < 0:
            raise NegativeCoefficientError(f"{path}:{lineno}: negative coefficient c_{k} = {c}")
        values[k] = c
        last = k
    if not any(values.values()):
        raise EmptySequenceError(f"{path}: all-zero sequence")
    zero = 0 if domain is Domain.EXACT else 0.0
    coeffs = tuple(values.get(k, zero) for k in range(1, last + 1))
    return CountingSequence(name or path.stem, domain, coeffs)


def dump_sequence(seq: CountingSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, c in enumerate(seq.coeffs, start=1):
            fh.write(f"{k} {c!r}\n" if not seq.exact else f"{k} {c}\n")


# ---------------------------------------------------------------------------
# radius of convergence


@dataclass(frozen=True)
class RhoEstimate:
    rho: float
    method: str
    residual: float

    def __float__(self):
        return self.rho


def _ratio_tail(seq: CountingSequence, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Last ``count`` ratios ``c_{n-1}/c_n`` and their indices ``n``."""
    K = seq.K
    if count + 1 > K:
        raise RhoEstimateError(f"need at least {count + 1} coefficients, have {K}")
    tail = seq.coeffs[K - count - 1:]
    if any(c <= 0 for c in tail):
        raise RhoEstimateError("insufficient nonzero tail for the ratio test")
    if seq.exact:
        ratios = np.array([tail[i] / tail[i + 1] for i in range(count)], dtype=float)
    else:
        ratios = np.array(tail[:-1], dtype=float) / np.array(tail[1:], dtype=float)
    return np.arange(K - count + 1, K + 1), ratios


def _extrapolate(ns: np.ndarray, ratios: np.ndarray, order: int) -> float:
    x = 1.0 / ns
    X = np.vander(x, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(X, ratios, rcond=None)
    return float(coef[0])


def estimate_rho(seq: CountingSequence, window: int = 20, method: str = "ratio") -> RhoEstimate:
    """Estimate the radius of convergence from the ratios ``c_{n-1}/c_n``.

    ``method="ratio"`` averages the last ``window`` ratios.  ``"extrapolated"``
    fits ``rho (1 + a/n + b/n^2 + ...)`` over the window and reads off the
    intercept, which removes the ``O(1/n)`` bias of power-law factors; its
    residual is the spread between polynomial orders 2 and 3.
    """
    window = int(window)
    if window < 1:
        raise ValueError("window must be >= 1")
    if method == "ratio":
        ns, ratios = _ratio_tail(seq, window)
        rho = float(ratios.mean())
        residual = float(abs(ratios[-1] - rho))
    elif method == "extrapolated":
        ns, ratios = _ratio_tail(seq, max(window, 8))
        rho = _extrapolate(ns, ratios, 3)
        residual = float(abs(rho - _extrapolate(ns, ratios, 2)))
    else:
        raise ValueError(f"unknown rho estimation method {method!r}")
    # ratios identically 1 can come back as 1 - ulp from the least-squares fit
    if not (0.0 < rho < 1.0 - 1e-9) or not math.isfinite(rho):
        raise RhoEstimateError(f"ratio estimate {rho:.6g} is outside (0, 1)")
    return RhoEstimate(rho, method, residual)


# ---------------------------------------------------------------------------
# evaluation of C(z) with a bounded tail


@dataclass(frozen=True)
class SeriesValue:
    """A truncated sum together with its tail correction and error bound."""

    value: float
    tail: float
    error: float
    method: str

    def __float__(self):
        return self.value


def _power_tail(log_u: np.ndarray, K: int, q: float) -> tuple[float, float, float]:
    """Tail ``sum_{k>K} u_k q^k`` under a fitted power law for ``u_k``.

    Returns ``(estimate, error, beta)``.  ``u_k`` are the terms at the radius;
    the window is the last ``len(log_u)`` indices.  Two fits are compared,
    ``a - beta log k`` and ``a - beta log k + gamma/k``; their difference is
    the reported error.
    """
    w = len(log_u)
    ks = np.arange(K - w + 1, K + 1, dtype=float)
    X3 = np.column_stack([np.ones(w), -np.log(ks), 1.0 / ks])
    p3, *_ = np.linalg.lstsq(X3, log_u, rcond=None)
    p2, *_ = np.linalg.lstsq(X3[:, :2], log_u, rcond=None)
    logq = math.log(q) if q < 1 else 0.0
    L = 64 * K

    def tail(a, beta, gamma):
        if q >= 1 and beta <= 1:
            return math.inf
        kk = np.arange(K + 1, L + 1, dtype=float)
        logs = a - beta * np.log(kk) + gamma / kk + kk * logq
        s = float(np.exp(logs).sum())
        if q >= 1:
            s += math.exp(a) * float(zeta(beta, L + 1))
        else:
            last = math.exp(a - beta * math.log(L + 1) + (L + 1) * logq)
            s += last / (1 - q)
        return s

    t3 = tail(p3[0], p3[1], p3[2])
    t2 = tail(p2[0], p2[1], 0.0)
    return t3, abs(t3 - t2), float(p3[1])


def evaluate_C(seq: CountingSequence, rho: float, z: float, tol: float = 1e-12,
               eps: float = TAIL_EPS, skip_leading: bool = False) -> SeriesValue:
    """``C(z) = sum c_k z^k`` with a bounded tail.

    Far from the radius (``(1+eps) z/rho < 1``) the tail is bounded by the
    geometric majorant ``c_K z^K q^(k-K)``.  Closer to the radius the tail is
    estimated from a power-law fit of ``c_k rho^k`` over the last coefficients
    and the error is the disagreement between two fit models.  Raises
    :class:`UncertifiedTailError` when the bound exceeds ``tol``.

    With ``skip_leading`` the ``c_m z^m`` term is left out, which avoids the
    cancellation in ``C(z) - c_m z^m`` for small ``z``.
    """
    rho = float(rho)
    z = float(z)
    if not z > 0:
        raise ValueError("z must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if z > rho * (1 + 1e-12):
        raise ValueError(f"z = {z} lies beyond the radius rho = {rho}")
    z = min(z, rho)
    log_t = seq.log_terms(z)
    if skip_leading:
        log_t[seq.m - 1] = -np.inf
    partial = float(np.exp(log_t).sum())
    # pairwise summation of positive terms: relative rounding <= eps * log2(K)
    rounding = partial * np.finfo(float).eps * max(1, math.ceil(math.log2(seq.K + 1)))
    if seq.finite:
        return SeriesValue(partial, 0.0, rounding, "finite")
    K = seq.K
    last = seq.coeffs[-1]
    if last <= 0:
        raise UncertifiedTailError(f"c_K = 0 at K={K}; cannot bound the tail of {seq.name}")
    tK = math.exp(log_t[-1])
    q = (1 + eps) * z / rho
    if q < 1:
        bound = tK * q / (1 - q) + rounding
        if bound <= tol:
            return SeriesValue(partial, 0.0, bound, "geometric")
        # K needed so that t_K q/(1-q) <= tol, assuming t_k decays like q^k
        need = K + math.ceil(math.log(tol * (1 - q) / (tK * q)) / math.log(q))
        raise UncertifiedTailError(
            f"tail bound {bound:.3g} > tol {tol:.3g} for {seq.name} at z={z:.6g}; "
            f"need roughly K >= {need}", required_K=need)
    w = max(20, min(K // 4, 400))
    if w + 1 > K:
        raise UncertifiedTailError(f"too few coefficients (K={K}) to model the tail near the radius",
                                   required_K=4 * 20)
    log_u = seq.log_terms(rho)[K - w:]
    if not np.all(np.isfinite(log_u)):
        raise UncertifiedTailError("zero coefficients inside the tail window")
    est, err, beta = _power_tail(log_u, K, z / rho)
    err += rounding
    if not math.isfinite(est) or err > tol:
        need = None
        if math.isfinite(err) and beta > 1 and err > 0:
            need = int(K * (err / tol) ** (1 / beta)) + 1
        raise UncertifiedTailError(
            f"tail of {seq.name} near the radius uncertain by {err:.3g} (tol {tol:.3g})",
            required_K=need)
    return SeriesValue(partial + est, est, err, "power-law")


def eval_C(seq: CountingSequence, rho: float, z: float, tol: float = 1e-12) -> float:
    return evaluate_C(seq, rho, z, tol).value


# ---------------------------------------------------------------------------
# subexponentiality diagnostics


@dataclass(frozen=True)
class SubexpReport:
    """Traces of the two subexponentiality conditions in normalized form.

    ``s2_trace[i] = c_{n-1} / (rho c_n)`` (target 1) and
    ``s1_trace[i] = sum_k c_k c_{n-k} / (c_n C(rho))`` (target 2), both for
    ``n = m+1 .. K``.
    """

    s2_trace: tuple
    s1_trace: tuple
    c_rho: float
    two_c_rho_target: float
    applicable: bool = True
    first_n: int = 2

    @property
    def indices(self) -> range:
        """The ``n`` each trace entry belongs to."""
        return range(self.first_n, self.first_n + len(self.s2_trace))


def subexp_diagnostics(seq: CountingSequence, rho: float, c_rho: Optional[float] = None,
                       tol: float = 1e-6) -> SubexpReport:
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    K, m = seq.K, seq.m
    u = seq.terms(rho)  # u[k-1] = c_k rho^k
    support = np.count_nonzero(u)
    if support <= 1:
        nan = (float("nan"),) * (K - m)
        return SubexpReport(nan, nan, float("nan"), float("nan"), applicable=False, first_n=m + 1)
    if c_rho is None:
        c_rho = evaluate_C(seq, rho, rho, tol).value
    full = np.concatenate([[0.0], u])  # full[k] = c_k rho^k
    conv = np.convolve(full, full)[:K + 1]
    s1, s2 = [], []
    for n in range(m + 1, K + 1):
        if full[n] > 0:
            s2.append(full[n - 1] / full[n])
            s1.append(conv[n] / (full[n] * c_rho))
        else:
            s2.append(float("nan"))
            s1.append(float("nan"))
    return SubexpReport(tuple(s2), tuple(s1), float(c_rho), 2.0 * float(c_rho), first_n=m + 1)
