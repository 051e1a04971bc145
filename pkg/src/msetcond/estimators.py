"""scikit-learn style wrappers.

``fit`` takes a counting sequence (a :class:`CountingSequence` or a 1-D
array of ``c_1..c_K``); fitted attributes end in an underscore.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .classes import estimate_rho
from .enumeration import RadiusSums, constant_A, exact_table, log_asymptotic_gnN
from .rng import RandomStream
from .sampling import (MultisetObject, SizeProfile, UniformSampler, boltzmann_params,
                       largest_component, remainder_stats, sample_lambda_G, shifted_params)
from .validation import check_pairs, check_positive_int, check_rho, check_sequence


def _resolve_rho(seq, rho, method: str, window: int) -> tuple[float, object]:
    if rho is None or rho == "estimate":
        est = estimate_rho(seq, window, method)
        return est.rho, est
    return check_rho(rho), None


class MultisetAsymptotics(BaseEstimator):
    """Fits the constant ``A`` of ``g_{n,N} ~ A N^(c_m-1) c_{n-m(N-1)}``.

    ``predict`` maps ``(n, N)`` pairs to the asymptotic count; use
    ``predict_log`` when counts overflow a double.
    """

    def __init__(self, rho=None, tol: float = 1e-8, rho_method: str = "extrapolated",
                 rho_window: int = 200):
        self.rho = rho
        self.tol = tol
        self.rho_method = rho_method
        self.rho_window = rho_window

    def fit(self, X, y=None):
        seq = check_sequence(X)
        window = min(self.rho_window, max(seq.K - seq.m - 1, 1))
        self.rho_, self.rho_estimate_ = _resolve_rho(seq, self.rho, self.rho_method, window)
        radius = RadiusSums(seq, self.rho_, self.tol * self.rho_**seq.m / 2)
        self.model_ = constant_A(seq, self.rho_, self.tol, radius=radius)
        log_G, _, _ = radius.log_G(self.tol)
        self.seq_ = seq
        self.A_ = self.model_.A
        self.C_rho_ = radius.C_rho
        self.G_rho_ = math.exp(log_G)
        self.B0_ = self.A_ / self.G_rho_
        self.m_ = seq.m
        self.c_m_ = seq.c_m
        return self

    def predict_log(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        pairs = check_pairs(X)
        return np.array([log_asymptotic_gnN(self.model_, self.seq_, int(n), int(N))
                         for n, N in pairs])

    def predict(self, X) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.predict_log(X))

    def score(self, X, y) -> float:
        """Mean absolute relative error against exact counts ``y`` (lower is better)."""
        pred = self.predict_log(X)
        y = np.asarray([math.log(float(v)) if v else -math.inf for v in y])
        return float(np.mean(np.abs(np.expm1(y - pred))))


class UniformMultisetSampler(BaseEstimator):
    """Exact uniform draws from the multisets with size ``n`` and ``N`` components."""

    def __init__(self, n: int = 10, N: int = 2, seed: int = 0):
        self.n = n
        self.N = N
        self.seed = seed

    def fit(self, X, y=None):
        seq = check_sequence(X)
        n = check_positive_int(self.n, "n", 0)
        N = check_positive_int(self.N, "N", 0)
        self.seq_ = seq
        self.table_ = exact_table(seq, n, N)
        self.sampler_ = UniformSampler(self.table_, seq)
        self.count_ = self.table_.g(n, N)
        return self

    def sample(self, n_samples: int = 1, start: int = 0) -> list[MultisetObject]:
        """Draw ``i`` uses stream ``start + i`` of ``seed``."""
        check_is_fitted(self, "sampler_")
        return [self.sampler_.sample(self.n, self.N, RandomStream(self.seed, start + i))
                for i in range(n_samples)]


class BoltzmannMultisetSampler(BaseEstimator):
    """Boltzmann multisets at the radius; ``shifted=True`` gives the remainder limit law."""

    def __init__(self, rho=None, shifted: bool = False, epsilon: float = 1e-12,
                 c_tol: float = 1e-8, seed: int = 0, rho_method: str = "extrapolated",
                 rho_window: int = 200):
        self.rho = rho
        self.shifted = shifted
        self.epsilon = epsilon
        self.c_tol = c_tol
        self.seed = seed
        self.rho_method = rho_method
        self.rho_window = rho_window

    def fit(self, X, y=None):
        seq = check_sequence(X)
        window = min(self.rho_window, max(seq.K - seq.m - 1, 1))
        self.rho_, _ = _resolve_rho(seq, self.rho, self.rho_method, window)
        self.seq_ = seq
        if self.shifted:
            self.target_seq_, self.params_ = shifted_params(seq, self.rho_, self.epsilon,
                                                            self.c_tol, self.seed)
        else:
            self.target_seq_ = seq
            self.params_ = boltzmann_params(seq, self.rho_, self.epsilon, self.c_tol,
                                            seed=self.seed)
        return self

    def sample(self, n_samples: int = 1, start: int = 0) -> list:
        check_is_fitted(self, "params_")
        out = []
        m = self.seq_.m
        for i in range(n_samples):
            draw = sample_lambda_G(self.target_seq_, self.params_, RandomStream(self.seed, start + i))
            if self.shifted:
                if isinstance(draw, SizeProfile):
                    draw = SizeProfile(tuple((k + m, d) for k, d in draw.counts))
                else:
                    draw = MultisetObject(tuple((k + m, t, d) for k, t, d in draw.components))
            out.append(draw)
        return out


class RemainderTransformer(TransformerMixin, BaseEstimator):
    """Per-object statistics as columns::

        n, kappa, largest, defect, |R|, kappa(R), |R|_{>m}

    where ``defect = n - m kappa - largest``.
    """

    columns = ("n", "kappa", "largest", "defect", "R_size", "R_kappa", "R_size_gtm")

    def __init__(self, m: int = 1):
        self.m = m

    def fit(self, X, y=None):
        check_positive_int(self.m, "m")
        self.n_features_in_ = 1
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        rows = []
        for obj in X:
            if not isinstance(obj, (MultisetObject, SizeProfile)):
                raise TypeError("expected MultisetObject or SizeProfile instances")
            n, kap = obj.total_size, obj.kappa
            if not obj:
                rows.append((0, 0, 0, 0, 0, 0, 0))
                continue
            L = largest_component(obj)
            st = remainder_stats(obj, self.m)
            rows.append((n, kap, L, n - self.m * kap - L, st.size, st.kappa, st.size_gtm))
        return np.array(rows, dtype=np.int64).reshape(-1, len(self.columns))

    def get_feature_names_out(self, input_features: Optional[list] = None) -> np.ndarray:
        return np.array(self.columns, dtype=object)
