"""Goodness-of-fit self-test for the samplers the generator relies on.

Kolmogorov-Smirnov for the continuous laws, Pearson chi-square with a pooled
upper tail for Poisson. Samples go through the same scalar code path the
simulation uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .stochastics import derive_stream, sample_normal, sample_poisson, sample_uniform

__all__ = ["FitResult", "ks_uniform", "ks_normal", "chi_square_poisson", "run_selftest"]

DEFAULT_SAMPLES = 100_000
DEFAULT_ALPHA = 0.01
# minimum expected count per chi-square bin
MIN_EXPECTED = 5.0


@dataclass
class FitResult:
    name: str
    test: str
    statistic: float
    p_value: float
    passed: bool
    mean: float
    n: int

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.name:<28} {self.test:<10} stat={self.statistic:.5f} "
                f"p={self.p_value:.4f} mean={self.mean:.5f} n={self.n}")


def _draw_uniform(seed: int, label: str, a: float, b: float, n: int) -> np.ndarray:
    src = derive_stream(seed, label)
    return np.fromiter((sample_uniform(src, a, b) for _ in range(n)), dtype=np.float64, count=n)


def _draw_normal(seed: int, label: str, mu: float, sigma: float, n: int) -> np.ndarray:
    src = derive_stream(seed, label)
    return np.fromiter((sample_normal(src, mu, sigma) for _ in range(n)), dtype=np.float64, count=n)


def _draw_poisson(seed: int, label: str, lam: float, n: int) -> np.ndarray:
    src = derive_stream(seed, label)
    return np.fromiter((sample_poisson(src, lam) for _ in range(n)), dtype=np.int64, count=n)


def ks_uniform(samples: np.ndarray, a: float, b: float, name: str = "uniform", alpha: float = DEFAULT_ALPHA) -> FitResult:
    res = stats.kstest(samples, stats.uniform(loc=a, scale=b - a).cdf)
    return FitResult(name, "KS", float(res.statistic), float(res.pvalue), res.pvalue > alpha,
                     float(samples.mean()), len(samples))


def ks_normal(samples: np.ndarray, mu: float, sigma: float, name: str = "normal", alpha: float = DEFAULT_ALPHA) -> FitResult:
    res = stats.kstest(samples, stats.norm(loc=mu, scale=sigma).cdf)
    return FitResult(name, "KS", float(res.statistic), float(res.pvalue), res.pvalue > alpha,
                     float(samples.mean()), len(samples))


def poisson_bins(lam: float, n: int) -> np.ndarray:
    """Expected counts for k = 0..K-1 plus a pooled tail P(X >= K), each >= MIN_EXPECTED."""
    expected = []
    k = 0
    while True:
        tail = n * stats.poisson.sf(k - 1, lam)  # P(X >= k)
        nxt = n * stats.poisson.sf(k, lam)  # P(X >= k+1)
        if nxt < MIN_EXPECTED:
            expected.append(tail)
            break
        expected.append(n * stats.poisson.pmf(k, lam))
        k += 1
    return np.asarray(expected)


def chi_square_poisson(samples: np.ndarray, lam: float, name: str = "poisson", alpha: float = DEFAULT_ALPHA) -> FitResult:
    n = len(samples)
    expected = poisson_bins(lam, n)
    K = len(expected) - 1
    counts = np.bincount(np.minimum(samples, K), minlength=K + 1).astype(np.float64)
    if K == 0:
        # everything pooled into one bin; nothing to test
        return FitResult(name, "chi2", 0.0, 1.0, True, float(samples.mean()), n)
    res = stats.chisquare(counts, expected * (n / expected.sum()))
    return FitResult(name, "chi2", float(res.statistic), float(res.pvalue), res.pvalue > alpha,
                     float(samples.mean()), n)


def run_selftest(seed: int = 2024, n: int = DEFAULT_SAMPLES, alpha: float = DEFAULT_ALPHA) -> list[FitResult]:
    """Fit every law used by the simulation; one result per law."""
    results = [
        ks_uniform(_draw_uniform(seed, "selftest/uniform01", 0.0, 1.0, n), 0.0, 1.0, "uniform U(0,1)", alpha),
        ks_uniform(_draw_uniform(seed, "selftest/angle", 0.0, 2 * math.pi, n), 0.0, 2 * math.pi,
                   "branch angle U(0,2pi)", alpha),
        ks_uniform(_draw_uniform(seed, "selftest/jitter", -0.01, 0.01, n), -0.01, 0.01,
                   "spore jitter U(-0.01,0.01)", alpha),
        ks_uniform(_draw_uniform(seed, "selftest/hypha-width", 0.6, 1.0, n), 0.6, 1.0,
                   "hypha width U(0.6,1.0)", alpha),
        ks_uniform(_draw_uniform(seed, "selftest/mycelium-width", 0.7, 1.0, n), 0.7, 1.0,
                   "mycelium width U(0.7,1.0)", alpha),
        ks_normal(_draw_normal(seed, "selftest/normal01", 0.0, 1.0, n), 0.0, 1.0, "normal N(0,1)", alpha),
        ks_normal(_draw_normal(seed, "selftest/length-noise", 1.0, 0.2, n), 1.0, 0.2,
                  "length noise N(1,0.2)", alpha),
        ks_normal(_draw_normal(seed, "selftest/mycelium-length", 0.8, 0.15, n), 0.8, 0.15,
                  "mycelium length N(0.8,0.15)", alpha),
    ]
    for lam in (0.5, 3.0, 5.0):
        samples = _draw_poisson(seed, f"selftest/poisson={lam}", lam, n)
        results.append(chi_square_poisson(samples, lam, f"branch count Poisson({lam:g})", alpha))
    return results
