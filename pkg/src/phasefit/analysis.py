"""Analytic quantities of a Generalized Cox model.

Laplace transform, raw moments of any order, density and CDF via
uniformization, and the closed-form minimum of the second moment over stage
means at fixed mean and routing probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    DegenerateProbs,
    NegativeTime,
    NonPositiveInput,
    PoleEvaluation,
    ProbSumInvalid,
    SingularSubgenerator,
)
from .model import GeneralizedCoxModel, PhaseTypeRep, to_phase_type

POLE_TOL = 1e-14
UNIFORMIZATION_TAIL = 1e-12


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    second_moment: float
    cv2: float
    higher: tuple[float, ...] = ()

    @classmethod
    def from_mean_var(cls, mean: float, variance: float,
                      higher: tuple[float, ...] = ()) -> "MomentSummary":
        if mean < 0.0 or variance < 0.0:
            raise NonPositiveInput("mean and variance must be nonnegative")
        cv2 = variance / mean**2 if mean > 0.0 else math.inf
        return cls(mean, variance, mean**2 + variance, cv2, higher)


def laplace(model: GeneralizedCoxModel, s: complex) -> complex:
    """Transform value sum_j p_j prod_k lambda_jk / (s + lambda_jk)."""
    total = 0.0 + 0.0j
    for b in model.branches:
        term = complex(b.prob)
        for rate in b.rates:
            if abs(s + rate) < POLE_TOL:
                raise PoleEvaluation(f"s={s} collides with pole at {-rate}")
            term *= rate / (s + rate)
        total += term
    return total


def mean(model: GeneralizedCoxModel) -> float:
    return math.fsum(
        b.prob * math.fsum(1.0 / r for r in b.rates) for b in model.branches
    )


def second_moment(model: GeneralizedCoxModel) -> float:
    total = 0.0
    for b in model.branches:
        xs = [1.0 / r for r in b.rates]
        sx = math.fsum(xs)
        total += b.prob * (sx * sx + math.fsum(x * x for x in xs))
    return total


def variance(model: GeneralizedCoxModel) -> float:
    return second_moment(model) - mean(model) ** 2


def summarize(model: GeneralizedCoxModel, higher_k: int = 0) -> MomentSummary:
    m1 = mean(model)
    var = max(variance(model), 0.0)
    higher = tuple(moment_k(model, k) for k in range(3, higher_k + 1))
    return MomentSummary.from_mean_var(m1, var, higher)


def _neg_subgen_solve(rep: PhaseTypeRep, b: np.ndarray) -> np.ndarray:
    """Solve (-T) x = b exploiting the per-branch upper-bidiagonal blocks.

    Within a chain, row k reads lambda_k x_k - lambda_k x_{k+1} = b_k, so
    x_k = b_k / lambda_k + x_{k+1}; the last stage has x_L = b_L / lambda_L.
    """
    rates = -np.diag(rep.subgen)
    if np.any(rates <= 0.0):
        raise SingularSubgenerator("subgenerator diagonal must be negative")
    x = np.empty_like(b, dtype=float)
    pos = 0
    for length in rep.block_lengths:
        sl = slice(pos, pos + length)
        ratio = b[sl] / rates[sl]
        # suffix cumulative sum: x_k = sum_{i>=k} b_i / lambda_i
        x[sl] = ratio[::-1].cumsum()[::-1]
        pos += length
    return x


def moment_k(model: GeneralizedCoxModel, k: int) -> float:
    """k-th raw moment, k! * alpha (-T)^{-k} 1 on the phase-type form."""
    if k < 1:
        raise NonPositiveInput("moment order must be >= 1")
    rep = to_phase_type(model)
    if rep.n == 0:
        return 0.0
    v = np.ones(rep.n)
    for _ in range(k):
        v = _neg_subgen_solve(rep, v)
    return float(math.factorial(k) * rep.alpha @ v)


def _uniformized_weights(rep: PhaseTypeRep, v: np.ndarray, n_terms: int) -> np.ndarray:
    """Coefficients a_n = alpha P^n v of the uniformization series."""
    q = float(np.max(-np.diag(rep.subgen)))
    p_mat = np.eye(rep.n) + rep.subgen / q
    coeffs = np.empty(n_terms)
    w = v.astype(float)
    for n in range(n_terms):
        coeffs[n] = rep.alpha @ w
        w = p_mat @ w
    return coeffs


def _uniformized_apply(rep: PhaseTypeRep, ts: np.ndarray, v: np.ndarray) -> np.ndarray:
    """alpha exp(T t) v for an array of times via the uniformization series,
    truncated where the Poisson tail falls below UNIFORMIZATION_TAIL."""
    if rep.n == 0:
        return np.zeros_like(ts, dtype=float)
    q = float(np.max(-np.diag(rep.subgen)))
    qt = q * ts
    qt_max = float(np.max(qt, initial=0.0))
    n_max = int(stats.poisson.isf(UNIFORMIZATION_TAIL * 1e-2, qt_max)) + 2 if qt_max > 0 else 1
    coeffs = _uniformized_weights(rep, v, n_max + 1)
    out = np.empty_like(ts, dtype=float)
    ns = np.arange(n_max + 1)
    chunk = max(1, 10_000_000 // (n_max + 1))
    for lo in range(0, len(ts), chunk):
        pmf = stats.poisson.pmf(ns[None, :], qt[lo:lo + chunk, None])
        out[lo:lo + chunk] = pmf @ coeffs
    return out


def pdf(model: GeneralizedCoxModel, t):
    """Density of the continuous part (the atom at zero is excluded)."""
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0.0):
        raise NegativeTime("density defined for t >= 0")
    rep = to_phase_type(model)
    vals = _uniformized_apply(rep, np.atleast_1d(ts), rep.exit_rates)
    return float(vals[0]) if ts.ndim == 0 else vals


def cdf(model: GeneralizedCoxModel, t):
    """P(T <= t), including the atom at zero (cdf(0) = atom weight)."""
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0.0):
        raise NegativeTime("cdf defined for t >= 0")
    rep = to_phase_type(model)
    surv = _uniformized_apply(rep, np.atleast_1d(ts), np.ones(rep.n))
    vals = 1.0 - surv
    return float(vals[0]) if ts.ndim == 0 else vals


@dataclass(frozen=True)
class MinSecondMomentReport:
    ratio_min: float
    optimal_x: tuple[tuple[float, ...], ...]
    lower_bound: float
    jstar: int


def min_second_moment(probs, lengths, mu: float) -> MinSecondMomentReport:
    """Closed-form minimum of E[T^2]/mu^2 over stage means at fixed mean.

    The Lagrange solution makes every stage mean in branch j equal to
    gamma / (2 (1 + L_j)) with gamma = 2 mu / sum_j p_j L_j / (1 + L_j);
    the bound 1 + 1/L_{j*} follows from the longest branch.
    """
    probs = [float(p) for p in probs]
    lengths = [int(L) for L in lengths]
    if mu <= 0.0:
        raise NonPositiveInput("mu must be positive")
    if len(probs) != len(lengths) or not probs:
        raise NonPositiveInput("need one length per probability")
    if any(L < 1 for L in lengths):
        raise NonPositiveInput("branch lengths must be positive integers")
    if all(p == 0.0 for p in probs):
        raise DegenerateProbs("at least one branch must have positive probability")
    if abs(math.fsum(probs) - 1.0) > 1e-9:
        raise ProbSumInvalid("probabilities must sum to 1")
    denom = math.fsum(p * L / (1.0 + L) for p, L in zip(probs, lengths))
    ratio_min = 1.0 / denom
    gamma = 2.0 * mu / denom
    optimal_x = tuple(
        tuple([gamma / (2.0 * (1.0 + L))] * L) for L in lengths
    )
    jstar = max(range(len(lengths)), key=lambda j: (lengths[j], -j))
    lower_bound = 1.0 + 1.0 / lengths[jstar]
    return MinSecondMomentReport(ratio_min, optimal_x, lower_bound, jstar)
