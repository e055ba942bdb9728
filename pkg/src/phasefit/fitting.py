"""Minimal-topology two-moment matching.

Dispatch: variance below the squared mean gives the almost-Erlang
hypoexponential with N = ceil(mu^2/sigma^2) stages; above it gives the
one-state hyperexponential with an atom at zero; equality collapses to a
single exponential. The Sauer-Chandy two-state hyperexponential is kept as
a comparison baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import MomentSummary, summarize
from .errors import (
    DeterministicUnrepresentable,
    DomainError,
    InsufficientData,
    NegativeObservation,
    NonPositiveInput,
    POutOfRange,
)
from .model import Branch, GeneralizedCoxModel, new_model

# Families
EXPONENTIAL = "Exponential"
ERLANG = "Erlang"
ALMOST_ERLANG = "AlmostErlang"
SIMPLEST_HYPER = "SimplestHyper"
HYPER_FAMILY = "HyperFamily"
SAUER_CHANDY = "SauerChandy"

# Guard against ceil() bumping N up when mu^2/sigma^2 is integral to roundoff.
_CEIL_GUARD = 1e-12


@dataclass(frozen=True)
class FitResult:
    model: GeneralizedCoxModel
    family: str
    n_transient: int
    target: MomentSummary
    achieved: MomentSummary
    alpha_n: float


def _check_targets(mu: float, sigma2: float) -> None:
    if not (mu > 0.0 and math.isfinite(mu)):
        raise NonPositiveInput(f"mean must be positive, got {mu}")
    if not (sigma2 >= 0.0 and math.isfinite(sigma2)):
        raise NonPositiveInput(f"variance must be nonnegative, got {sigma2}")


def _result(model, family, mu, sigma2, alpha_n):
    return FitResult(
        model=model,
        family=family,
        n_transient=model.n_transient,
        target=MomentSummary.from_mean_var(mu, sigma2),
        achieved=summarize(model),
        alpha_n=alpha_n,
    )


def minimal_states(mu: float, sigma2: float) -> int:
    """Smallest transient-state count able to match (mu, sigma2)."""
    _check_targets(mu, sigma2)
    if sigma2 <= 0.0:
        raise NonPositiveInput("variance must be positive")
    if sigma2 >= mu * mu:
        return 1
    return max(1, math.ceil(mu * mu / sigma2 - _CEIL_GUARD))


def almost_erlang(mu: float, sigma2: float) -> FitResult:
    """Single-branch hypoexponential: N-1 equal stage means plus one
    distinct stage, with N = ceil(mu^2/sigma^2)."""
    _check_targets(mu, sigma2)
    if sigma2 >= mu * mu:
        raise DomainError("almost-Erlang requires sigma^2 < mu^2")
    n = minimal_states(mu, sigma2)
    if n < 2:
        raise DomainError("ceil(mu^2/sigma^2) must be >= 2")
    # N*sigma2 - mu^2 >= 0 up to roundoff at integral mu^2/sigma^2.
    alpha_n = math.sqrt(max(n * sigma2 - mu * mu, 0.0)) / n
    base = mu / n
    x_head = base - alpha_n / math.sqrt(n - 1)
    x_last = base + math.sqrt(n - 1) * alpha_n
    rates = tuple([1.0 / x_head] * (n - 1) + [1.0 / x_last])
    model = new_model([Branch(1.0, rates)])
    family = ERLANG if alpha_n == 0.0 else ALMOST_ERLANG
    return _result(model, family, mu, sigma2, alpha_n)


def simplest_hyper(mu: float, sigma2: float) -> FitResult:
    """One exponential state with probability p = 2/(1+Cv^2) plus an atom
    at zero; the minimal topology for Cv >= 1."""
    _check_targets(mu, sigma2)
    cv2 = sigma2 / (mu * mu)
    if cv2 < 1.0:
        raise DomainError("simplest hyperexponential requires sigma^2 >= mu^2")
    p = 2.0 / (1.0 + cv2)
    x1 = mu * (cv2 + 1.0) / 2.0
    branches = [Branch(p, (1.0 / x1,))]
    if p < 1.0:
        branches.append(Branch(1.0 - p, ()))
    model = new_model(branches)
    family = EXPONENTIAL if p == 1.0 else SIMPLEST_HYPER
    return _result(model, family, mu, sigma2, p)


def hyper_family(mu: float, sigma2: float, p: float) -> FitResult:
    """Two-branch hyperexponential with caller-chosen routing probability
    0 < p <= 2/(1+Cv^2); at the upper limit the second stage mean hits 0."""
    _check_targets(mu, sigma2)
    cv2 = sigma2 / (mu * mu)
    if cv2 <= 1.0:
        raise DomainError("hyperexponential family requires sigma^2 > mu^2")
    p_max = 2.0 / (1.0 + cv2)
    if not (0.0 < p <= p_max + 1e-15):
        raise POutOfRange(f"p={p} outside (0, {p_max}]")
    alpha = math.sqrt(p * (1.0 - p) * (cv2 - 1.0) / 2.0)
    x1 = mu * (1.0 + alpha / p)
    x2 = mu * (1.0 - alpha / (1.0 - p)) if p < 1.0 else 0.0
    branches = [Branch(p, (1.0 / x1,))]
    if x2 > 1e-15 * mu:
        branches.append(Branch(1.0 - p, (1.0 / x2,)))
    elif p < 1.0:
        branches.append(Branch(1.0 - p, ()))
    model = new_model(branches)
    return _result(model, HYPER_FAMILY, mu, sigma2, alpha)


def fit_two_moments(mu: float, sigma2: float) -> FitResult:
    """Minimal-state fit of the first two moments."""
    _check_targets(mu, sigma2)
    if sigma2 == 0.0:
        raise DeterministicUnrepresentable(
            "zero variance needs infinitely many stages; "
            "use an explicit Erlang-N approximation instead"
        )
    if sigma2 >= mu * mu:
        return simplest_hyper(mu, sigma2)
    if minimal_states(mu, sigma2) < 2:
        # sigma^2 below mu^2 only by roundoff: exponential boundary.
        return _result(new_model([Branch(1.0, (1.0 / mu,))]),
                       EXPONENTIAL, mu, sigma2, 0.0)
    return almost_erlang(mu, sigma2)


def erlang_approximation(mu: float, n: int) -> FitResult:
    """Erlang-N with mean mu (variance mu^2/N); explicit escape hatch for
    approximating a deterministic delay."""
    _check_targets(mu, 0.0)
    if n < 1:
        raise NonPositiveInput("stage count must be >= 1")
    model = new_model([Branch(1.0, (n / mu,) * n)])
    family = EXPONENTIAL if n == 1 else ERLANG
    return _result(model, family, mu, mu * mu / n, 0.0)


def sauer_chandy(mu: float, sigma2: float) -> FitResult:
    """Sauer-Chandy two-state hyperexponential baseline (Cv > 1 branch):
    p = (Cv^2+1 - sqrt(Cv^4-1)) / (2 (Cv^2+1)), stage means mu/(2p) and
    mu/(2(1-p))."""
    _check_targets(mu, sigma2)
    cv2 = sigma2 / (mu * mu)
    if cv2 <= 1.0:
        raise DomainError("Sauer-Chandy baseline requires sigma^2 > mu^2")
    p = (cv2 + 1.0 - math.sqrt(cv2 * cv2 - 1.0)) / (2.0 * (cv2 + 1.0))
    x1 = mu / (2.0 * p)
    x2 = mu / (2.0 * (1.0 - p))
    model = new_model([Branch(p, (1.0 / x1,)), Branch(1.0 - p, (1.0 / x2,))])
    return _result(model, SAUER_CHANDY, mu, sigma2, p)


def sample_stats(data) -> MomentSummary:
    """Mean and unbiased variance of nonnegative observations."""
    xs = np.asarray(list(data), dtype=float)
    if xs.size < 2:
        raise InsufficientData("need at least 2 observations")
    if not np.all(np.isfinite(xs)):
        raise NegativeObservation("observations must be finite")
    if np.any(xs < 0.0):
        raise NegativeObservation("observations must be nonnegative")
    return MomentSummary.from_mean_var(float(xs.mean()), float(xs.var(ddof=1)))
