"""Absorbing-CTMC exports of a Generalized Cox model.

The exact export realizes branch routing in the initial distribution; the
approximate export adds an explicit pre-routing state I whose huge exit rate
emulates instantaneous routing (adding exactly one 1/rate sojourn to the
mean absorption time).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveInput, NonPositiveRate, ReducibleChain
from .model import GeneralizedCoxModel, to_phase_type

ROW_SUM_TOL = 1e-12
DEFAULT_BIG_LAMBDA_FACTOR = 1e4


@dataclass(frozen=True)
class CtmcExport:
    labels: tuple[str, ...]
    generator: np.ndarray
    initial: np.ndarray
    absorbing_index: int

    def __post_init__(self):
        gen = np.asarray(self.generator, dtype=float)
        init = np.asarray(self.initial, dtype=float)
        object.__setattr__(self, "generator", gen)
        object.__setattr__(self, "initial", init)
        n = len(self.labels)
        if gen.shape != (n, n) or init.shape != (n,):
            raise NonPositiveInput("generator/initial shapes must match labels")
        if np.max(np.abs(gen.sum(axis=1))) > ROW_SUM_TOL:
            raise NonPositiveInput("generator rows must sum to 0")
        off = gen - np.diag(np.diag(gen))
        if np.min(off) < 0.0:
            raise NonPositiveInput("off-diagonal rates must be nonnegative")
        zero_rows = np.nonzero(np.all(gen == 0.0, axis=1))[0]
        if len(zero_rows) != 1 or zero_rows[0] != self.absorbing_index:
            raise NonPositiveInput("exactly one absorbing (zero) row is required")
        if abs(init.sum() - 1.0) > 1e-9:
            raise NonPositiveInput("initial distribution must sum to 1")

    @property
    def n_states(self) -> int:
        return len(self.labels)


def _branch_labels(model: GeneralizedCoxModel) -> list[str]:
    labels = []
    for j, b in enumerate(model.branches, start=1):
        labels.extend(f"B{j}.S{k}" for k in range(1, b.length + 1))
    return labels


def exact_absorbing_ctmc(model: GeneralizedCoxModel) -> CtmcExport:
    """Exact chain: initial mass p_j on branch j's first stage, atom mass
    directly on E; last stage of each branch exits to E at its own rate."""
    rep = to_phase_type(model)
    n = rep.n
    gen = np.zeros((n + 1, n + 1))
    gen[:n, :n] = rep.subgen
    gen[:n, n] = rep.exit_rates
    initial = np.concatenate([rep.alpha, [rep.atom0]])
    labels = tuple(_branch_labels(model) + ["E"])
    return CtmcExport(labels, gen, initial, n)


def approx_ctmc(model: GeneralizedCoxModel, big_lambda: float | None = None) -> CtmcExport:
    """Huge-rate variant: explicit state I routes to branch heads at rates
    p_j * big_lambda (atom mass straight to E); all initial mass on I.

    Defaults big_lambda to 1e4 times the largest stage rate; the exact mean
    bias introduced is 1/big_lambda.
    """
    if big_lambda is None:
        big_lambda = DEFAULT_BIG_LAMBDA_FACTOR * max(model.max_rate, 1.0)
    if big_lambda <= 0.0:
        raise NonPositiveRate("big_lambda must be positive")
    rep = to_phase_type(model)
    n = rep.n
    gen = np.zeros((n + 2, n + 2))
    gen[0, 0] = -big_lambda
    gen[1 : n + 1, 1 : n + 1] = rep.subgen
    gen[1 : n + 1, n + 1] = rep.exit_rates
    gen[0, 1 : n + 1] = big_lambda * rep.alpha
    gen[0, n + 1] = big_lambda * rep.atom0
    initial = np.zeros(n + 2)
    initial[0] = 1.0
    labels = tuple(["I"] + _branch_labels(model) + ["E"])
    return CtmcExport(labels, gen, initial, n + 1)


def _check_absorbable(ctmc: CtmcExport) -> None:
    """Every state must reach the absorbing state through positive rates."""
    n = ctmc.n_states
    adj = ctmc.generator > 0.0
    reaches = np.zeros(n, dtype=bool)
    reaches[ctmc.absorbing_index] = True
    frontier = [ctmc.absorbing_index]
    while frontier:
        j = frontier.pop()
        for i in np.nonzero(adj[:, j])[0]:
            if not reaches[i]:
                reaches[i] = True
                frontier.append(int(i))
    if not reaches.all():
        missing = [ctmc.labels[i] for i in np.nonzero(~reaches)[0]]
        raise ReducibleChain(f"absorbing state unreachable from {missing}")


def absorption_time_moments(ctmc: CtmcExport, k: int) -> float:
    """k-th raw moment of the absorption time, k! a (-T)^{-k} 1 over the
    transient block."""
    if k < 1:
        raise NonPositiveInput("moment order must be >= 1")
    _check_absorbable(ctmc)
    transient = [i for i in range(ctmc.n_states) if i != ctmc.absorbing_index]
    if not transient:
        return 0.0
    t_block = ctmc.generator[np.ix_(transient, transient)]
    a = ctmc.initial[transient]
    v = np.ones(len(transient))
    for _ in range(k):
        v = np.linalg.solve(-t_block, v)
    return float(math.factorial(k) * a @ v)


def export_json(ctmc: CtmcExport) -> str:
    return json.dumps(
        {
            "labels": list(ctmc.labels),
            "generator": ctmc.generator.tolist(),
            "initial": ctmc.initial.tolist(),
            "absorbing": ctmc.absorbing_index,
        }
    )


def parse_ctmc_json(text: str) -> CtmcExport:
    data = json.loads(text)
    return CtmcExport(
        tuple(data["labels"]),
        np.array(data["generator"], dtype=float),
        np.array(data["initial"], dtype=float),
        int(data["absorbing"]),
    )


def export_dot(ctmc: CtmcExport) -> str:
    """GraphViz digraph: edges labeled with rates, absorbing state
    double-circled, initial probabilities shown on the node labels."""
    lines = ["digraph ctmc {", "  rankdir=LR;", "  node [shape=circle];"]
    for i, label in enumerate(ctmc.labels):
        attrs = [f'label="{label}"']
        if i == ctmc.absorbing_index:
            attrs.append("shape=doublecircle")
        if ctmc.initial[i] > 0.0:
            attrs[0] = f'label="{label}\\np0={float(ctmc.initial[i])!r}"'
        lines.append(f'  s{i} [{", ".join(attrs)}];')
    for i in range(ctmc.n_states):
        for j in range(ctmc.n_states):
            if i != j and ctmc.generator[i, j] > 0.0:
                lines.append(f'  s{i} -> s{j} [label="{float(ctmc.generator[i, j])!r}"];')
    lines.append("}")
    return "\n".join(lines)
