"""Causal game separating the acausal resource from any fixed party ordering.

The referee asks for the computation's deterministic output 0^n.  Under a
fixed order, whichever side goes first limits the score: measuring parties
first ("girls first") allows perfect play, readout first ("boys first")
reduces the outputs to their unconditioned marginal.  A causal strategy
averaging the two orders scores at most (1 + 2^-n)/2; the acausal resource
scores 1 in both orders simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import acausal, config, graphstate, mbqc, qlin
from .graphstate import Graph
from .mbqc import Pattern


class GameError(ValueError):
    """Instance does not define a valid deterministic game."""


VALIDITY_ATOL = 1e-10
VIOLATION_ATOL = 1e-9


@dataclass(frozen=True)
class GameInstance:
    """Graph, angles, and pattern whose corrected output is |0...0> exactly."""

    graph: Graph
    angles: Mapping[str, float]
    pattern: Pattern

    @property
    def n_output(self) -> int:
        return self.graph.n_output


def game_instance(g: Graph, angles=0.0, pattern: Pattern | None = None) -> GameInstance:
    """Build an instance, enforcing the validity gate.

    The positive-branch output must have fidelity >= 1 - 1e-10 with |0^n>;
    chains of even total length at angle 0 qualify, odd ones do not.
    """
    graphstate.validate(g)
    ang = mbqc.as_angle_map(g, angles)
    if pattern is None:
        pattern = mbqc.chain_pattern(g, ang)
    else:
        mbqc.validate_pattern(g, pattern)
    target = qlin.basis_ket([0] * g.n_output)
    fid = qlin.fidelity(mbqc.positive_branch_output(g, ang), target)
    if fid < 1.0 - VALIDITY_ATOL:
        raise GameError(
            f"positive-branch output has fidelity {fid!r} with |0^n|; "
            "not a deterministic game instance"
        )
    return GameInstance(graph=g, angles=ang, pattern=pattern)


def causal_bound(n: int) -> float:
    """Best causal success probability for n output bits: (1 + 2^-n)/2."""
    if int(n) != n or n < 1:
        raise GameError(f"n must be a positive integer, got {n!r}")
    return 0.5 * (1.0 + 2.0 ** -int(n))


def acausal_p0(inst: GameInstance, backend: str = "auto") -> float:
    """Success probability with the acausal resource: sum over m of P(m, 0^n)."""
    r = acausal.build_resource_pm(inst.graph)
    probs = acausal.outcome_probabilities(r, inst.angles, backend=backend)
    return float(probs[:, 0].sum())


def girls_first_p0(
    inst: GameInstance, correct: bool = True, shots: int = 0, seed: int | None = None
) -> float:
    """Success probability when all measurements happen before readout.

    shots = 0 evaluates the exact branch enumeration; shots > 0 estimates it
    from seeded causal runs.
    """
    if shots == 0:
        branches = mbqc.enumerate_causal(inst.graph, inst.pattern, correct=correct)
        return float(sum(b.probability * b.output_distribution[0] for b in branches))
    if shots < 0:
        raise GameError("shots must be nonnegative")
    rng = np.random.default_rng(config.DEFAULT_SEED if seed is None else seed)
    wins = 0
    for _ in range(shots):
        rec = mbqc.run_causal(inst.graph, inst.pattern, rng, correct=correct)
        wins += int(all(b == 0 for b in rec.z))
    return wins / shots


def boys_first_p0(inst: GameInstance) -> float:
    """Success probability when the outputs are read out first: <0^n| Tr_C |G><G| |0^n>."""
    g = inst.graph
    state = graphstate.graph_state(g)
    rho = qlin.partial_trace(qlin.projector(state), range(g.n_computation))
    return float(rho.entries[0, 0].real)


def game_report(inst: GameInstance, backend: str = "auto") -> dict:
    """Full comparison for one instance; ``violated`` is the headline claim."""
    bound = causal_bound(inst.n_output)
    p0 = acausal_p0(inst, backend=backend)
    return {
        "p0_acausal": p0,
        "p0_girls_first_corrected": girls_first_p0(inst, correct=True),
        "p0_girls_first_uncorrected": girls_first_p0(inst, correct=False),
        "p0_boys_first": boys_first_p0(inst),
        "bound": bound,
        "violated": bool(p0 > bound + VIOLATION_ATOL),
    }


def standard_instances() -> dict[str, GameInstance]:
    """Shipped instances: single chains of length 2 and 4, and two parallel 2-chains."""
    return {
        "p2": game_instance(graphstate.chain(2)),
        "p4": game_instance(graphstate.chain(4)),
        "two_chains": game_instance(graphstate.parallel_chains([2, 2])),
    }
