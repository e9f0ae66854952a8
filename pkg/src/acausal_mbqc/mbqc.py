"""Causal measurement-based computation on graph states.

Computation vertices are measured one at a time in equatorial bases
|phi^m> = (|0> + (-1)^m e^{i phi}|1>)/sqrt(2); later angles adapt to earlier
outcomes through X/Z dependency sets, and the surviving output register gets
a final Pauli byproduct correction before computational-basis readout.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import graphstate, qlin
from .graphstate import Graph
from .qlin import Ket


class PatternError(ValueError):
    """Invalid measurement pattern or pattern/graph mismatch."""


TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Pattern:
    """Adaptive measurement schedule for the computation vertices of a graph.

    order
        Measurement order; a permutation of the graph's computation vertices.
    angles
        Base equatorial angle per computation vertex, stored mod 2*pi.
    x_deps, z_deps
        Per-vertex sets of strictly earlier vertices whose outcome parities
        flip the sign of the angle (x) or add pi to it (z).
    out_x_deps, out_z_deps
        Per-output-vertex parity sets for the final X/Z byproduct correction.
    """

    order: tuple[str, ...]
    angles: Mapping[str, float]
    x_deps: Mapping[str, frozenset[str]]
    z_deps: Mapping[str, frozenset[str]]
    out_x_deps: Mapping[str, frozenset[str]]
    out_z_deps: Mapping[str, frozenset[str]]


def make_pattern(
    order: Sequence[str],
    angles: Mapping[str, float],
    x_deps: Mapping[str, Sequence[str]] | None = None,
    z_deps: Mapping[str, Sequence[str]] | None = None,
    out_x_deps: Mapping[str, Sequence[str]] | None = None,
    out_z_deps: Mapping[str, Sequence[str]] | None = None,
) -> Pattern:
    """Normalize user input into a Pattern (angles reduced mod 2*pi, deps frozen)."""

    def freeze(deps):
        return {str(v): frozenset(str(u) for u in us) for v, us in (deps or {}).items()}

    ang = {}
    for v, a in angles.items():
        a = float(a)
        if not np.isfinite(a):
            raise PatternError(f"angle for {v!r} must be finite, got {a}")
        ang[str(v)] = a % TWO_PI
    return Pattern(
        order=tuple(str(v) for v in order),
        angles=ang,
        x_deps=freeze(x_deps),
        z_deps=freeze(z_deps),
        out_x_deps=freeze(out_x_deps),
        out_z_deps=freeze(out_z_deps),
    )


def validate_pattern(g: Graph, p: Pattern) -> Pattern:
    graphstate.validate(g)
    cset = set(g.computation)
    oset = set(g.output)
    if len(set(p.order)) != len(p.order) or set(p.order) != cset:
        raise PatternError(
            f"order must be a permutation of the computation vertices {sorted(cset)}"
        )
    if set(p.angles) != cset:
        raise PatternError("angles must cover exactly the computation vertices")
    rank = {v: i for i, v in enumerate(p.order)}
    for name, deps in (("x_deps", p.x_deps), ("z_deps", p.z_deps)):
        for v, us in deps.items():
            if v not in cset:
                raise PatternError(f"{name} key {v!r} is not a computation vertex")
            for u in us:
                if u not in cset:
                    raise PatternError(f"{name}[{v!r}] references non-computation vertex {u!r}")
                if rank[u] >= rank[v]:
                    raise PatternError(
                        f"{name}[{v!r}] references {u!r}, which is not strictly earlier in order"
                    )
    for name, deps in (("out_x_deps", p.out_x_deps), ("out_z_deps", p.out_z_deps)):
        for o, us in deps.items():
            if o not in oset:
                raise PatternError(f"{name} key {o!r} is not an output vertex")
            bad = set(us) - cset
            if bad:
                raise PatternError(f"{name}[{o!r}] references non-computation vertices {sorted(bad)}")
    return p


def adapted_angle(phi: float, s_x: int, s_z: int) -> float:
    """Angle actually measured: (-1)^{s_x} phi + pi * s_z, reduced mod 2*pi."""
    if s_x not in (0, 1) or s_z not in (0, 1):
        raise PatternError(f"parities must be bits, got s_x={s_x}, s_z={s_z}")
    return ((-phi if s_x else phi) + np.pi * s_z) % TWO_PI


def as_angle_map(g: Graph, angles) -> dict[str, float]:
    """Accept a scalar (broadcast), a sequence over C in order, or a full mapping."""
    comp = g.computation
    if isinstance(angles, Mapping):
        if set(angles) != set(comp):
            raise PatternError("angle mapping must cover exactly the computation vertices")
        return {v: float(angles[v]) for v in comp}
    if np.isscalar(angles):
        return {v: float(angles) for v in comp}
    vals = [float(a) for a in angles]
    if len(vals) != len(comp):
        raise PatternError(f"expected {len(comp)} angles, got {len(vals)}")
    return dict(zip(comp, vals))


def _parity(m_by: Mapping[str, int], deps: frozenset[str]) -> int:
    return sum(m_by[u] for u in deps) % 2


@dataclass(frozen=True)
class RunRecord:
    """One causal run: outcome bits in graph C order, readout bits in O order."""

    m: tuple[int, ...]
    z: tuple[int, ...]
    branch_probability: float
    corrected: bool


def run_causal(
    g: Graph, p: Pattern, rng: np.random.Generator, *, correct: bool = True
) -> RunRecord:
    """Simulate one adaptive run: measure C in order, correct, read out O.

    ``branch_probability`` is the Born weight of the realized C-outcome
    history only (readout randomness excluded).
    """
    validate_pattern(g, p)
    state = graphstate.graph_state(g)
    pos = {v: i for i, v in enumerate(graphstate.ket_order(g))}
    m_by: dict[str, int] = {}
    branch_prob = 1.0
    for v in p.order:
        phi = adapted_angle(
            p.angles[v],
            _parity(m_by, p.x_deps.get(v, frozenset())),
            _parity(m_by, p.z_deps.get(v, frozenset())),
        )
        res = qlin.sample_projective(state, qlin.equatorial_basis(phi), pos[v], rng)
        state = res.state
        m_by[v] = res.outcome
        branch_prob *= res.probability
        removed = pos.pop(v)
        pos = {u: (i - 1 if i > removed else i) for u, i in pos.items()}
    if correct:
        state = _apply_corrections(g, p, m_by, state, pos)
    z_by: dict[str, int] = {}
    for o in g.output:
        res = qlin.sample_projective(state, qlin.COMPUTATIONAL_BASIS, pos[o], rng)
        state = res.state
        z_by[o] = res.outcome
        removed = pos.pop(o)
        pos = {u: (i - 1 if i > removed else i) for u, i in pos.items()}
    return RunRecord(
        m=tuple(m_by[c] for c in g.computation),
        z=tuple(z_by[o] for o in g.output),
        branch_probability=branch_prob,
        corrected=correct,
    )


def _apply_corrections(
    g: Graph, p: Pattern, m_by: Mapping[str, int], state: Ket, pos: Mapping[str, int]
) -> Ket:
    for o in g.output:
        if _parity(m_by, p.out_x_deps.get(o, frozenset())):
            state = qlin.apply_on_qubits(qlin.PAULI_X, [pos[o]], state)
        if _parity(m_by, p.out_z_deps.get(o, frozenset())):
            state = qlin.apply_on_qubits(qlin.PAULI_Z, [pos[o]], state)
    return state


@dataclass(frozen=True)
class BranchResult:
    """One forced outcome history and its exact post-correction readout distribution."""

    m: tuple[int, ...]
    probability: float
    output_distribution: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.output_distribution, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "output_distribution", arr)


def enumerate_causal(g: Graph, p: Pattern, *, correct: bool = True) -> tuple[BranchResult, ...]:
    """Exact walk over all 2^N adaptive outcome histories.

    Zero-probability branches are reported with probability 0 and an all-zero
    distribution.  The distributions are indexed by the O-register bits, first
    output vertex most significant.
    """
    validate_pattern(g, p)
    base = graphstate.graph_state(g)
    n_comp = g.n_computation
    results = []
    for bits in itertools.product((0, 1), repeat=n_comp):
        forced = dict(zip(p.order, bits))
        state = base
        pos = {v: i for i, v in enumerate(graphstate.ket_order(g))}
        m_by: dict[str, int] = {}
        prob = 1.0
        alive = True
        for v in p.order:
            phi = adapted_angle(
                p.angles[v],
                _parity(m_by, p.x_deps.get(v, frozenset())),
                _parity(m_by, p.z_deps.get(v, frozenset())),
            )
            ket = qlin.equatorial_ket(phi, forced[v])
            amp = np.tensordot(ket.amplitudes.conj(), state.as_tensor(), axes=(0, pos[v]))
            w = float(np.sum(np.abs(amp) ** 2))
            m_by[v] = forced[v]
            removed = pos.pop(v)
            pos = {u: (i - 1 if i > removed else i) for u, i in pos.items()}
            prob *= w
            if w < 1e-28:
                alive = False
                break
            state = Ket(amp.reshape(-1) / np.sqrt(w))
        m_tuple = tuple(forced[c] for c in g.computation)
        if not alive:
            results.append(BranchResult(m_tuple, 0.0, np.zeros(2**g.n_output)))
            continue
        if correct:
            state = _apply_corrections(g, p, m_by, state, pos)
        dist = np.abs(state.amplitudes) ** 2
        results.append(BranchResult(m_tuple, prob, dist))
    return tuple(results)


def branch_probability(g: Graph, angles, m: Sequence[int], z: Sequence[int]) -> float:
    """Joint probability of outcome tuple (m, z) under non-adaptive equatorial
    measurement of C at the given base angles plus computational readout of O.

    Summing over all (m, z) gives exactly 1 for any graph (the projectors form
    a complete orthonormal basis).
    """
    graphstate.validate(g)
    ang = as_angle_map(g, angles)
    m = tuple(int(b) for b in m)
    z = tuple(int(b) for b in z)
    if len(m) != g.n_computation or any(b not in (0, 1) for b in m):
        raise PatternError(f"m must be {g.n_computation} bits")
    if len(z) != g.n_output or any(b not in (0, 1) for b in z):
        raise PatternError(f"z must be {g.n_output} bits")
    factors = [qlin.equatorial_ket(ang[c], mc) for c, mc in zip(g.computation, m)]
    factors += [qlin.basis_ket([bit]) for bit in z]
    bra = qlin.kron_all(factors)
    return float(abs(qlin.overlap(bra, graphstate.graph_state(g))) ** 2)


def positive_branch_output(g: Graph, angles) -> Ket:
    """Normalized output state of the all-zeros outcome branch (no corrections needed).

    Errors if that branch has (numerically) zero probability.
    """
    graphstate.validate(g)
    ang = as_angle_map(g, angles)
    state = graphstate.graph_state(g).as_tensor()
    for c in g.computation:
        ket = qlin.equatorial_ket(ang[c], 0)
        state = np.tensordot(ket.amplitudes.conj(), state, axes=(0, 0))
        w = float(np.sum(np.abs(state) ** 2))
        if w < 1e-28:
            raise PatternError("positive branch has zero probability at these angles")
        state = state / np.sqrt(w)
    return Ket(state.reshape(-1))


# ---------------------------------------------------------------------------
# chain presets

def chain_pattern(g: Graph, angles=0.0) -> Pattern:
    """Standard adaptive pattern for a disjoint union of chains.

    Within each chain, measured from the far end toward the output: each
    vertex's angle sign flips with the previous outcome and picks up pi with
    the one before that; the output correction is X^(last outcome) *
    Z^(second-to-last outcome).
    """
    graphstate.validate(g)
    ang = as_angle_map(g, angles)
    adj = {v: set() for v in g.vertices}
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)
    cset, oset = set(g.computation), set(g.output)

    order: list[str] = []
    x_deps: dict[str, list[str]] = {}
    z_deps: dict[str, list[str]] = {}
    out_x: dict[str, list[str]] = {}
    out_z: dict[str, list[str]] = {}
    seen: set[str] = set()
    for o in g.output:
        if len(adj[o]) != 1:
            raise PatternError(f"output {o!r} must terminate a chain (degree 1)")
        walk = [o]
        prev, cur = o, next(iter(adj[o]))
        while True:
            if cur in oset:
                raise PatternError(f"chain through {o!r} hits a second output {cur!r}")
            walk.append(cur)
            nxt = adj[cur] - {prev}
            if len(nxt) > 1:
                raise PatternError(f"vertex {cur!r} branches; graph is not a union of chains")
            if not nxt:
                break
            prev, cur = cur, next(iter(nxt))
        chain_cs = walk[1:][::-1]  # far end first, output's neighbor last
        for i, v in enumerate(chain_cs):
            if i >= 1:
                x_deps[v] = [chain_cs[i - 1]]
            if i >= 2:
                z_deps[v] = [chain_cs[i - 2]]
        out_x[o] = [chain_cs[-1]]
        if len(chain_cs) >= 2:
            out_z[o] = [chain_cs[-2]]
        order.extend(chain_cs)
        seen.update(walk)
    if seen != cset | oset:
        raise PatternError(f"vertices not on any output chain: {sorted((cset | oset) - seen)}")
    return validate_pattern(
        g, make_pattern(order, ang, x_deps, z_deps, out_x, out_z)
    )


# ---------------------------------------------------------------------------
# JSON interchange

_PATTERN_REQUIRED = {"order", "angles"}
_PATTERN_OPTIONAL = {"x_deps", "z_deps", "out_x_deps", "out_z_deps"}


def pattern_from_json(obj) -> Pattern:
    """Parse ``{"order": [...], "angles": {v: radians}, ...deps...}``; unknown fields rejected."""
    if not isinstance(obj, dict):
        raise PatternError(f"pattern document must be an object, got {type(obj).__name__}")
    unknown = set(obj) - _PATTERN_REQUIRED - _PATTERN_OPTIONAL
    if unknown:
        raise PatternError(f"unknown pattern fields: {sorted(unknown)}")
    missing = _PATTERN_REQUIRED - set(obj)
    if missing:
        raise PatternError(f"missing pattern fields: {sorted(missing)}")
    if not isinstance(obj["order"], list) or not all(isinstance(v, str) for v in obj["order"]):
        raise PatternError("order must be a list of strings")
    if not isinstance(obj["angles"], dict) or not all(
        isinstance(v, str) and isinstance(a, (int, float)) for v, a in obj["angles"].items()
    ):
        raise PatternError("angles must map vertex labels to numbers")
    deps = {}
    for name in _PATTERN_OPTIONAL:
        block = obj.get(name, {})
        if not isinstance(block, dict) or not all(
            isinstance(v, str) and isinstance(us, list) and all(isinstance(u, str) for u in us)
            for v, us in block.items()
        ):
            raise PatternError(f"{name} must map vertex labels to lists of labels")
        deps[name] = block
    return make_pattern(obj["order"], obj["angles"], **deps)


def pattern_to_json(p: Pattern) -> dict:
    return {
        "order": list(p.order),
        "angles": {v: float(a) for v, a in sorted(p.angles.items())},
        "x_deps": {v: sorted(us) for v, us in sorted(p.x_deps.items()) if us},
        "z_deps": {v: sorted(us) for v, us in sorted(p.z_deps.items()) if us},
        "out_x_deps": {v: sorted(us) for v, us in sorted(p.out_x_deps.items()) if us},
        "out_z_deps": {v: sorted(us) for v, us in sorted(p.out_z_deps.items()) if us},
    }


def load_pattern(path) -> Pattern:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PatternError(f"invalid JSON in {path}: {exc}") from exc
    return pattern_from_json(obj)
