"""The acausal resource: a process matrix that runs a graph computation in one shot.

Construction: decorate the graph (one pendant per computation vertex), then

    W = 2^(N+n) |G'><G'| (x) (I/2)^n

on 2(N+n) qubits.  Party j of the N "Alice" parties holds computation vertex
j as input and its pendant as output; party t of the n "Bob" parties holds
output vertex t as input and one maximally mixed ancilla qubit as output.

When every Alice measures equatorially and reprepares her outcome bit, the
pendant projection turns into a Z^m byproduct on the measured vertex, which
the outcome-signed basis absorbs: every outcome branch m yields the same
output statistics as the positive branch, with no causal order among the
parties.  For graphs with uniformly random branches this makes W a normalized
process matrix; the package verifies both sides of that boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import config, graphstate, mbqc, procmat, qlin
from .graphstate import Graph
from .procmat import ProcessMatrix, PureMixedFactor, Slot


class AcausalError(RuntimeError):
    """Internal construction identity failed; indicates a genuine bug."""


@dataclass(frozen=True)
class ResourcePM:
    """Resource process matrix plus the graphs and layout it was built from."""

    w: ProcessMatrix
    base_graph: Graph
    decorated_graph: Graph

    @property
    def n_computation(self) -> int:
        return self.base_graph.n_computation

    @property
    def n_output(self) -> int:
        return self.base_graph.n_output

    @property
    def alice_parties(self) -> tuple[str, ...]:
        return tuple(f"A{j + 1}" for j in range(self.n_computation))

    @property
    def bob_parties(self) -> tuple[str, ...]:
        return tuple(f"B{t + 1}" for t in range(self.n_output))

    def trace(self) -> float:
        return self.w.trace()

    def min_eigenvalue(self) -> float:
        return self.w.min_eigenvalue()

    def layout(self) -> dict[str, dict[str, str]]:
        """Party -> {input: vertex, output: vertex-or-ancilla} in register order."""
        dec = self.decorated_graph.decoration_map
        out: dict[str, dict[str, str]] = {}
        for j, c in enumerate(self.base_graph.computation):
            out[f"A{j + 1}"] = {"input": c, "output": dec[c]}
        for t, o in enumerate(self.base_graph.output):
            out[f"B{t + 1}"] = {"input": o, "output": f"ancilla{t}"}
        return out


def build_resource_pm(g: Graph, cap: int | None = None) -> ResourcePM:
    """Build W for an undecorated graph, verifying the decoration identity.

    The graph state of the decorated graph must equal controlled-Z entangling
    of fresh |+> pendants onto the plain graph state (fidelity >= 1 - 1e-12);
    both routes are computed and compared on every build.
    """
    graphstate.validate(g)
    if g.decoration is not None:
        raise graphstate.GraphError(["build_resource_pm expects an undecorated graph"])
    n_comp, n_out = g.n_computation, g.n_output
    config.check_cap(2 * (n_comp + n_out), cap, what="resource process matrix register")

    decorated = graphstate.decorate(g)
    route_a = graphstate.graph_state(decorated, cap)

    # independent route: plain graph state, pendants appended, one CZ each
    route_b = qlin.kron_all([graphstate.graph_state(g, cap)] + [qlin.PLUS] * n_comp)
    for j in range(n_comp):
        route_b = qlin.apply_on_qubits(qlin.CZ, [j, n_comp + n_out + j], route_b)
    fid = qlin.fidelity(route_a, qlin.Ket(route_b.amplitudes))
    if fid < 1.0 - 1e-12:
        raise AcausalError(f"decoration identity violated: fidelity {fid!r}")

    pure_qubits = (
        [2 * j for j in range(n_comp)]
        + [2 * n_comp + 2 * t for t in range(n_out)]
        + [2 * j + 1 for j in range(n_comp)]
    )
    mixed_qubits = [2 * n_comp + 2 * t + 1 for t in range(n_out)]
    factor = PureMixedFactor(
        pure=route_a,
        pure_qubits=tuple(pure_qubits),
        mixed_qubits=tuple(mixed_qubits),
        scale=float(2 ** (n_comp + n_out)),
    )
    slots = [Slot(f"A{j + 1}", 2 * j, 2 * j + 1) for j in range(n_comp)]
    slots += [Slot(f"B{t + 1}", 2 * n_comp + 2 * t, 2 * n_comp + 2 * t + 1) for t in range(n_out)]
    return ResourcePM(
        w=ProcessMatrix(slots, factor=factor), base_graph=g, decorated_graph=decorated
    )


def _bits(value: Sequence[int], count: int, name: str) -> tuple[int, ...]:
    bits = tuple(int(b) for b in value)
    if len(bits) != count or any(b not in (0, 1) for b in bits):
        raise mbqc.PatternError(f"{name} must be {count} bits, got {value!r}")
    return bits


def _assignment(
    r: ResourcePM, ang: Mapping[str, float], m: tuple[int, ...], z: tuple[int, ...]
) -> dict[str, procmat.CJOperator]:
    out = {}
    for j, c in enumerate(r.base_graph.computation):
        out[f"A{j + 1}"] = procmat.alice_instrument(ang[c]).elements[m[j]]
    for t in range(r.n_output):
        out[f"B{t + 1}"] = procmat.bob_instrument().elements[z[t]]
    return out


def acausal_probability(
    r: ResourcePM, angles, m: Sequence[int], z: Sequence[int], backend: str = "auto"
) -> float:
    """P(m, z) under equatorial Alice measurements at the given base angles."""
    ang = mbqc.as_angle_map(r.base_graph, angles)
    m = _bits(m, r.n_computation, "m")
    z = _bits(z, r.n_output, "z")
    return procmat.pm_probability(r.w, _assignment(r, ang, m, z), backend=backend)


def outcome_probabilities(r: ResourcePM, angles, backend: str = "auto") -> np.ndarray:
    """All P(m, z) as a (2^N, 2^n) array, bit 0 most significant."""
    ang = mbqc.as_angle_map(r.base_graph, angles)
    n_comp, n_out = r.n_computation, r.n_output
    probs = np.empty((2**n_comp, 2**n_out))
    for mi in range(2**n_comp):
        m = tuple((mi >> (n_comp - 1 - j)) & 1 for j in range(n_comp))
        for zi in range(2**n_out):
            z = tuple((zi >> (n_out - 1 - t)) & 1 for t in range(n_out))
            probs[mi, zi] = procmat.pm_probability(r.w, _assignment(r, ang, m, z), backend=backend)
    return probs


def branch_independence_report(r: ResourcePM, angles, backend: str = "auto") -> float:
    """max over (m, z) of |P(m, z) - P(0, z)|; zero means no branch dependence."""
    probs = outcome_probabilities(r, angles, backend=backend)
    return float(np.max(np.abs(probs - probs[0:1, :])))


def normalization_report(r: ResourcePM, angles, backend: str = "auto") -> float:
    """|sum over (m, z) of P - 1|; nonzero flags an unnormalized process matrix."""
    probs = outcome_probabilities(r, angles, backend=backend)
    return float(abs(probs.sum() - 1.0))


def signaling_tv(r: ResourcePM, angles_a, angles_b, backend: str = "auto") -> float:
    """Total variation between the Bobs' z-marginals under two Alice angle choices.

    Any positive value certifies Alice-to-Bob signaling within the process.
    """
    za = outcome_probabilities(r, angles_a, backend=backend).sum(axis=0)
    zb = outcome_probabilities(r, angles_b, backend=backend).sum(axis=0)
    return float(0.5 * np.sum(np.abs(za - zb)))


def backend_agreement(r: ResourcePM, angles) -> float:
    """max over (m, z) of |dense - factorized| probability; exercises both routes."""
    dense = outcome_probabilities(r, angles, backend="dense")
    fact = outcome_probabilities(r, angles, backend="factorized")
    return float(np.max(np.abs(dense - fact)))


# ---------------------------------------------------------------------------
# postselected sampling

@dataclass(frozen=True)
class PostselectResult:
    """Accepted-outcome counts from simulating the protocol with postselection."""

    counts: np.ndarray  # (2^N, 2^n) ints over (m, z)
    shots: int
    accepted: int
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.counts)
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def acceptance(self) -> float:
        return self.accepted / self.shots if self.shots else 0.0

    def empirical_distribution(self) -> np.ndarray | None:
        if self.accepted == 0:
            return None
        return self.counts / self.accepted


def postselected_sampler(
    g: Graph,
    angles,
    shots: int,
    seed: int | None = None,
    *,
    batch_size: int = 65536,
    cap: int | None = None,
) -> PostselectResult:
    """Sample the decorated state, keep runs where pendants echo outcomes and
    ancilla bits match the readout.

    Every computation vertex is rotated into its equatorial basis once, so a
    basis-state draw of the whole register is exactly a joint Born sample of
    (outcome bits, readout bits, pendant bits); ancilla bits are fair coins.
    Acceptance requires pendant == outcome per vertex and ancilla == readout
    per output, and happens at rate 2^-(N+n) for uniform-branch graphs.

    Batch b draws from ``numpy.random.SeedSequence([seed, b])``: results are
    reproducible for a fixed (seed, batch_size) pair, and batch_size is purely
    a memory knob that also fixes the stream partitioning.
    """
    graphstate.validate(g)
    if shots < 1:
        raise ValueError("shots must be positive")
    ang = mbqc.as_angle_map(g, angles)
    n_comp, n_out = g.n_computation, g.n_output
    seed = config.DEFAULT_SEED if seed is None else int(seed)

    state = graphstate.graph_state(graphstate.decorate(g), cap)
    for j, c in enumerate(g.computation):
        # basis change: row m is <phi^m|, so basis-state bit j becomes outcome m_j
        rows = np.array(
            [
                qlin.equatorial_ket(ang[c], 0).amplitudes.conj(),
                qlin.equatorial_ket(ang[c], 1).amplitudes.conj(),
            ]
        )
        state = qlin.apply_on_qubits(qlin.HermOp(rows, require_hermitian=False), [j], state)
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()

    k = 2 * n_comp + n_out
    shift = k - 1 - np.arange(k)
    black_pos = np.arange(n_comp)
    out_pos = n_comp + np.arange(n_out)
    red_pos = n_comp + n_out + np.arange(n_comp)
    counts = np.zeros((2**n_comp, 2**n_out), dtype=np.int64)
    accepted = 0
    done = 0
    batch_index = 0
    while done < shots:
        take = min(batch_size, shots - done)
        rng = np.random.default_rng(np.random.SeedSequence([seed, batch_index]))
        idx = rng.choice(probs.size, size=take, p=probs)
        anc = rng.integers(0, 2, size=(take, n_out))
        bits = (idx[:, None] >> shift[None, :]) & 1
        ok = np.all(bits[:, red_pos] == bits[:, black_pos], axis=1) & np.all(
            anc == bits[:, out_pos], axis=1
        )
        m_idx = bits[ok][:, black_pos] @ (1 << np.arange(n_comp - 1, -1, -1))
        z_idx = bits[ok][:, out_pos] @ (1 << np.arange(n_out - 1, -1, -1))
        np.add.at(counts, (m_idx, z_idx), 1)
        accepted += int(ok.sum())
        done += take
        batch_index += 1
    return PostselectResult(counts=counts, shots=shots, accepted=accepted, seed=seed)


def postselection_report(
    g: Graph, angles, shots: int, seed: int | None = None, backend: str = "auto"
) -> dict:
    """Sampler-vs-exact comparison: acceptance rate, expected rate, and the
    total variation between the accepted empirical distribution and the exact
    acausal distribution (normalized)."""
    result = postselected_sampler(g, angles, shots, seed)
    r = build_resource_pm(g)
    exact = outcome_probabilities(r, angles, backend=backend)
    exact = exact / exact.sum()
    emp = result.empirical_distribution()
    tv = None if emp is None else float(0.5 * np.sum(np.abs(emp - exact)))
    return {
        "acceptance": result.acceptance,
        "expected": float(2.0 ** -(g.n_computation + g.n_output)),
        "tv": tv,
        "shots": result.shots,
        "seed": result.seed,
    }


def full_report(
    g: Graph,
    angles,
    angles_b=None,
    shots: int = 0,
    seed: int | None = None,
    backend: str = "auto",
) -> dict:
    """Union verification document over one graph and angle assignment.

    ``angles_b`` defaults to the same angles with pi added at the first
    computation vertex (the canonical signaling witness); ``shots = 0`` skips
    sampling and reports null for the postselect block.
    """
    r = build_resource_pm(g)
    ang = mbqc.as_angle_map(g, angles)
    if angles_b is None:
        first = g.computation[0]
        ang_b = dict(ang)
        ang_b[first] = ang[first] + np.pi
    else:
        ang_b = mbqc.as_angle_map(g, angles_b)
    return {
        "branch_independence_max_dev": branch_independence_report(r, ang, backend=backend),
        "normalization_dev": normalization_report(r, ang, backend=backend),
        "min_eigenvalue": r.min_eigenvalue(),
        "trace": r.trace(),
        "signaling_tv": signaling_tv(r, ang, ang_b, backend=backend),
        "postselect": (
            postselection_report(g, ang, shots, seed, backend=backend) if shots > 0 else None
        ),
    }
