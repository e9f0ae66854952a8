"""Process matrices and local instruments in the Choi representation.

A party's local operation with outcome ``a`` is the Choi-Jamiolkowski (CJ)
operator of the map rho -> |r><phi| rho |phi><r| (measure ``phi``, reprepare
``r``), built as sum_{k,l} |k><l| (x) M(|l><k|), which for rank-1
measure/reprepare evaluates exactly to |phi><phi| (x) |r><r|.  CJ registers
are ordered input qubits first, then output qubits.

A process matrix W assigns each party one input and one output qubit of a
global register; probabilities are P = Tr[W (Pi_a (x) Pi_b ...)].  Two
evaluation backends are kept deliberately independent: a dense trace, and a
factorized overlap for W of the form scale * |pure><pure| (x) (I/2)^k with
rank-1 product instruments.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import config, qlin
from .qlin import HermOp, Ket


class ProcmatError(ValueError):
    """Violation of a process-matrix or instrument precondition."""


TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# CJ operators and instruments

@dataclass(frozen=True)
class CJOperator:
    """Choi operator of one instrument element.

    ``measure_ket`` / ``reprepare_ket`` are retained for rank-1
    measure-reprepare elements so the factorized backend can use them; they
    are None for general elements (e.g. summed instruments).
    """

    op: HermOp
    in_count: int
    out_count: int
    outcome_label: str
    measure_ket: Ket | None = None
    reprepare_ket: Ket | None = None

    def __post_init__(self):
        if self.in_count < 1 or self.out_count < 1:
            raise ProcmatError("CJ operators need at least one input and output qubit")
        if self.op.num_qubits != self.in_count + self.out_count:
            raise ProcmatError(
                f"CJ operator on {self.op.num_qubits} qubits does not match "
                f"{self.in_count} inputs + {self.out_count} outputs"
            )
        for name, ket in (("measure_ket", self.measure_ket), ("reprepare_ket", self.reprepare_ket)):
            if ket is not None and ket.num_qubits != 1:
                raise ProcmatError(f"{name} must be single-qubit")
        if self.measure_ket is not None and self.reprepare_ket is not None:
            ref = np.kron(
                np.outer(self.measure_ket.amplitudes, self.measure_ket.amplitudes.conj()),
                np.outer(self.reprepare_ket.amplitudes, self.reprepare_ket.amplitudes.conj()),
            )
            if float(np.max(np.abs(ref - self.op.entries))) > 1e-12:
                raise ProcmatError("stored kets do not reproduce the CJ operator")

    @property
    def factorizable(self) -> bool:
        return self.measure_ket is not None and self.reprepare_ket is not None


def choi_of_measure_reprepare(measure: Ket, reprepare: Ket, outcome_label: str) -> CJOperator:
    """CJ operator of rho -> |r><phi| rho |phi><r| via the literal double sum."""
    if measure.num_qubits != 1 or reprepare.num_qubits != 1:
        raise ProcmatError("measure and reprepare kets must be single-qubit")
    phi = measure.amplitudes
    rr = np.outer(reprepare.amplitudes, reprepare.amplitudes.conj())
    op = np.zeros((4, 4), dtype=np.complex128)
    for k in range(2):
        for l in range(2):
            ketbra = np.zeros((2, 2), dtype=np.complex128)
            ketbra[k, l] = 1.0
            # M(|l><k|) = <phi|l><k|phi> |r><r|
            op += np.kron(ketbra, (phi.conj()[l] * phi[k]) * rr)
    return CJOperator(
        op=HermOp(op),
        in_count=1,
        out_count=1,
        outcome_label=str(outcome_label),
        measure_ket=measure,
        reprepare_ket=reprepare,
    )


@dataclass(frozen=True)
class Instrument:
    """All outcome elements of one party's local operation."""

    elements: tuple[CJOperator, ...]
    description: str = ""

    def __post_init__(self):
        if not self.elements:
            raise ProcmatError("instrument needs at least one element")
        shapes = {(e.in_count, e.out_count) for e in self.elements}
        if len(shapes) != 1:
            raise ProcmatError(f"instrument elements disagree on register shape: {shapes}")

    @property
    def in_count(self) -> int:
        return self.elements[0].in_count

    @property
    def out_count(self) -> int:
        return self.elements[0].out_count

    def summed_op(self) -> HermOp:
        return HermOp(sum(e.op.entries for e in self.elements))

    def summed_cj(self) -> CJOperator:
        return CJOperator(
            op=self.summed_op(),
            in_count=self.in_count,
            out_count=self.out_count,
            outcome_label="sum",
        )


def alice_instrument(phi: float) -> Instrument:
    """Equatorial measurement at angle phi, reprepared as the outcome bit."""
    return Instrument(
        elements=tuple(
            choi_of_measure_reprepare(qlin.equatorial_ket(phi, m), qlin.basis_ket([m]), f"m={m}")
            for m in (0, 1)
        ),
        description=f"equatorial(phi={float(phi):.6f})",
    )


def bob_instrument() -> Instrument:
    """Computational-basis readout, reprepared as the outcome bit."""
    return Instrument(
        elements=tuple(
            choi_of_measure_reprepare(qlin.basis_ket([z]), qlin.basis_ket([z]), f"z={z}")
            for z in (0, 1)
        ),
        description="computational readout",
    )


def instrument_from_kets(
    measure_kets: Sequence[Ket], reprepare_kets: Sequence[Ket], description: str = ""
) -> Instrument:
    """Rank-1 instrument from per-outcome measure and reprepare kets."""
    if len(measure_kets) != len(reprepare_kets):
        raise ProcmatError("need one reprepare ket per measure ket")
    elems = tuple(
        choi_of_measure_reprepare(mk, rk, f"k={i}")
        for i, (mk, rk) in enumerate(zip(measure_kets, reprepare_kets))
    )
    return Instrument(elements=elems, description=description)


@dataclass(frozen=True)
class CptpReport:
    """Trace-preservation defect and positivity floor of a summed instrument."""

    identity_deviation: float
    min_eigenvalue: float

    def passes(self, tol: float = 1e-10) -> bool:
        return self.identity_deviation <= tol and self.min_eigenvalue >= -tol


def cptp_check(inst: Instrument) -> CptpReport:
    """CPTP iff the summed CJ operator is PSD and traces out to the identity."""
    total = inst.summed_op()
    out_positions = list(range(inst.in_count, inst.in_count + inst.out_count))
    reduced = qlin.partial_trace(total, out_positions)
    dev = float(np.max(np.abs(reduced.entries - np.eye(2**inst.in_count))))
    return CptpReport(identity_deviation=dev, min_eigenvalue=qlin.min_eigenvalue(total))


# ---------------------------------------------------------------------------
# process matrices

@dataclass(frozen=True)
class Slot:
    """One party's input/output qubit positions in the global register."""

    party: str
    input_qubit: int
    output_qubit: int


@dataclass(frozen=True)
class PureMixedFactor:
    """W = scale * |pure><pure| on ``pure_qubits`` (x) I/2 on each ``mixed_qubit``."""

    pure: Ket
    pure_qubits: tuple[int, ...]
    mixed_qubits: tuple[int, ...]
    scale: float


class ProcessMatrix:
    """Process matrix over single-qubit-in/single-qubit-out party slots.

    Holds a dense operator, a pure (x) maximally-mixed factorization, or both;
    the factorization enables large instances and the independent fast backend.
    """

    def __init__(
        self,
        slots: Sequence[Slot],
        op: HermOp | None = None,
        factor: PureMixedFactor | None = None,
    ):
        slots = tuple(slots)
        if not slots:
            raise ProcmatError("process matrix needs at least one slot")
        if op is None and factor is None:
            raise ProcmatError("process matrix needs a dense operator or a factorization")
        parties = [s.party for s in slots]
        if len(set(parties)) != len(parties):
            raise ProcmatError(f"duplicate party names: {parties}")
        claimed = [q for s in slots for q in (s.input_qubit, s.output_qubit)]
        if sorted(claimed) != list(range(2 * len(slots))):
            raise ProcmatError(
                f"slot qubits must partition range({2 * len(slots)}), got {sorted(claimed)}"
            )
        if op is not None and op.num_qubits != 2 * len(slots):
            raise ProcmatError(
                f"dense operator on {op.num_qubits} qubits does not match {len(slots)} slots"
            )
        if factor is not None:
            both = sorted(factor.pure_qubits + factor.mixed_qubits)
            if both != list(range(2 * len(slots))):
                raise ProcmatError("factor qubits must partition the register")
            if factor.pure.num_qubits != len(factor.pure_qubits):
                raise ProcmatError("factor pure ket size disagrees with its qubit list")
            if factor.scale <= 0:
                raise ProcmatError("factor scale must be positive")
        self.slots = slots
        self.factor = factor
        self._op = op

    @property
    def num_qubits(self) -> int:
        return 2 * len(self.slots)

    @property
    def parties(self) -> tuple[str, ...]:
        return tuple(s.party for s in self.slots)

    def slot_for(self, party: str) -> Slot:
        for s in self.slots:
            if s.party == party:
                return s
        raise ProcmatError(f"unknown party {party!r}; have {self.parties}")

    def dense(self, cap: int | None = None) -> HermOp:
        """Materialize the dense operator (cached); capped by the dense-operator limit."""
        if self._op is None:
            f = self.factor
            k = self.num_qubits
            limit = min(config.qubit_cap(cap), config.DENSE_OPERATOR_CAP)
            if k > limit:
                raise config.RegisterCapError(
                    f"dense process matrix needs {k} qubits, above the operator cap {limit}"
                )
            big = qlin.kron_all(
                [qlin.projector(f.pure)] + [qlin.maximally_mixed(1) for _ in f.mixed_qubits]
            )
            perm = list(f.pure_qubits) + list(f.mixed_qubits)
            self._op = HermOp(f.scale * qlin.permute_qubits(big, perm).entries)
        return self._op

    def trace(self) -> float:
        if self.factor is not None:
            return float(self.factor.scale * np.sum(np.abs(self.factor.pure.amplitudes) ** 2))
        return float(self._op.trace().real)

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue; for factored W this is scale * 2^-mixed * min eig |pure><pure|,
        since tensoring with I/2 factors only rescales the spectrum."""
        if self.factor is not None:
            f = self.factor
            base = qlin.min_eigenvalue(qlin.projector(f.pure))
            return float(f.scale * 0.5 ** len(f.mixed_qubits) * base)
        return qlin.min_eigenvalue(self._op)


# ---------------------------------------------------------------------------
# probabilities

_clamp_lock = threading.Lock()
_clamp_count = 0


def clamped_probability_count() -> int:
    """How many tiny-negative probabilities were clamped to zero so far."""
    with _clamp_lock:
        return _clamp_count


def reset_clamped_probability_count() -> None:
    global _clamp_count
    with _clamp_lock:
        _clamp_count = 0


def _validated_probability(value: float) -> float:
    global _clamp_count
    lo = -config.PROBABILITY_RANGE_SLACK
    hi = 1.0 + config.PROBABILITY_RANGE_SLACK
    if value < lo or value > hi:
        raise ProcmatError(f"probability {value!r} outside [{lo}, {hi}]")
    if value < 0.0:
        with _clamp_lock:
            _clamp_count += 1
        return 0.0
    return float(value)


def pm_probability(
    w: ProcessMatrix, assignment: Mapping[str, CJOperator], backend: str = "auto"
) -> float:
    """P = Tr[W (x)_parties CJ], one CJ element per party.

    backend: "dense" (trace against the materialized operator), "factorized"
    (overlap against the pure (x) mixed form; needs rank-1 kets), or "auto"
    (factorized when possible, dense otherwise).
    """
    if set(assignment) != set(w.parties):
        raise ProcmatError(
            f"assignment parties {sorted(assignment)} do not match {sorted(w.parties)}"
        )
    for party, cj in assignment.items():
        if cj.in_count != 1 or cj.out_count != 1:
            raise ProcmatError(f"party {party!r}: slots are single-qubit in/out")

    if backend == "auto":
        usable = w.factor is not None and all(cj.factorizable for cj in assignment.values())
        backend = "factorized" if usable else "dense"
    if backend == "factorized":
        return _validated_probability(_factorized_probability(w, assignment))
    if backend == "dense":
        return _validated_probability(_dense_probability(w, assignment))
    raise ProcmatError(f"unknown backend {backend!r}")


def _factorized_probability(w: ProcessMatrix, assignment: Mapping[str, CJOperator]) -> float:
    f = w.factor
    if f is None:
        raise ProcmatError("factorized backend needs a factored process matrix")
    at_pos: dict[int, Ket] = {}
    for slot in w.slots:
        cj = assignment[slot.party]
        if not cj.factorizable:
            raise ProcmatError(
                f"party {slot.party!r} element {cj.outcome_label!r} has no kets; "
                "use the dense backend"
            )
        at_pos[slot.input_qubit] = cj.measure_ket
        at_pos[slot.output_qubit] = cj.reprepare_ket
    # <u|pure> with u the product ket over the pure qubits; each mixed qubit
    # contributes <k|I/2|k> = 1/2 for its unit ket.
    bra = qlin.kron_all([at_pos[q] for q in f.pure_qubits])
    amp = qlin.overlap(bra, f.pure)
    return float(f.scale * 0.5 ** len(f.mixed_qubits) * abs(amp) ** 2)


def _dense_probability(w: ProcessMatrix, assignment: Mapping[str, CJOperator]) -> float:
    big = qlin.kron_all([assignment[s.party].op for s in w.slots])
    # kron laid the CJs out as [in0, out0, in1, out1, ...]; route them to their slots
    perm: list[int] = []
    for s in w.slots:
        perm.extend((s.input_qubit, s.output_qubit))
    projector_op = qlin.permute_qubits(big, perm)
    value = complex(np.einsum("ij,ji->", w.dense().entries, projector_op.entries))
    if abs(value.imag) > 1e-10:
        raise ProcmatError(f"probability has imaginary part {value.imag:.3e}")
    return float(value.real)


# ---------------------------------------------------------------------------
# normalization sweeps

InstrumentFamily = Callable[[np.random.Generator], Mapping[str, Instrument]]


@dataclass(frozen=True)
class PmValidityReport:
    """Positivity floor plus worst total-probability deviation over sampled instruments."""

    min_eigenvalue: float
    max_deviation: float
    worst_assignment: dict[str, str]
    trials: int
    tolerance: float
    passed: bool


def pm_validate(
    w: ProcessMatrix,
    family: InstrumentFamily,
    trials: int,
    tol: float,
    rng: np.random.Generator,
    backend: str = "auto",
) -> PmValidityReport:
    """Check that outcome probabilities total 1 for sampled CPTP instrument tuples.

    Reports the worst deviation rather than raising: a violation means the
    operator is not a valid process matrix for that instrument family, which
    is legitimate report content for exploratory families.
    """
    if trials < 1:
        raise ProcmatError("pm_validate needs at least one trial")
    worst = -1.0
    worst_desc: dict[str, str] = {}
    for _ in range(trials):
        instruments = dict(family(rng))
        if set(instruments) != set(w.parties):
            raise ProcmatError("family must assign an instrument to every party")
        total = 0.0
        parties = list(w.parties)
        # sum over the full outcome product, one pm_probability per combination
        combos: list[dict] = [{}]
        for party in parties:
            combos = [
                {**c, party: elem} for c in combos for elem in instruments[party].elements
            ]
        for combo in combos:
            total += pm_probability(w, combo, backend=backend)
        dev = abs(total - 1.0)
        if dev > worst:
            worst = dev
            worst_desc = {p: instruments[p].description for p in parties}
    min_eig = w.min_eigenvalue()
    return PmValidityReport(
        min_eigenvalue=min_eig,
        max_deviation=worst,
        worst_assignment=worst_desc,
        trials=trials,
        tolerance=tol,
        passed=(worst <= tol and min_eig >= -tol),
    )


def mbqc_instrument_family(
    alice_parties: Sequence[str], bob_parties: Sequence[str]
) -> InstrumentFamily:
    """Random equatorial angles for the Alices, computational readout for the Bobs."""
    alices = tuple(alice_parties)
    bobs = tuple(bob_parties)

    def sample(rng: np.random.Generator) -> dict[str, Instrument]:
        out = {a: alice_instrument(float(rng.uniform(0.0, TWO_PI))) for a in alices}
        out.update({b: bob_instrument() for b in bobs})
        return out

    return sample


def rank_one_instrument_family(parties: Sequence[str]) -> InstrumentFamily:
    """Haar-random rank-1 measure bases with independent random reprepare kets.

    Exploratory: such instruments are CPTP but can expose operators that are
    only normalized for restricted families.
    """
    parties = tuple(parties)

    def fmt(ket: Ket) -> str:
        a, b = ket.amplitudes
        return f"({a.real:+.3f}{a.imag:+.3f}j, {b.real:+.3f}{b.imag:+.3f}j)"

    def sample(rng: np.random.Generator) -> dict[str, Instrument]:
        out = {}
        for p in parties:
            mk = qlin.random_single_qubit_basis(rng)
            rk = (qlin.random_ket(rng, 1), qlin.random_ket(rng, 1))
            out[p] = instrument_from_kets(
                mk, rk, description=f"measure {fmt(mk[0])}/{fmt(mk[1])}, reprepare {fmt(rk[0])}/{fmt(rk[1])}"
            )
        return out

    return sample


def density_process_matrix(rho: HermOp, party_prefix: str = "P") -> ProcessMatrix:
    """W = 2^k rho (x) (I/2)^k with each party reading one qubit of rho.

    With measure-reprepare instruments this reproduces the Born probabilities
    of rho exactly; the repreparations meet the maximally mixed outputs and
    drop out.
    """
    k = rho.num_qubits
    trace = float(rho.trace().real)
    if abs(trace - 1.0) > 1e-10:
        raise ProcmatError(f"rho must have unit trace, got {trace}")
    big = qlin.kron_all([rho] + [qlin.maximally_mixed(1) for _ in range(k)])
    perm = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
    op = HermOp((2.0**k) * qlin.permute_qubits(big, perm).entries)
    slots = [Slot(f"{party_prefix}{i + 1}", 2 * i, 2 * i + 1) for i in range(k)]
    return ProcessMatrix(slots, op=op)
