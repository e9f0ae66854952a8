"""Dense complex linear algebra over ordered qubit registers.

Single ordering contract used by the whole package: qubit 0 is the most
significant bit of a basis-state label, so a register ``[q0, ..., q_{k-1}]``
stores the amplitude of basis state ``|b0 b1 ... b_{k-1}>`` at flat index
``b0*2**(k-1) + ... + b_{k-1}``.  Equivalently, reshaping a state vector to
``(2,)*k`` puts qubit ``i`` on axis ``i``.

All objects are immutable after construction (the backing arrays are frozen)
and therefore safe to share between threads.  Nothing in this module owns
random state; samplers take a ``numpy.random.Generator`` from the caller.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import config


class QlinError(ValueError):
    """Violation of a register-algebra precondition."""


def _num_qubits_for(dim: int) -> int:
    k = int(dim).bit_length() - 1
    if dim <= 0 or 2**k != dim:
        raise QlinError(f"dimension {dim} is not a power of two")
    return k


def _frozen_array(data, shape) -> np.ndarray:
    arr = np.array(data, dtype=np.complex128).reshape(shape)
    arr.flags.writeable = False
    return arr


class Ket:
    """Pure state vector on an ordered qubit register.

    Parameters
    ----------
    amplitudes : array_like
        Complex amplitudes of length ``2**k``.
    require_normalized : bool, optional
        When True (default) the norm must equal 1 within ``config.NORM_ATOL``.
        Unnormalized construction must be requested explicitly.
    """

    __slots__ = ("amplitudes", "num_qubits")

    def __init__(self, amplitudes, *, require_normalized: bool = True):
        vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        k = _num_qubits_for(vec.size)
        if not np.all(np.isfinite(vec)):
            raise QlinError("ket amplitudes must be finite")
        if require_normalized:
            norm = float(np.linalg.norm(vec))
            if abs(norm - 1.0) > config.NORM_ATOL:
                raise QlinError(
                    f"ket norm {norm!r} deviates from 1 by more than {config.NORM_ATOL}; "
                    "pass require_normalized=False for raw vectors"
                )
        self.amplitudes = _frozen_array(vec, vec.shape)
        self.num_qubits = k

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Ket":
        n = self.norm()
        if n < config.MIN_FORCE_PROBABILITY:
            raise QlinError("cannot normalize a (numerically) zero vector")
        return Ket(self.amplitudes / n)

    def as_tensor(self) -> np.ndarray:
        """Read-only view shaped ``(2,)*num_qubits`` with qubit i on axis i."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def __repr__(self) -> str:
        return f"Ket(num_qubits={self.num_qubits})"


class HermOp:
    """Linear operator on an ordered qubit register, stored dense.

    Flagged-Hermitian by default: ``||M - M^dag||_max <= config.HERMITIAN_ATOL``
    is enforced unless ``require_hermitian=False`` (used for general linear
    maps such as basis-change unitaries).
    """

    __slots__ = ("entries", "num_qubits", "hermitian")

    def __init__(self, entries, *, require_hermitian: bool = True):
        mat = np.asarray(entries, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise QlinError(f"operator must be square, got shape {mat.shape}")
        k = _num_qubits_for(mat.shape[0])
        if not np.all(np.isfinite(mat)):
            raise QlinError("operator entries must be finite")
        if require_hermitian:
            defect = float(np.max(np.abs(mat - mat.conj().T)))
            if defect > config.HERMITIAN_ATOL:
                raise QlinError(
                    f"operator is not Hermitian within {config.HERMITIAN_ATOL} "
                    f"(defect {defect:.3e}); pass require_hermitian=False for general maps"
                )
        self.entries = _frozen_array(mat, mat.shape)
        self.num_qubits = k
        self.hermitian = bool(require_hermitian)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def as_tensor(self) -> np.ndarray:
        """Read-only view shaped ``(2,)*2k``: row axes first, then column axes."""
        return self.entries.reshape((2,) * (2 * self.num_qubits))

    def __repr__(self) -> str:
        return f"HermOp(num_qubits={self.num_qubits}, hermitian={self.hermitian})"


# ---------------------------------------------------------------------------
# constructors and constants

def basis_ket(bits: Sequence[int]) -> Ket:
    """Computational basis state |b0 b1 ... b_{k-1}>."""
    bits = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in bits) or not bits:
        raise QlinError(f"bits must be a nonempty 0/1 sequence, got {bits}")
    idx = 0
    for b in bits:
        idx = (idx << 1) | b
    vec = np.zeros(2 ** len(bits), dtype=np.complex128)
    vec[idx] = 1.0
    return Ket(vec)


def equatorial_ket(phi: float, outcome: int = 0) -> Ket:
    """|phi^m> = (|0> + (-1)^m e^{i phi} |1>) / sqrt(2)."""
    if outcome not in (0, 1):
        raise QlinError(f"outcome must be 0 or 1, got {outcome}")
    sign = -1.0 if outcome else 1.0
    return Ket(np.array([1.0, sign * np.exp(1j * float(phi))]) / np.sqrt(2.0))


def equatorial_basis(phi: float) -> tuple[Ket, Ket]:
    return equatorial_ket(phi, 0), equatorial_ket(phi, 1)


def projector(state: Ket) -> HermOp:
    """|psi><psi| for a unit ket."""
    return HermOp(np.outer(state.amplitudes, state.amplitudes.conj()))


def identity_op(num_qubits: int) -> HermOp:
    return HermOp(np.eye(2**num_qubits))


def maximally_mixed(num_qubits: int) -> HermOp:
    return HermOp(np.eye(2**num_qubits) / 2**num_qubits)


KET0 = basis_ket([0])
KET1 = basis_ket([1])
PLUS = equatorial_ket(0.0, 0)
MINUS = equatorial_ket(0.0, 1)
COMPUTATIONAL_BASIS = (KET0, KET1)

ID2 = identity_op(1)
PAULI_X = HermOp([[0, 1], [1, 0]])
PAULI_Y = HermOp([[0, -1j], [1j, 0]])
PAULI_Z = HermOp([[1, 0], [0, -1]])
HADAMARD = HermOp(np.array([[1, 1], [1, -1]]) / np.sqrt(2.0))
CZ = HermOp(np.diag([1.0, 1.0, 1.0, -1.0]))


# ---------------------------------------------------------------------------
# register operations

def kron_all(factors: Sequence[Ket] | Sequence[HermOp]):
    """Tensor product of kets (or of operators), first factor most significant.

    Parameters
    ----------
    factors : sequence of Ket or sequence of HermOp
        Nonempty and homogeneous in type.

    Returns
    -------
    Ket or HermOp
    """
    factors = list(factors)
    if not factors:
        raise QlinError("kron_all needs at least one factor")
    if all(isinstance(f, Ket) for f in factors):
        vec = factors[0].amplitudes
        for f in factors[1:]:
            vec = np.kron(vec, f.amplitudes)
        return Ket(vec, require_normalized=False) if _norm_off(vec) else Ket(vec)
    if all(isinstance(f, HermOp) for f in factors):
        mat = factors[0].entries
        hermitian = all(f.hermitian for f in factors)
        for f in factors[1:]:
            mat = np.kron(mat, f.entries)
        return HermOp(mat, require_hermitian=hermitian)
    raise QlinError("kron_all factors must be all Ket or all HermOp")


def _norm_off(vec: np.ndarray) -> bool:
    return abs(float(np.linalg.norm(vec)) - 1.0) > config.NORM_ATOL


def _check_perm(perm: Sequence[int], k: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(k)):
        raise QlinError(f"perm must be a permutation of range({k}), got {perm}")
    return perm


def permute_qubits(obj, perm: Sequence[int]):
    """Relabel register positions: input qubit ``i`` moves to position ``perm[i]``.

    Round-trips exactly with the inverse permutation.  Works on Ket and HermOp.
    """
    if isinstance(obj, Ket):
        k = obj.num_qubits
        perm = _check_perm(perm, k)
        arr = np.moveaxis(obj.as_tensor(), range(k), perm)
        return Ket(arr.reshape(-1), require_normalized=False)
    if isinstance(obj, HermOp):
        k = obj.num_qubits
        perm = _check_perm(perm, k)
        src = list(range(2 * k))
        dst = list(perm) + [k + p for p in perm]
        arr = np.moveaxis(obj.as_tensor(), src, dst)
        return HermOp(arr.reshape(2**k, 2**k), require_hermitian=obj.hermitian)
    raise QlinError(f"cannot permute {type(obj).__name__}")


def apply_on_qubits(op: HermOp, targets: Sequence[int], state: Ket) -> Ket:
    """Apply a j-qubit operator to the listed register positions of a state.

    Parameters
    ----------
    op : HermOp
        Operator on ``len(targets)`` qubits (need not be Hermitian).
    targets : sequence of int
        Distinct register positions; ``targets[i]`` receives op qubit ``i``.
    state : Ket

    Returns
    -------
    Ket
        The transformed vector; not renormalized, so non-unitary maps are fine.
    """
    k = state.num_qubits
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise QlinError(f"targets must be distinct, got {targets}")
    if any(t < 0 or t >= k for t in targets):
        raise QlinError(f"targets {targets} out of range for {k} qubits")
    j = op.num_qubits
    if j != len(targets):
        raise QlinError(f"operator acts on {j} qubits but {len(targets)} targets given")
    op_t = op.as_tensor()
    arr = np.tensordot(op_t, state.as_tensor(), axes=(list(range(j, 2 * j)), targets))
    # tensordot left the op's row axes in front; put them back at the targets
    arr = np.moveaxis(arr, range(j), targets)
    return Ket(arr.reshape(-1), require_normalized=False)


def partial_trace(op: HermOp, discard: Iterable[int]) -> HermOp:
    """Trace out the listed register positions; kept qubits keep their relative order."""
    k = op.num_qubits
    discard = sorted({int(q) for q in discard})
    if any(q < 0 or q >= k for q in discard):
        raise QlinError(f"discard positions {discard} out of range for {k} qubits")
    keep = [q for q in range(k) if q not in discard]
    letters = string.ascii_lowercase + string.ascii_uppercase
    if 2 * k > len(letters):
        raise QlinError(f"partial_trace supports up to {len(letters) // 2} qubits")
    row = [letters[i] for i in range(k)]
    col = [row[i] if i in discard else letters[k + i] for i in range(k)]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    spec = "".join(row + col) + "->" + "".join(out)
    reduced = np.einsum(spec, op.as_tensor()).reshape(2 ** len(keep), 2 ** len(keep))
    return HermOp(reduced, require_hermitian=op.hermitian)


def min_eigenvalue(op: HermOp) -> float:
    """Smallest eigenvalue of a Hermitian operator."""
    if not op.hermitian:
        raise QlinError("min_eigenvalue requires a Hermitian-flagged operator")
    return float(np.linalg.eigvalsh(op.entries)[0])


def overlap(bra: Ket, ket: Ket) -> complex:
    """<bra|ket> for equal-size registers."""
    if bra.num_qubits != ket.num_qubits:
        raise QlinError("overlap needs equal register sizes")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def fidelity(a: Ket, b: Ket) -> float:
    """|<a|b>|^2 for unit kets."""
    return float(abs(overlap(a, b)) ** 2)


# ---------------------------------------------------------------------------
# projective measurement

@dataclass(frozen=True)
class MeasureResult:
    """One projective single-qubit measurement: outcome bit, post-state, branch weight."""

    outcome: int
    state: Ket
    probability: float


def _branch(state: Ket, basis_ket_: Ket, target: int) -> np.ndarray:
    return np.tensordot(basis_ket_.amplitudes.conj(), state.as_tensor(), axes=(0, target))


def sample_projective(
    state: Ket,
    basis: tuple[Ket, Ket],
    target: int,
    rng: np.random.Generator | None = None,
    *,
    force: int | None = None,
) -> MeasureResult:
    """Measure one qubit in a two-element orthonormal basis and contract it away.

    Parameters
    ----------
    state : Ket
        Unit ket on k qubits.
    basis : (Ket, Ket)
        Single-qubit kets for outcomes 0 and 1; orthonormal within
        ``config.BASIS_ORTHO_ATOL``.
    target : int
        Register position to measure; remaining qubits keep relative order.
    rng : numpy.random.Generator, optional
        Required unless ``force`` is given; owns all randomness.
    force : int, optional
        Postselect this outcome instead of sampling.  Forcing a branch with
        probability below ``config.MIN_FORCE_PROBABILITY`` is an error.

    Returns
    -------
    MeasureResult
        ``probability`` is the Born weight of the realized branch and the
        returned state is renormalized on the remaining k-1 qubits.
    """
    b0, b1 = basis
    if b0.num_qubits != 1 or b1.num_qubits != 1:
        raise QlinError("measurement basis kets must be single-qubit")
    tol = config.BASIS_ORTHO_ATOL
    if abs(b0.norm() - 1) > tol or abs(b1.norm() - 1) > tol or abs(overlap(b0, b1)) > tol:
        raise QlinError("measurement basis is not orthonormal within tolerance")
    if target < 0 or target >= state.num_qubits:
        raise QlinError(f"target {target} out of range for {state.num_qubits} qubits")

    branches = [_branch(state, b0, target), _branch(state, b1, target)]
    probs = [float(np.sum(np.abs(a) ** 2)) for a in branches]

    if force is not None:
        if force not in (0, 1):
            raise QlinError(f"forced outcome must be 0 or 1, got {force}")
        outcome = int(force)
        if probs[outcome] < config.MIN_FORCE_PROBABILITY:
            raise QlinError(
                f"cannot force outcome {outcome}: branch probability "
                f"{probs[outcome]:.3e} below {config.MIN_FORCE_PROBABILITY}"
            )
    else:
        if rng is None:
            raise QlinError("rng is required when no outcome is forced")
        outcome = 0 if rng.random() < probs[0] else 1

    post = branches[outcome].reshape(-1) / np.sqrt(probs[outcome])
    return MeasureResult(outcome=outcome, state=Ket(post), probability=probs[outcome])


# ---------------------------------------------------------------------------
# random states (test families and instrument sampling)

def random_ket(rng: np.random.Generator, num_qubits: int) -> Ket:
    """Haar-distributed unit ket."""
    dim = 2**num_qubits
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return Ket(vec / np.linalg.norm(vec))


def random_density(rng: np.random.Generator, num_qubits: int) -> HermOp:
    """Full-rank random density operator (normalized Ginibre product)."""
    dim = 2**num_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return HermOp(rho / np.trace(rho).real)


def random_single_qubit_basis(rng: np.random.Generator) -> tuple[Ket, Ket]:
    """Haar-random orthonormal single-qubit basis (columns of a random unitary)."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return Ket(q[:, 0]), Ket(q[:, 1])
