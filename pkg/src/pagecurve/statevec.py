"""Dense statevector engine: state construction, gate application, exact
marginals, and multinomial shot sampling.

Amplitudes are little-endian (qubit 0 = least significant bit of the basis
index) and always complex128. Gate semantics are defined purely by the
unitary action on the targeted tensor factors; the kernel below reshapes the
amplitude array to a rank-n tensor and contracts with ``tensordot``, which
hands the heavy lifting to BLAS for the wide registers the interference
protocol needs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ir import Circuit, Gate

DEFAULT_MAX_QUBITS = 26
DEFAULT_MAX_MARGINAL = 16
_BYTES_PER_AMPLITUDE = 16


class RegisterTooLargeError(ValueError):
    """Raised instead of attempting an allocation beyond the qubit cap."""


def _memory_estimate(n_qubits: int) -> str:
    gib = (_BYTES_PER_AMPLITUDE * 2 ** n_qubits) / 2 ** 30
    return f"{n_qubits} qubits need ~{gib:.2f} GiB of amplitudes"


@dataclass
class StateVector:
    """Dense state over ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError(
                f"amplitude array has shape {self.amplitudes.shape}, "
                f"expected ({2 ** self.n_qubits},)")

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class ShotTable:
    """Counts of measured bitstrings over an ordered qubit list.

    Key convention: the string is the marginal outcome index in binary,
    most significant bit first, so ``key[-1]`` is ``measured_qubits[0]``.
    """

    measured_qubits: tuple[int, ...]
    counts: dict[str, int]
    total: int

    def __post_init__(self):
        self.measured_qubits = tuple(int(q) for q in self.measured_qubits)
        width = len(self.measured_qubits)
        for key, c in self.counts.items():
            if len(key) != width or set(key) - {"0", "1"}:
                raise ValueError(f"malformed bitstring key {key!r}")
            if c < 0:
                raise ValueError(f"negative count for {key!r}")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    def frequencies(self) -> np.ndarray:
        """Dense empirical probability vector of length 2^L."""
        freq = np.zeros(2 ** len(self.measured_qubits))
        for key, c in self.counts.items():
            freq[int(key, 2)] = c / self.total
        return freq


def init_state(n_qubits: int, basis_index: int = 0, *,
               max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Computational basis state |basis_index> on ``n_qubits`` qubits."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if n_qubits > max_qubits:
        raise RegisterTooLargeError(
            f"register of {n_qubits} qubits exceeds the cap of {max_qubits} "
            f"({_memory_estimate(n_qubits)})")
    if not 0 <= basis_index < 2 ** n_qubits:
        raise ValueError(
            f"basis index {basis_index} out of range for {n_qubits} qubits")
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(n_qubits, amps)


def _apply_matrix(amps: np.ndarray, n_qubits: int, matrix: np.ndarray,
                  targets: tuple[int, ...]) -> np.ndarray:
    """Contract a 2^k unitary into the amplitude tensor. Returns a new array."""
    k = len(targets)
    # qubit q lives on axis n-1-q of the (2,)*n view; targets[0] is the
    # gate's most significant bit, i.e. the first gate axis.
    axes = [n_qubits - 1 - q for q in targets]
    tensor = amps.reshape((2,) * n_qubits)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return np.ascontiguousarray(out).reshape(-1)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate in place (the amplitude buffer is replaced)."""
    if max(gate.targets) >= state.n_qubits:
        raise ValueError(
            f"gate targets {gate.targets} exceed register "
            f"size {state.n_qubits}")
    state.amplitudes = _apply_matrix(
        state.amplitudes, state.n_qubits, gate.unitary(), gate.targets)
    return state


def run_circuit(circuit: Circuit, state: StateVector | None = None, *,
                max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Run a circuit from |0...0> (or from the given state)."""
    if state is None:
        state = init_state(circuit.n_qubits, max_qubits=max_qubits)
    elif state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, circuit wants "
            f"{circuit.n_qubits}")
    for gate in circuit.gates:
        apply_gate(state, gate)
    return state


def _check_subsystem(subsystem, n_qubits: int) -> tuple[int, ...]:
    sub = tuple(int(q) for q in subsystem)
    if len(set(sub)) != len(sub):
        raise ValueError(f"duplicate qubits in subsystem {sub}")
    if any(not 0 <= q < n_qubits for q in sub):
        raise ValueError(f"subsystem {sub} out of range for {n_qubits} qubits")
    return sub


def marginal_probs(state: StateVector, subsystem, *,
                   max_subsystem: int = DEFAULT_MAX_MARGINAL) -> np.ndarray:
    """Exact outcome distribution over the subsystem.

    Entry ``j`` is the total probability of basis states whose restriction
    to the subsystem equals ``j``, with bit ``k`` of ``j`` taken from
    ``subsystem[k]``.
    """
    sub = _check_subsystem(subsystem, state.n_qubits)
    if len(sub) > max_subsystem:
        raise ValueError(
            f"marginal over {len(sub)} qubits exceeds the cap of "
            f"{max_subsystem}")
    amps = state.amplitudes
    probs = (amps.real ** 2 + amps.imag ** 2).reshape((2,) * state.n_qubits)
    front = [state.n_qubits - 1 - q for q in reversed(sub)]
    rest = [ax for ax in range(state.n_qubits) if ax not in front]
    ordered = probs.transpose(front + rest).reshape(2 ** len(sub), -1)
    return ordered.sum(axis=1)


def sample_shots(state: StateVector, subsystem, shots: int,
                 rng: np.random.Generator) -> ShotTable:
    """Multinomial draw from the exact subsystem marginal."""
    if shots < 1:
        raise ValueError("shots must be positive")
    sub = _check_subsystem(subsystem, state.n_qubits)
    probs = marginal_probs(state, sub)
    # guard against rounding drift before the multinomial draw
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    draws = rng.multinomial(shots, probs)
    width = len(sub)
    counts = {format(i, f"0{width}b"): int(c)
              for i, c in enumerate(draws) if c > 0}
    return ShotTable(sub, counts, shots)
