"""Circuit intermediate representation: gates, circuits, coupling maps, and
lossless JSON serialization.

Conventions
-----------
Statevectors are little-endian: qubit 0 is the least significant bit of the
basis index. Gate matrices use the textbook ordering instead: ``targets[0]``
is the most significant bit of the gate's own 2^k index, so ``cnot`` with
targets ``(control, target)`` is the familiar
``[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]`` and ``cswap`` with targets
``(control, a, b)`` is the 8x8 Fredkin permutation. The engine in
:mod:`pagecurve.statevec` reconciles the two conventions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

_SQRT2 = np.sqrt(2.0)

_MATRICES = {
    "h": np.array([[1, 1], [1, -1]], dtype=np.complex128) / _SQRT2,
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "sx": np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=np.complex128) / 2,
    "sxdg": np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]], dtype=np.complex128) / 2,
    "cnot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        dtype=np.complex128,
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(np.complex128),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
        dtype=np.complex128,
    ),
}

# Fredkin: swap the two low bits when the high (control) bit is set.
_cswap = np.eye(8, dtype=np.complex128)
_cswap[[5, 6]] = _cswap[[6, 5]]
_MATRICES["cswap"] = _cswap

GATE_ARITY = {
    "h": 1, "x": 1, "sx": 1, "sxdg": 1, "rz": 1,
    "cnot": 2, "cz": 2, "swap": 2, "cswap": 3,
    "raw1q": 1, "raw2q": 2, "raw3q": 3,
}

_RAW_KINDS = {"raw1q", "raw2q", "raw3q"}

UNITARY_ATOL = 1e-10


def is_unitary(matrix: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    """Max-elementwise check of U†U = I."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    dev = matrix.conj().T @ matrix - np.eye(matrix.shape[0])
    return bool(np.max(np.abs(dev)) <= atol)


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate: a named kind or a raw unitary, on an ordered target tuple."""

    kind: str
    targets: tuple[int, ...]
    param: float | None = None
    matrix: np.ndarray | None = None
    layer_tag: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        arity = GATE_ARITY[self.kind]
        if len(targets) != arity:
            raise ValueError(
                f"{self.kind} takes {arity} target(s), got {len(targets)}")
        if len(set(targets)) != arity:
            raise ValueError(f"duplicate targets {targets}")
        if any(t < 0 for t in targets):
            raise ValueError(f"negative target in {targets}")
        if self.kind == "rz":
            if self.param is None:
                raise ValueError("rz requires a rotation angle")
            object.__setattr__(self, "param", float(self.param))
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no parameter")
        if self.kind in _RAW_KINDS:
            if self.matrix is None:
                raise ValueError(f"{self.kind} requires a matrix")
            mat = np.array(self.matrix, dtype=np.complex128)
            mat.setflags(write=False)
            if mat.shape != (2 ** arity, 2 ** arity):
                raise ValueError(
                    f"{self.kind} matrix must be {2 ** arity}x{2 ** arity}")
            if not is_unitary(mat):
                raise ValueError(f"{self.kind} matrix is not unitary")
            object.__setattr__(self, "matrix", mat)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} takes no matrix")

    @property
    def arity(self) -> int:
        return GATE_ARITY[self.kind]

    def unitary(self) -> np.ndarray:
        """Dense 2^k x 2^k matrix, targets[0] as the most significant bit."""
        if self.kind in _RAW_KINDS:
            return self.matrix
        if self.kind == "rz":
            half = 0.5j * self.param
            return np.diag([np.exp(-half), np.exp(half)])
        return _MATRICES[self.kind]

    def remapped(self, mapping: dict[int, int]) -> "Gate":
        """Same gate on relabelled qubits."""
        return Gate(self.kind, tuple(mapping[t] for t in self.targets),
                    param=self.param, matrix=self.matrix,
                    layer_tag=self.layer_tag)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.targets, self.param, self.layer_tag) != (
                other.kind, other.targets, other.param, other.layer_tag):
            return False
        if (self.matrix is None) != (other.matrix is None):
            return False
        return self.matrix is None or np.array_equal(self.matrix, other.matrix)


@dataclass(eq=False)
class Circuit:
    """Ordered gate sequence on a fixed-width register."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gates = tuple(self.gates)
        for g in self.gates:
            if max(g.targets) >= self.n_qubits:
                raise ValueError(
                    f"gate targets {g.targets} exceed register "
                    f"size {self.n_qubits}")

    def __len__(self) -> int:
        return len(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.n_qubits == other.n_qubits
                and self.metadata == other.metadata
                and len(self.gates) == len(other.gates)
                and all(a == b for a, b in zip(self.gates, other.gates)))

    def extended(self, gates, **metadata) -> "Circuit":
        """New circuit with gates appended and metadata keys merged."""
        return Circuit(self.n_qubits, self.gates + tuple(gates),
                       {**self.metadata, **metadata})


@dataclass(frozen=True)
class CouplingMap:
    """Undirected qubit connectivity as a set of index pairs."""

    adjacency: frozenset

    def __post_init__(self):
        pairs = frozenset(
            (min(a, b), max(a, b)) for a, b in self.adjacency)
        if any(a == b for a, b in pairs):
            raise ValueError("self-loop in coupling map")
        object.__setattr__(self, "adjacency", pairs)

    @classmethod
    def linear_chain(cls, n_qubits: int) -> "CouplingMap":
        return cls(frozenset((i, i + 1) for i in range(n_qubits - 1)))

    def connected(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.adjacency

    def is_connected_over(self, qubits) -> bool:
        """True if the used qubits form one connected component."""
        qubits = set(qubits)
        if len(qubits) <= 1:
            return True
        seen = {next(iter(qubits))}
        frontier = list(seen)
        while frontier:
            q = frontier.pop()
            for a, b in self.adjacency:
                for u, v in ((a, b), (b, a)):
                    if u == q and v in qubits and v not in seen:
                        seen.add(v)
                        frontier.append(v)
        return seen == qubits


def _matrix_to_pairs(matrix: np.ndarray) -> list:
    flat = np.asarray(matrix).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


def _matrix_from_pairs(pairs, dim: int) -> np.ndarray:
    if len(pairs) != dim * dim:
        raise ValueError(f"matrix payload has {len(pairs)} entries, "
                         f"expected {dim * dim}")
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(dim, dim)


def circuit_to_json(circuit: Circuit) -> str:
    """Serialize to the documented JSON schema (lossless at double precision)."""
    gates = []
    for g in circuit.gates:
        entry: dict = {"kind": g.kind, "targets": list(g.targets)}
        if g.param is not None:
            entry["params"] = [g.param]
        if g.matrix is not None:
            entry["matrix"] = _matrix_to_pairs(g.matrix)
        if g.layer_tag is not None:
            entry["layer_tag"] = g.layer_tag
        gates.append(entry)
    doc = {"n_qubits": circuit.n_qubits, "gates": gates,
           "metadata": circuit.metadata}
    return json.dumps(doc)


def circuit_from_json(text: str) -> Circuit:
    doc = json.loads(text)
    gates = []
    for entry in doc["gates"]:
        kind = entry["kind"]
        param = entry.get("params", [None])[0]
        matrix = None
        if "matrix" in entry:
            matrix = _matrix_from_pairs(
                entry["matrix"], 2 ** GATE_ARITY.get(kind, 0))
        gates.append(Gate(kind, tuple(entry["targets"]), param=param,
                          matrix=matrix, layer_tag=entry.get("layer_tag")))
    return Circuit(doc["n_qubits"], tuple(gates), doc.get("metadata", {}))
