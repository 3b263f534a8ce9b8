"""Random unitary sources and hierarchical seeding.

All samplers draw from the circular unitary ensemble (Haar measure) via the
complex-Ginibre + QR construction with the triangular factor's diagonal
phases normalized out; that prescription, not any particular BLAS path, is
what makes the distribution exactly Haar.

Seeding: a :class:`KeyedStream` derives independent substreams from a master
seed through ``numpy.random.SeedSequence`` keyed by integer tuples, so a
(realization, layer, gate) or (realization, unitary) draw never depends on
execution order or thread count. Namespace constants keep different
consumers (brickwall bonds, measurement unitaries, shot noise, noise
trajectories) on disjoint key prefixes.
"""
from __future__ import annotations

import numpy as np

GLOBAL_HAAR_MAX_QUBITS = 12

# substream namespaces; first key component after the caller's own keys
NS_BRICKWALL = 0
NS_RM = 1
NS_SHOTS = 2
NS_NOISE = 3
NS_HAAR_STATE = 4


class KeyedStream:
    """A node in a deterministic tree of random substreams."""

    __slots__ = ("_entropy",)

    def __init__(self, master_seed: int):
        self._entropy = (int(master_seed),)

    @classmethod
    def _from_entropy(cls, entropy: tuple[int, ...]) -> "KeyedStream":
        obj = cls.__new__(cls)
        obj._entropy = entropy
        return obj

    @property
    def key(self) -> tuple[int, ...]:
        return self._entropy

    def child(self, *key: int) -> "KeyedStream":
        if not key:
            raise ValueError("child key must not be empty")
        if any(int(k) < 0 for k in key):
            raise ValueError("child keys must be nonnegative integers")
        return KeyedStream._from_entropy(
            self._entropy + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(list(self._entropy)))

    def __repr__(self):
        return f"KeyedStream{self._entropy}"


def as_stream(rng) -> KeyedStream:
    """Coerce an int seed or KeyedStream into a KeyedStream."""
    if isinstance(rng, KeyedStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return KeyedStream(int(rng))
    raise TypeError(
        f"expected an integer seed or KeyedStream, got {type(rng).__name__}")


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed, KeyedStream, or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, KeyedStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    raise TypeError(f"cannot make a Generator from {type(rng).__name__}")


def sample_cue(dim: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitaries on U(dim); shape (dim, dim) or (size, dim, dim)."""
    gen = as_generator(rng)
    shape = (dim, dim) if size is None else (size, dim, dim)
    z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))
    z /= np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (diag / np.abs(diag))[..., None, :]
    return q


def sample_cue_1q(rng, size: int | None = None) -> np.ndarray:
    """CUE-distributed 2x2 unitaries."""
    return sample_cue(2, rng, size=size)


def sample_haar_su4(rng, size: int | None = None) -> np.ndarray:
    """Haar samples on U(4) rescaled by det^(-1/4) into SU(4)."""
    u = sample_cue(4, rng, size=size)
    det = np.linalg.det(u)
    if size is None:
        return u * det ** -0.25
    return u * det[:, None, None] ** -0.25


def sample_haar_global(n_qubits: int, rng) -> np.ndarray:
    """Haar sample on U(2^n); dense, capped at 12 qubits."""
    if n_qubits > GLOBAL_HAAR_MAX_QUBITS:
        raise ValueError(
            f"global Haar sampling capped at {GLOBAL_HAAR_MAX_QUBITS} qubits "
            f"(a dense 2^{n_qubits} square matrix)")
    return sample_cue(2 ** n_qubits, rng)


def sample_haar_state(n_qubits: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-random pure state(s) of n qubits, as amplitude vectors.

    Identical in distribution to applying ``sample_haar_global`` to |0...0>
    (the first column of a Haar unitary is a uniformly random unit vector),
    but costs O(2^n) instead of a dense QR, which is what makes the
    saturation baselines cheap at n = 12.
    """
    gen = as_generator(rng)
    shape = (2 ** n_qubits,) if size is None else (size, 2 ** n_qubits)
    v = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return v
