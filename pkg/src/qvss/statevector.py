"""Dense statevector simulation of small qubit registers.

Conventions used throughout the package:

* Qubit indices are 1-based and big-endian: qubit 1 is the leftmost bit of
  a printed bitstring and the most significant bit of a basis index, so the
  bitstring ``x1 x2 ... xn`` maps to the integer ``x1*2^(n-1) + ... + xn``.
* A measured outcome is a plain tuple of 0/1 ints; entry ``j-1`` holds
  qubit j's bit (participant j's result).
* All operations are functional: they return a new ``StateVector`` and
  never mutate their input, so distinct registers are safe to process from
  concurrent workers.

Gates act by pairwise amplitude updates (or index gathers for the
controlled gates) rather than by building 2^n x 2^n matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StateCorruptionError

#: Hard per-register size cap; each pixel gets its own register so memory
#: stays trivial well below this.
MAX_QUBITS = 16

#: Tolerance for analytic normalization checks.
NORM_TOL = 1e-12

#: Looser runtime guard applied before sampling from a state.
NORM_GUARD = 1e-9

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass
class StateVector:
    """An n-qubit register as 2^n complex amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> StateVector:
        return StateVector(self.num_qubits, self.amplitudes.copy())

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits


@dataclass
class MarginalDistribution:
    """Exact probabilities of the bit patterns on an ordered qubit subset."""

    subset: tuple[int, ...]
    probabilities: np.ndarray


def new_zero_state(n: int) -> StateVector:
    """Return |0...0> on n qubits.  n must lie in 1..MAX_QUBITS."""
    if not isinstance(n, int) or n < 1 or n > MAX_QUBITS:
        raise ValueError(f"register size must be in 1..{MAX_QUBITS}, got {n!r}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def _check_qubit(state: StateVector, q: int) -> None:
    if not isinstance(q, int) or q < 1 or q > state.num_qubits:
        raise IndexError(
            f"qubit index {q!r} out of range for {state.num_qubits}-qubit register"
        )


def _bit_mask(state: StateVector, q: int) -> int:
    # Qubit 1 is the most significant bit.
    return 1 << (state.num_qubits - q)


def _apply_single(
    state: StateVector, q: int, m00: complex, m01: complex, m10: complex, m11: complex
) -> StateVector:
    _check_qubit(state, q)
    n = state.num_qubits
    a = state.amplitudes.reshape(1 << (q - 1), 2, 1 << (n - q))
    a0 = a[:, 0, :]
    a1 = a[:, 1, :]
    out = np.empty_like(a)
    out[:, 0, :] = m00 * a0 + m01 * a1
    out[:, 1, :] = m10 * a0 + m11 * a1
    return StateVector(n, out.reshape(-1))


def apply_h(state: StateVector, q: int) -> StateVector:
    """Apply the Hadamard matrix [[1,1],[1,-1]]/sqrt(2) to qubit q."""
    return _apply_single(state, q, _SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF)


def apply_x(state: StateVector, q: int) -> StateVector:
    """Apply the bit-flip matrix [[0,1],[1,0]] to qubit q."""
    return _apply_single(state, q, 0.0, 1.0, 1.0, 0.0)


def apply_z(state: StateVector, q: int) -> StateVector:
    """Apply the phase-flip matrix [[1,0],[0,-1]] to qubit q."""
    return _apply_single(state, q, 1.0, 0.0, 0.0, -1.0)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip the target bit on every basis state whose control bit is 1."""
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must be distinct qubits")
    idx = np.arange(state.dim)
    cmask = _bit_mask(state, control)
    tmask = _bit_mask(state, target)
    src = np.where(idx & cmask, idx ^ tmask, idx)
    return StateVector(state.num_qubits, state.amplitudes[src])


def apply_toffoli(state: StateVector, c1: int, c2: int, target: int) -> StateVector:
    """Flip the target bit iff both control bits are 1."""
    for q in (c1, c2, target):
        _check_qubit(state, q)
    if len({c1, c2, target}) != 3:
        raise ValueError("control and target qubits must be pairwise distinct")
    idx = np.arange(state.dim)
    m1 = _bit_mask(state, c1)
    m2 = _bit_mask(state, c2)
    tmask = _bit_mask(state, target)
    both = (idx & m1).astype(bool) & (idx & m2).astype(bool)
    src = np.where(both, idx ^ tmask, idx)
    return StateVector(state.num_qubits, state.amplitudes[src])


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    """Big-endian bit tuple of a basis index: entry 0 is qubit 1."""
    return tuple((index >> (n - j)) & 1 for j in range(1, n + 1))


def bits_to_index(bits) -> int:
    """Inverse of :func:`index_to_bits`."""
    index = 0
    for b in bits:
        index = (index << 1) | (b & 1)
    return index


def _checked_probabilities(state: StateVector) -> np.ndarray:
    probs = np.abs(state.amplitudes) ** 2
    total = float(probs.sum())
    if abs(total - 1.0) > NORM_GUARD:
        raise StateCorruptionError(
            f"register norm deviates from 1 by {abs(total - 1.0):.3e}"
        )
    return probs / total


def measure_all(
    state: StateVector, rng: np.random.Generator
) -> tuple[tuple[int, ...], StateVector]:
    """Draw one computational-basis outcome and collapse the register.

    The outcome index is sampled with probability |amplitude|^2; the
    returned state is the matching basis state.
    """
    probs = _checked_probabilities(state)
    index = int(rng.choice(state.dim, p=probs))
    collapsed = np.zeros_like(state.amplitudes)
    collapsed[index] = 1.0
    return index_to_bits(index, state.num_qubits), StateVector(
        state.num_qubits, collapsed
    )


def measure_shots(
    state: StateVector, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample `shots` independent outcomes; returns counts per basis index.

    Models repeated preparation and measurement of the same state, so the
    register is not collapsed.
    """
    if shots < 1:
        raise ValueError(f"shot count must be positive, got {shots}")
    probs = _checked_probabilities(state)
    draws = rng.choice(state.dim, size=shots, p=probs)
    return np.bincount(draws, minlength=state.dim)


def probability_of(state: StateVector, bits) -> float:
    """Probability of measuring the given bit tuple."""
    bits = tuple(bits)
    if len(bits) != state.num_qubits:
        raise ValueError(
            f"expected {state.num_qubits} bits, got {len(bits)}"
        )
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be 0 or 1, got {bits!r}")
    return float(abs(state.amplitudes[bits_to_index(bits)]) ** 2)


def _check_subset(state: StateVector, subset) -> tuple[int, ...]:
    subset = tuple(subset)
    if not subset:
        raise ValueError("qubit subset must be non-empty")
    if len(set(subset)) != len(subset):
        raise ValueError(f"qubit subset contains duplicates: {subset!r}")
    for q in subset:
        if not isinstance(q, int) or q < 1 or q > state.num_qubits:
            raise ValueError(
                f"qubit {q!r} out of range for {state.num_qubits}-qubit register"
            )
    return subset


def marginal_distribution(state: StateVector, subset) -> MarginalDistribution:
    """Exact distribution over the subset's bit patterns.

    Sums squared amplitude moduli over all traced-out qubits.  Pattern
    indices follow the subset's own order: the first listed qubit is the
    most significant pattern bit.
    """
    subset = _check_subset(state, subset)
    n = state.num_qubits
    idx = np.arange(state.dim)
    pattern = np.zeros(state.dim, dtype=np.int64)
    for q in subset:
        pattern = (pattern << 1) | ((idx >> (n - q)) & 1)
    probs = np.abs(state.amplitudes) ** 2
    marg = np.bincount(pattern, weights=probs, minlength=1 << len(subset))
    return MarginalDistribution(subset, marg)
