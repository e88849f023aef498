"""Pauli frames under H, phase and CNOT conjugation, signs discarded.

A frame stores one X bit and one Z bit per qubit as Python-int bitmasks
(bit ``q - 1`` for qubit ``q``).  I, X, Z, Y are (0,0), (1,0), (0,1), (1,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .circuit import Circuit, check

__all__ = ["PauliFrame", "conj_h", "conj_phase", "conj_cnot", "propagate_frame", "LABELS"]

LABELS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in LABELS.items()}


@dataclass(frozen=True)
class PauliFrame:
    n: int
    x: int = 0
    z: int = 0

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(n)

    @classmethod
    def from_string(cls, s: str) -> "PauliFrame":
        """``"XIZ"`` puts X on qubit 1 and Z on qubit 3."""
        x = z = 0
        for i, ch in enumerate(s.upper()):
            try:
                xb, zb = _BITS[ch]
            except KeyError:
                raise ValueError(f"not a Pauli label: {ch!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(s), x, z)

    def label(self, q: int) -> str:
        self._check(q)
        return LABELS[((self.x >> (q - 1)) & 1, (self.z >> (q - 1)) & 1)]

    def __str__(self) -> str:
        return "".join(self.label(q) for q in range(1, self.n + 1))

    def x_bits(self) -> list[int]:
        return [(self.x >> i) & 1 for i in range(self.n)]

    def z_bits(self) -> list[int]:
        return [(self.z >> i) & 1 for i in range(self.n)]

    def _check(self, q: int) -> None:
        if not 1 <= q <= self.n:
            raise IndexError(f"qubit {q} outside 1..{self.n}")

    def apply(self, q: int, pauli: str) -> "PauliFrame":
        """Multiply a single-qubit Pauli onto qubit ``q`` (phases dropped)."""
        self._check(q)
        try:
            xb, zb = _BITS[pauli.upper()]
        except KeyError:
            raise ValueError(f"not a Pauli label: {pauli!r}") from None
        return PauliFrame(self.n, self.x ^ (xb << (q - 1)), self.z ^ (zb << (q - 1)))


def conj_h(frame: PauliFrame, q: int) -> PauliFrame:
    frame._check(q)
    m = 1 << (q - 1)
    xb, zb = frame.x & m, frame.z & m
    return PauliFrame(frame.n, (frame.x & ~m) | zb, (frame.z & ~m) | xb)


def conj_phase(frame: PauliFrame, q: int) -> PauliFrame:
    # X -> Y, Y -> X, Z -> Z: the Z bit picks up the X bit
    frame._check(q)
    m = 1 << (q - 1)
    return PauliFrame(frame.n, frame.x, frame.z ^ (frame.x & m))


def conj_cnot(frame: PauliFrame, c: int, x: int) -> PauliFrame:
    frame._check(c)
    frame._check(x)
    if c == x:
        raise ValueError(f"CNOT control equals target ({c})")
    xs, zs = frame.x, frame.z
    if (xs >> (c - 1)) & 1:
        xs ^= 1 << (x - 1)
    if (zs >> (x - 1)) & 1:
        zs ^= 1 << (c - 1)
    return PauliFrame(frame.n, xs, zs)


def propagate_frame(
    circuit: Circuit, injections: Iterable[tuple[tuple[int, int], str]] = ()
) -> PauliFrame:
    """Frame at readout after injecting Paulis at window starts and conjugating through every gate.

    ``injections`` holds ``((qubit, window), label)`` pairs.
    """
    check(circuit)
    by_window: dict[int, list[tuple[int, str]]] = {}
    for (q, t), pauli in injections:
        if not (1 <= q <= circuit.n and 1 <= t <= circuit.T):
            raise ValueError(f"site ({q}, {t}) outside n={circuit.n}, T={circuit.T}")
        by_window.setdefault(t, []).append((q, pauli))
    frame = PauliFrame.identity(circuit.n)
    for t, gates in enumerate(circuit.windows(), start=1):
        for q, pauli in by_window.get(t, ()):
            frame = frame.apply(q, pauli)
        for g in gates:
            frame = conj_cnot(frame, g.control, g.target)
    return frame
