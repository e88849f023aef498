"""CNOT-only circuit model, JSON file format and circuit-family generators.

Qubit and window indices are 1-based, matching the ``Q_k[t]`` labels used
throughout the package.  A circuit is a plain value; :func:`validate` reports
problems instead of the constructor raising, so malformed circuits can still
be inspected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "CircuitError",
    "Gate",
    "Circuit",
    "NoiseModel",
    "validate",
    "check",
    "parse_circuit",
    "serialize_circuit",
    "gen_empty",
    "gen_cnot_pair",
    "gen_staircase_transversal",
    "gen_parallel_transversal",
    "gen_random_global",
    "gen_random_local",
    "generate",
    "FAMILIES",
]

SEED_MAX = 2**64 - 1


class CircuitError(ValueError):
    """Raised for malformed circuit documents or invariant violations."""

    def __init__(self, message: str, problems: list[str] | None = None):
        super().__init__(message)
        self.problems = problems or [message]


@dataclass(frozen=True)
class Gate:
    control: int
    target: int
    window: int

    def __str__(self) -> str:
        return f"CNOT({self.control},{self.target})@{self.window}"


@dataclass(frozen=True)
class Circuit:
    n: int
    T: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        # accept any iterable of gates but store a tuple so circuits hash/compare
        object.__setattr__(self, "gates", tuple(self.gates))

    def window(self, t: int) -> tuple[Gate, ...]:
        """Gates of window ``t`` in application order."""
        return tuple(g for g in self.gates if g.window == t)

    def windows(self) -> list[tuple[Gate, ...]]:
        buckets: list[list[Gate]] = [[] for _ in range(self.T)]
        for g in self.gates:
            buckets[g.window - 1].append(g)
        return [tuple(b) for b in buckets]

    @property
    def num_sites(self) -> int:
        return self.n * self.T


@dataclass(frozen=True)
class NoiseModel:
    """Independent bit flip with probability ``p`` per qubit per window."""

    p: float = field(default=0.0)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"bit-flip probability must lie in [0, 1], got {self.p}")


def validate(circuit: Circuit) -> list[str]:
    """Return a list of invariant violations (empty when the circuit is valid).

    Several gates touching one qubit inside a window are allowed; they act in
    list order.
    """
    problems = []
    if not isinstance(circuit.n, int) or circuit.n < 1:
        problems.append(f"n must be a positive integer, got {circuit.n!r}")
    if not isinstance(circuit.T, int) or circuit.T < 1:
        problems.append(f"T must be a positive integer, got {circuit.T!r}")
    if problems:
        return problems
    last_window = 1
    for i, g in enumerate(circuit.gates):
        if not 1 <= g.control <= circuit.n:
            problems.append(f"gate {i}: control {g.control} outside 1..{circuit.n}")
        if not 1 <= g.target <= circuit.n:
            problems.append(f"gate {i}: target {g.target} outside 1..{circuit.n}")
        if g.control == g.target:
            problems.append(f"gate {i}: control equals target ({g.control})")
        if not 1 <= g.window <= circuit.T:
            problems.append(f"gate {i}: window {g.window} outside 1..{circuit.T}")
        elif g.window < last_window:
            problems.append(f"gate {i}: window {g.window} precedes window {last_window} of an earlier gate")
        else:
            last_window = g.window
    return problems


def check(circuit: Circuit) -> Circuit:
    problems = validate(circuit)
    if problems:
        raise CircuitError("; ".join(problems), problems)
    return circuit


_TOP_KEYS = {"n", "T", "gates"}
_GATE_KEYS = {"t", "c", "x"}


def _require_int(value: Any, what: str) -> int:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, int):
        raise CircuitError(f"{what} must be an integer, got {value!r}")
    return value


def parse_circuit(text: str | bytes) -> Circuit:
    """Parse and validate a circuit document.

    Format: ``{"n": int, "T": int, "gates": [{"t": int, "c": int, "x": int}]}``
    where ``c`` is the control and ``x`` the target.  Unknown keys are rejected.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"malformed circuit document: {exc}") from exc
    if not isinstance(doc, dict):
        raise CircuitError("circuit document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise CircuitError(f"unknown fields: {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise CircuitError(f"missing fields: {sorted(missing)}")
    n = _require_int(doc["n"], "n")
    T = _require_int(doc["T"], "T")
    if not isinstance(doc["gates"], list):
        raise CircuitError("gates must be a list")
    gates = []
    for i, entry in enumerate(doc["gates"]):
        if not isinstance(entry, dict):
            raise CircuitError(f"gate {i} must be an object")
        if set(entry) != _GATE_KEYS:
            raise CircuitError(f"gate {i} must have exactly the fields t, c, x; got {sorted(entry)}")
        gates.append(
            Gate(
                control=_require_int(entry["c"], f"gate {i} c"),
                target=_require_int(entry["x"], f"gate {i} x"),
                window=_require_int(entry["t"], f"gate {i} t"),
            )
        )
    return check(Circuit(n, T, tuple(gates)))


def serialize_circuit(circuit: Circuit, indent: int | None = None) -> str:
    doc = {
        "n": circuit.n,
        "T": circuit.T,
        "gates": [{"t": g.window, "c": g.control, "x": g.target} for g in circuit.gates],
    }
    return json.dumps(doc, indent=indent)


# -- generators ---------------------------------------------------------------


def gen_empty(n: int, T: int) -> Circuit:
    if n < 1 or T < 1:
        raise CircuitError(f"need n >= 1 and T >= 1, got n={n}, T={T}")
    return Circuit(n, T, ())


def gen_cnot_pair(T: int = 2) -> Circuit:
    """Two qubits, a single CNOT(1,2) in window 1."""
    return check(Circuit(2, T, (Gate(1, 2, 1),)))


def _half(n: int) -> int:
    if n < 2 or n % 2:
        raise CircuitError(f"transversal circuits need an even n >= 2, got {n}")
    return n // 2


def gen_staircase_transversal(n: int) -> Circuit:
    """CNOT(k, k+r) in window k for k = 1..r, with r = n/2 and T = r + 1."""
    r = _half(n)
    return Circuit(n, r + 1, tuple(Gate(k, k + r, k) for k in range(1, r + 1)))


def gen_parallel_transversal(n: int) -> Circuit:
    """All r = n/2 gates CNOT(k, k+r) in window 1, T = 2."""
    r = _half(n)
    return Circuit(n, 2, tuple(Gate(k, k + r, 1) for k in range(1, r + 1)))


def _rng(seed: int) -> np.random.Generator:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed <= SEED_MAX:
        raise CircuitError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _draw_pairs(rng: np.random.Generator, n: int, k: int) -> list[tuple[int, int]]:
    # 2k distinct qubits; consecutive entries form ordered (control, target) pairs
    picked = rng.choice(n, size=2 * k, replace=False) + 1
    return [(int(picked[2 * i]), int(picked[2 * i + 1])) for i in range(k)]


def _check_random_args(n: int, T: int, k: int) -> None:
    if n < 1 or T < 1 or k < 0:
        raise CircuitError(f"need n >= 1, T >= 1, k >= 0; got n={n}, T={T}, k={k}")
    if 2 * k > n:
        raise CircuitError(f"cannot place {k} disjoint pairs on {n} qubits")


def gen_random_global(n: int, T: int, k: int, seed: int) -> Circuit:
    """Every window gets ``k`` CNOTs on freshly sampled, pairwise disjoint qubit pairs."""
    _check_random_args(n, T, k)
    rng = _rng(seed)
    gates = []
    for t in range(1, T + 1):
        gates.extend(Gate(c, x, t) for c, x in _draw_pairs(rng, n, k))
    return Circuit(n, T, tuple(gates))


def gen_random_local(n: int, T: int, k: int, seed: int) -> Circuit:
    """One pair set sampled once (same draw as window 1 of the global variant), repeated each window."""
    _check_random_args(n, T, k)
    pairs = _draw_pairs(_rng(seed), n, k)
    return Circuit(n, T, tuple(Gate(c, x, t) for t in range(1, T + 1) for c, x in pairs))


FAMILIES = {
    "empty": (gen_empty, ("n", "T")),
    "cnot-pair": (gen_cnot_pair, ("T",)),
    "staircase": (gen_staircase_transversal, ("n",)),
    "parallel": (gen_parallel_transversal, ("n",)),
    "random-global": (gen_random_global, ("n", "T", "k", "seed")),
    "random-local": (gen_random_local, ("n", "T", "k", "seed")),
}

_DEFAULTS = {"cnot-pair": {"T": 2}}


def generate(kind: str, **params: int) -> Circuit:
    """Build a circuit of a named family from keyword parameters."""
    try:
        fn, names = FAMILIES[kind]
    except KeyError:
        raise CircuitError(f"unknown circuit family {kind!r}; choose from {sorted(FAMILIES)}") from None
    params = {**_DEFAULTS.get(kind, {}), **params}
    extra = set(params) - set(names)
    if extra:
        raise CircuitError(f"family {kind!r} does not take {sorted(extra)}")
    missing = [name for name in names if name not in params]
    if missing:
        raise CircuitError(f"family {kind!r} needs {missing}")
    return fn(**{name: int(params[name]) for name in names})
