"""Space-time propagation graph (EPSTG) and readout-source graph (RSG).

An error injected on qubit ``q`` at the start of window ``t`` is the source
site ``Q_q[t]``.  Window ``t`` carries it forward through the window's gates
to the start of window ``t + 1``; after window ``T`` the qubits are read out
(readout node ``R_q``).  The RSG is stored as an ``n x nT`` 0/1 matrix whose
column for site ``(q, t)`` is ``(t - 1) * n + (q - 1)`` (window-major).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, check
from .gf2 import BitMatrix

__all__ = [
    "Epstg",
    "Rsg",
    "Component",
    "build_epstg",
    "build_rsg",
    "rsg_of",
    "components",
    "gen_complete_rsg",
    "export_graph",
    "site_name",
    "MODES",
]

MODES = ("parity", "path")


def site_name(q: int, t: int) -> str:
    return f"Q{q}[{t}]"


def _apply_gate_right(S: np.ndarray, c: int, x: int, boolean: bool) -> None:
    # S <- S * CNOT(c, x): the control column picks up the target column
    if boolean:
        S[:, c] |= S[:, x]
    else:
        S[:, c] ^= S[:, x]


def _window_product(n: int, gates, boolean: bool) -> np.ndarray:
    """Transfer matrix G_k ... G_1 of one window (boolean reachability if requested)."""
    A = np.eye(n, dtype=np.uint8)
    for g in reversed(gates):
        _apply_gate_right(A, g.control - 1, g.target - 1, boolean)
    return A


@dataclass(frozen=True, eq=False)
class Epstg:
    """Layered propagation graph.

    ``transfers[t - 1][j, i] == 1`` iff an error on qubit ``i`` at the start of
    window ``t`` is on qubit ``j`` at the start of window ``t + 1`` (GF(2)
    product of the window's gates).  ``reach`` is the same product taken over
    the boolean semiring, i.e. the edge set of the graph.
    """

    circuit: Circuit
    transfers: tuple[np.ndarray, ...]
    reach: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return self.circuit.n

    @property
    def T(self) -> int:
        return self.circuit.T

    def node(self, q: int, t: int) -> str:
        """Name of the vertex for qubit ``q`` at layer ``t``; layer ``T + 1`` is the readout."""
        return f"R{q}" if t == self.T + 1 else site_name(q, t)

    def edges(self, t1: int = 1, t2: int | None = None) -> list[tuple[str, str]]:
        """Edges of the subgraph spanning layers ``t1 .. t2`` (windows ``t1 <= t < t2``)."""
        if t2 is None:
            t2 = self.T + 1
        if not 1 <= t1 <= t2 <= self.T + 1:
            raise ValueError(f"need 1 <= t1 <= t2 <= {self.T + 1}, got {t1}, {t2}")
        out = []
        for t in range(t1, t2):
            R = self.reach[t - 1]
            for i in range(self.n):
                for j in np.flatnonzero(R[:, i]):
                    out.append((self.node(i + 1, t), self.node(int(j) + 1, t + 1)))
        return out


def build_epstg(circuit: Circuit) -> Epstg:
    check(circuit)
    windows = circuit.windows()
    transfers = tuple(_window_product(circuit.n, w, boolean=False) for w in windows)
    reach = tuple(_window_product(circuit.n, w, boolean=True) for w in windows)
    for a in transfers + reach:
        a.flags.writeable = False
    return Epstg(circuit, transfers, reach)


@dataclass(frozen=True, eq=False)
class Rsg:
    """Readout-by-site incidence matrix (rows = readouts, columns = sites, window-major)."""

    matrix: np.ndarray
    n: int
    T: int
    mode: str = "parity"

    def __post_init__(self):
        if self.matrix.shape != (self.n, self.n * self.T):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match n={self.n}, T={self.T}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def num_sites(self) -> int:
        return self.n * self.T

    def column_of(self, q: int, t: int) -> int:
        if not (1 <= q <= self.n and 1 <= t <= self.T):
            raise ValueError(f"site ({q}, {t}) outside n={self.n}, T={self.T}")
        return (t - 1) * self.n + (q - 1)

    def site_of(self, col: int) -> tuple[int, int]:
        t, q = divmod(col, self.n)
        return (q + 1, t + 1)

    def qubit_major_order(self) -> list[int]:
        """Column indices listed as Q1[1], Q1[2], ..., Q2[1], ..."""
        return [self.column_of(q, t) for q in range(1, self.n + 1) for t in range(1, self.T + 1)]

    def qubit_major(self) -> np.ndarray:
        return self.matrix[:, self.qubit_major_order()]

    @classmethod
    def from_qubit_major(cls, matrix, T: int, mode: str = "parity") -> "Rsg":
        m = np.asarray(matrix, dtype=np.uint8)
        n = m.shape[0]
        out = np.zeros_like(m)
        for q in range(n):
            for t in range(T):
                out[:, t * n + q] = m[:, q * T + t]
        return cls(out, n, T, mode)

    def degree(self, i: int) -> int:
        """Number of sites feeding readout ``i`` (1-based)."""
        return int(self.matrix[i - 1].sum())

    def degrees(self) -> list[int]:
        return [int(d) for d in self.matrix.sum(axis=1)]

    def sources(self, i: int) -> list[tuple[int, int]]:
        """Sites feeding readout ``i`` (1-based), in qubit-major order."""
        return sorted(self.site_of(int(c)) for c in np.flatnonzero(self.matrix[i - 1]))

    def shared_degree(self, i: int, j: int) -> int:
        return int((self.matrix[i - 1] & self.matrix[j - 1]).sum())

    @property
    def bits(self) -> BitMatrix:
        return BitMatrix.from_dense(self.matrix)

    def parities(self, v) -> np.ndarray:
        """Readout parities ``M v`` for a 0/1 injection vector in column order."""
        v = np.asarray(v, dtype=np.int64)
        return (self.matrix.astype(np.int64) @ v) & 1


def build_rsg(epstg: Epstg, mode: str = "parity") -> Rsg:
    """Column ``(q, t)`` is ``(A_T ... A_t) e_q`` (parity) or its reachability pattern (path).

    The suffix products are accumulated from the last window backwards by
    applying gates as column operations, so no full matrix product is formed.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    boolean = mode == "path"
    n, T = epstg.n, epstg.T
    M = np.zeros((n, n * T), dtype=np.uint8)
    S = np.eye(n, dtype=np.uint8)
    windows = epstg.circuit.windows()
    for t in range(T, 0, -1):
        for g in reversed(windows[t - 1]):
            _apply_gate_right(S, g.control - 1, g.target - 1, boolean)
        M[:, (t - 1) * n : t * n] = S
    M.flags.writeable = False
    return Rsg(M, n, T, mode)


def rsg_of(circuit: Circuit, mode: str = "parity") -> Rsg:
    return build_rsg(build_epstg(circuit), mode)


def gen_complete_rsg(n: int, T: int) -> Rsg:
    """Every site feeds every readout."""
    if n < 1 or T < 1:
        raise ValueError(f"need n >= 1 and T >= 1, got n={n}, T={T}")
    M = np.ones((n, n * T), dtype=np.uint8)
    M.flags.writeable = False
    return Rsg(M, n, T, "parity")


@dataclass(frozen=True)
class Component:
    rows: tuple[int, ...]  # 0-based readout indices
    cols: tuple[int, ...]  # 0-based site columns

    def submatrix(self, rsg: Rsg) -> np.ndarray:
        return rsg.matrix[np.ix_(self.rows, self.cols)]


def components(rsg: Rsg) -> list[Component]:
    """Connected components of the bipartite readout/site graph.

    Every readout belongs to exactly one component; all-zero columns belong to
    none.  Components are ordered by their smallest readout index.
    """
    parent = list(range(rsg.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    M = rsg.matrix
    for col in range(M.shape[1]):
        rows = np.flatnonzero(M[:, col])
        if rows.size > 1:
            root = find(int(rows[0]))
            for r in rows[1:]:
                other = find(int(r))
                if other != root:
                    parent[other] = root
    groups: dict[int, list[int]] = {}
    for r in range(rsg.n):
        groups.setdefault(find(r), []).append(r)
    out = []
    for rows in sorted(groups.values()):
        cols = np.flatnonzero(M[rows].any(axis=0))
        out.append(Component(tuple(rows), tuple(int(c) for c in cols)))
    return out


def _rsg_edges(rsg: Rsg) -> list[tuple[str, str]]:
    out = []
    order = rsg.qubit_major_order()
    for i in range(rsg.n):
        for col in order:
            if rsg.matrix[i, col]:
                out.append((site_name(*rsg.site_of(col)), f"R{i + 1}"))
    return out


def export_graph(obj: Rsg | Epstg, fmt: str = "dot") -> str:
    """Serialize an RSG or EPSTG as DOT or as a JSON edge list."""
    if isinstance(obj, Rsg):
        edges, name = _rsg_edges(obj), "rsg"
    elif isinstance(obj, Epstg):
        edges, name = obj.edges(), "epstg"
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    if fmt == "json-edges":
        return json.dumps({"graph": name, "edges": [list(e) for e in edges]})
    if fmt == "dot":
        lines = [f"digraph {name} {{"]
        lines += [f'  "{a}" -> "{b}";' for a, b in edges]
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {fmt!r}; choose 'dot' or 'json-edges'")
