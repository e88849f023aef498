"""Error-number distributions and the statistics built on them.

``P(k)`` is the probability that exactly ``k`` readouts flip when every
source site independently flips with probability ``p``.  Exact routes: full
enumeration of fault patterns, per-component enumeration folded by
convolution, a pairwise DP for staircase transversal circuits, and closed
forms for the empty, parallel-transversal and fully connected cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .gf2 import BitMatrix
from .graph import Rsg, components

__all__ = [
    "InstanceTooLarge",
    "ErrorDistribution",
    "Moments",
    "WeightEnumerator",
    "BRUTE_FORCE_LIMIT",
    "weight_enumerator",
    "brute_force_distribution",
    "convolve",
    "component_distribution",
    "parity_prob",
    "area_parity_table",
    "transversal_pair_distribution",
    "dp_transversal",
    "closed_empty",
    "empty_distribution",
    "parallel_pair_probs",
    "parallel_transversal_distribution",
    "closed_parallel_transversal",
    "closed_fully",
    "closed_fully_moments",
    "moments",
    "shift",
    "shift_parallel_transversal",
    "shift_fully",
    "shift_over_time",
    "shift_over_p",
    "entropy",
    "product_entropy",
    "kl",
    "logical_bound",
    "logical_exact",
    "surface_misid_rate",
    "readout_prob",
    "joint_prob",
    "intersection_prob",
    "union_prob_incl_excl",
    "expectation_curve",
    "max_error_count",
    "pattern_with_count",
]

BRUTE_FORCE_LIMIT = 24
UNION_LIMIT = 20
_LOW_BITS = 16
_NORM_TOL = 1e-9


class InstanceTooLarge(ValueError):
    """The requested exact computation would enumerate too many patterns."""


@dataclass(frozen=True, eq=False)
class ErrorDistribution:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if probs.size == 0:
            raise ValueError("distribution needs at least one entry")
        if (probs < 0).any():
            raise ValueError(f"negative probability {probs.min()}")
        total = math.fsum(probs)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, k: int, n: int) -> "ErrorDistribution":
        probs = np.zeros(n + 1)
        probs[k] = 1.0
        return cls(probs)

    @property
    def n(self) -> int:
        return len(self.probs) - 1

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, k: int) -> float:
        return float(self.probs[k])

    def __iter__(self):
        return iter(float(x) for x in self.probs)


@dataclass(frozen=True)
class Moments:
    expectation: float
    variance: float


# -- enumeration ------------------------------------------------------------


def _column_words(matrix: np.ndarray) -> np.ndarray:
    """Pack each column of a 0/1 matrix into uint64 words (one row of output per column)."""
    return BitMatrix.from_dense(matrix.T).words


def _popcount_rows(words: np.ndarray) -> np.ndarray:
    if words.shape[1] == 1:
        return np.bitwise_count(words[:, 0]).astype(np.int64)
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


def _subset_xor_table(cols: np.ndarray) -> np.ndarray:
    """XOR of ``cols`` selected by each index, bit ``j`` selecting ``cols[j]``."""
    table = np.zeros((1 << len(cols), cols.shape[1]), dtype=np.uint64)
    for j, c in enumerate(cols):
        half = 1 << j
        table[half : 2 * half] = table[:half] ^ c
    return table


def _chunks(matrix: np.ndarray):
    """Yield (first pattern index, syndrome popcounts, pattern weights) blocks.

    Pattern index bits run from the last column (least significant) to the
    first (most significant), so ascending index is lexicographic order of
    the 0/1 pattern read in column order.
    """
    m = matrix.shape[1]
    cols = _column_words(matrix)[::-1]  # cols[j] <-> pattern bit j
    low = min(m, _LOW_BITS)
    low_table = _subset_xor_table(cols[:low])
    low_weight = np.bitwise_count(np.arange(1 << low, dtype=np.uint64)).astype(np.int64)
    high_table = _subset_xor_table(cols[low:])
    for h in range(len(high_table)):
        syndromes = low_table ^ high_table[h]
        yield h << low, _popcount_rows(syndromes), low_weight + h.bit_count()


def _active(matrix: np.ndarray, limit: int) -> np.ndarray:
    active = np.flatnonzero(matrix.any(axis=0))
    if len(active) > limit:
        raise InstanceTooLarge(
            f"{len(active)} contributing sites exceed the exact-enumeration limit of {limit}; use sampling"
        )
    return active


@dataclass(frozen=True, eq=False)
class WeightEnumerator:
    """``counts[w, k]``: number of fault patterns of weight ``w`` that flip exactly ``k`` readouts.

    Only sites feeding at least one readout are enumerated; the rest cannot
    change the readout and marginalize out.
    """

    counts: np.ndarray
    sites: int
    readouts: int

    def distribution(self, p: float) -> ErrorDistribution:
        m = self.sites
        weights = [p**w * (1.0 - p) ** (m - w) for w in range(m + 1)]
        probs = [
            math.fsum(float(self.counts[w, k]) * weights[w] for w in range(m + 1) if self.counts[w, k])
            for k in range(self.readouts + 1)
        ]
        return ErrorDistribution(np.array(probs))

    def expectation(self, p) -> np.ndarray:
        """Expected number of flipped readouts, vectorized over ``p``."""
        p = np.asarray(p, dtype=np.float64)
        w = np.arange(self.sites + 1)
        per_weight = self.counts @ np.arange(self.readouts + 1)
        basis = p[..., None] ** w * (1.0 - p[..., None]) ** (self.sites - w)
        return basis @ per_weight.astype(np.float64)


def weight_enumerator(rsg: Rsg | np.ndarray, limit: int = BRUTE_FORCE_LIMIT) -> WeightEnumerator:
    matrix = rsg.matrix if isinstance(rsg, Rsg) else np.asarray(rsg, dtype=np.uint8)
    n = matrix.shape[0]
    sub = matrix[:, _active(matrix, limit)]
    m = sub.shape[1]
    counts = np.zeros((m + 1) * (n + 1), dtype=np.int64)
    if m == 0:
        counts[0] = 1
    else:
        for _, pc, w in _chunks(sub):
            counts += np.bincount(w * (n + 1) + pc, minlength=counts.size)
    return WeightEnumerator(counts.reshape(m + 1, n + 1), m, n)


def brute_force_distribution(rsg: Rsg | np.ndarray, p: float, limit: int = BRUTE_FORCE_LIMIT) -> ErrorDistribution:
    """Exact ``P(k)`` by enumerating every fault pattern on the contributing sites."""
    _check_p(p)
    return weight_enumerator(rsg, limit).distribution(p)


def convolve(d1: ErrorDistribution, d2: ErrorDistribution) -> ErrorDistribution:
    """Distribution of the sum of two independent error counts."""
    return ErrorDistribution(np.convolve(d1.probs, d2.probs))


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"bit-flip probability must lie in [0, 1], got {p}")


def parity_prob(sites: int, p: float, parity: str = "odd") -> float:
    """Probability that an odd (or even) number of ``sites`` independent flips occur."""
    if sites < 0:
        raise ValueError("site count must be nonnegative")
    odd = 0.5 - 0.5 * (1.0 - 2.0 * p) ** sites
    if parity == "odd":
        return odd
    if parity == "even":
        return 1.0 - odd
    raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")


def component_distribution(rsg: Rsg, p: float, limit: int = BRUTE_FORCE_LIMIT) -> ErrorDistribution:
    """Enumerate each connected component separately and fold the results by convolution.

    A component whose readouts all share the same support flips all or
    nothing, so it only needs its degree and uses the parity closed form
    whatever its size.
    """
    _check_p(p)
    probs = np.ones(1)
    for comp in components(rsg):
        sub = comp.submatrix(rsg)
        if (sub == sub[0]).all():
            odd = parity_prob(len(comp.cols), p)
            part = np.zeros(len(comp.rows) + 1)
            part[0], part[-1] = 1.0 - odd, odd
        else:
            part = brute_force_distribution(sub, p, limit).probs
        probs = np.convolve(probs, part)
    return ErrorDistribution(probs)


# -- transversal circuits ---------------------------------------------------


def area_parity_table() -> dict[tuple[int, int, int], int]:
    """Readout flips of one CNOT pair from the parities of its three areas.

    Keys are (area1, area2, area3) parities with 1 = odd: area1 is every site
    on the target, area2 the control sites after the gate, area3 the control
    sites up to the gate.  Control flips iff area2 + area3 is odd; target
    flips iff area1 + area3 is odd.
    """
    return {(a1, a2, a3): (a2 ^ a3) + (a1 ^ a3) for a1 in (0, 1) for a2 in (0, 1) for a3 in (0, 1)}


def transversal_pair_distribution(area1: int, area2: int, area3: int, p: float) -> np.ndarray:
    odd = [parity_prob(a, p) for a in (area1, area2, area3)]
    out = np.zeros(3)
    for (a1, a2, a3), flips in area_parity_table().items():
        out[flips] += math.prod(o if bit else 1.0 - o for o, bit in zip(odd, (a1, a2, a3)))
    return out


def dp_transversal(r: int, p: float) -> ErrorDistribution:
    """Distribution for the staircase transversal circuit on ``2r`` qubits.

    Pair ``k`` (gate in window ``k``, ``T = r + 1``) has area sizes
    ``T``, ``T - k`` and ``k``.  ``P(j, c)``, the probability of ``c`` flips
    among the first ``j`` pairs, is extended one pair at a time.
    """
    if r < 1:
        raise ValueError("need r >= 1")
    _check_p(p)
    T = r + 1
    table = np.zeros(1)
    table[0] = 1.0
    for k in range(1, r + 1):
        pair = transversal_pair_distribution(T, T - k, k, p)
        nxt = np.zeros(len(table) + 2)
        for c, prob in enumerate(table):
            nxt[c : c + 3] += prob * pair
        table = nxt
    return ErrorDistribution(table)


def parallel_pair_probs(p: float) -> np.ndarray:
    """``P(0), P(1), P(2)`` for one CNOT pair of the parallel transversal circuit."""
    return np.array([1 - 4 * p + 7 * p**2 - 4 * p**3, 3 * p - 6 * p**2 + 4 * p**3, p - p**2])


def _even(n: int) -> int:
    if n < 2 or n % 2:
        raise ValueError(f"transversal circuits need an even n >= 2, got {n}")
    return n // 2


def parallel_transversal_distribution(n: int, p: float) -> ErrorDistribution:
    pair = parallel_pair_probs(p)
    probs = np.ones(1)
    for _ in range(_even(n)):
        probs = np.convolve(probs, pair)
    return ErrorDistribution(probs)


def closed_parallel_transversal(n: int, p: float) -> Moments:
    half = _even(n)
    e = half * (5 * p - 8 * p**2 + 4 * p**3)
    var = half * (7 * p - 35 * p**2 + 84 * p**3 - 104 * p**4 + 64 * p**5 - 16 * p**6)
    return Moments(e, var)


# -- empty and fully connected ----------------------------------------------


def closed_empty(n: int, T: int, p: float) -> Moments:
    if n < 1 or T < 1:
        raise ValueError(f"need n >= 1 and T >= 1, got n={n}, T={T}")
    q = 1.0 - 2.0 * p
    return Moments(n / 2 - n / 2 * q**T, n / 4 - n / 4 * q ** (2 * T))


def empty_distribution(n: int, T: int, p: float) -> ErrorDistribution:
    """Binomial over readouts, each flipped with the odd-parity probability of ``T`` sites."""
    odd = parity_prob(T, p)
    k = np.arange(n + 1)
    coeffs = np.array([math.comb(n, int(i)) for i in k], dtype=np.float64)
    return ErrorDistribution(coeffs * odd**k * (1.0 - odd) ** (n - k))


def closed_fully(n: int, T: int, p: float) -> ErrorDistribution:
    """Every site feeds every readout: either all ``n`` readouts flip or none do."""
    if n < 1 or T < 1:
        raise ValueError(f"need n >= 1 and T >= 1, got n={n}, T={T}")
    all_flip = parity_prob(T * n, p)
    probs = np.zeros(n + 1)
    probs[0] += 1.0 - all_flip
    probs[n] += all_flip
    return ErrorDistribution(probs)


def closed_fully_moments(n: int, T: int, p: float) -> Moments:
    q = 1.0 - 2.0 * p
    return Moments(n / 2 - n / 2 * q ** (T * n), n * n * (0.25 - 0.25 * q ** (2 * T * n)))


# -- moments and shifts -----------------------------------------------------


def moments(d: ErrorDistribution) -> Moments:
    k = np.arange(len(d.probs))
    e = math.fsum(k * d.probs)
    var = math.fsum((k - e) ** 2 * d.probs)
    return Moments(e, var)


def shift(circuit: Moments | ErrorDistribution, n: int, T: int, p: float) -> float:
    """Expected-count excess over the empty circuit with the same ``n``, ``T`` and ``p``."""
    if isinstance(circuit, ErrorDistribution):
        circuit = moments(circuit)
    return circuit.expectation - closed_empty(n, T, p).expectation


def shift_parallel_transversal(n: int, p):
    half = _even(n)
    return half * p * (2 * p - 1) ** 2


def shift_fully(n: int, T: int, p: float) -> float:
    q = 1.0 - 2.0 * p
    return n / 2 * q**T - n / 2 * q ** (T * n)


def shift_over_time(n: int, p: float, T1: int, T2: int) -> float:
    if T1 > T2:
        raise ValueError("need T1 <= T2")
    q = 1.0 - 2.0 * p
    return n / 2 * (q**T1 - q**T2)


def shift_over_p(n: int, T: int, p1: float, p2: float) -> float:
    return n / 2 * ((1.0 - 2.0 * p1) ** T - (1.0 - 2.0 * p2) ** T)


# -- information measures and bounds ----------------------------------------


def _entropy(probs: np.ndarray) -> float:
    nz = probs[probs > 0]
    return float(max(0.0, -math.fsum(nz * np.log(nz))))


def entropy(d: ErrorDistribution) -> float:
    """Shannon entropy in nats."""
    return _entropy(d.probs)


def product_entropy(dists: Sequence[ErrorDistribution]) -> float:
    """Entropy of the joint outcome (k1, k2, ...) of independent components."""
    joint = np.ones(1)
    for d in dists:
        joint = np.multiply.outer(joint, d.probs).reshape(-1)
    return _entropy(joint)


def kl(dp: ErrorDistribution, dq: ErrorDistribution) -> float:
    """Kullback-Leibler divergence ``D(P || Q)`` in nats."""
    if len(dp) != len(dq):
        raise ValueError(f"distributions have different supports ({len(dp)} vs {len(dq)} outcomes)")
    P, Q = dp.probs, dq.probs
    mask = P > 0
    if (Q[mask] == 0).any():
        raise ValueError("Q assigns zero probability where P does not")
    return float(max(0.0, math.fsum(P[mask] * np.log(P[mask] / Q[mask]))))


def logical_bound(expectation: float, d: int) -> float:
    """Markov bound on ``P(k > d)``."""
    if d < 0:
        raise ValueError("distance must be nonnegative")
    return expectation / (d + 1)


def logical_exact(dist: ErrorDistribution, d: int) -> float:
    """``P(k > d)``."""
    if d < 0:
        raise ValueError("distance must be nonnegative")
    return math.fsum(dist.probs[d + 1 :])


def surface_misid_rate(d: int, p):
    """Leading-order rate of the most likely syndrome misidentification at distance ``d``."""
    if d < 1 or d % 2 == 0:
        raise ValueError(f"distance must be odd and positive, got {d}")
    de = (d + 1) // 2
    coeff = d * math.factorial(d) / (math.factorial(de - 1) * math.factorial(de))
    return coeff * np.asarray(p, dtype=np.float64) ** de if np.ndim(p) else coeff * float(p) ** de


# -- readout event probabilities --------------------------------------------


def _row(rsg: Rsg, i: int) -> np.ndarray:
    if not 1 <= i <= rsg.n:
        raise ValueError(f"readout {i} outside 1..{rsg.n}")
    return rsg.matrix[i - 1]


def readout_prob(rsg: Rsg, i: int, p: float) -> float:
    """Probability that readout ``i`` flips."""
    return parity_prob(int(_row(rsg, i).sum()), p)


def joint_prob(rsg: Rsg, i: int, j: int, p: float) -> float:
    """Probability that readouts ``i`` and ``j`` both flip, from their degrees and shared degree."""
    ri, rj = _row(rsg, i), _row(rsg, j)
    if i == j:
        return readout_prob(rsg, i, p)
    x, y, a = int(ri.sum()), int(rj.sum()), int((ri & rj).sum())
    q = 1.0 - 2.0 * p
    return 0.25 - 0.25 * q**x - 0.25 * q**y + 0.25 * q ** (x + y - 2 * a)


def _row_ints(rsg: Rsg, subset: Iterable[int]) -> list[int]:
    return [int("".join(map(str, _row(rsg, i)[::-1])), 2) for i in subset]


def _xor_weights(rows: list[int]) -> np.ndarray:
    """Popcount of the XOR of each subset of ``rows`` (bit ``j`` of the index selects row ``j``)."""
    acc = [0]
    for r in rows:
        acc += [a ^ r for a in acc]
    return np.array([a.bit_count() for a in acc], dtype=np.int64)


def intersection_prob(rsg: Rsg, subset: Sequence[int], p: float, method: str = "character") -> float:
    """Probability that every readout in ``subset`` flips.

    ``character`` averages the parity characters of all sub-subsets;
    ``enumerate`` sums pattern weights over the union of the rows' supports.
    """
    subset = list(dict.fromkeys(subset))
    if not subset:
        return 1.0
    if method == "character":
        k = len(subset)
        if k > UNION_LIMIT:
            raise InstanceTooLarge(f"{k} readouts exceed the limit of {UNION_LIMIT}")
        w = _xor_weights(_row_ints(rsg, subset))
        sign = np.where(np.bitwise_count(np.arange(1 << k, dtype=np.uint64)) & 1, -1.0, 1.0)
        return max(0.0, math.fsum(sign * (1.0 - 2.0 * p) ** w) / 2**k)
    if method == "enumerate":
        rows = rsg.matrix[[i - 1 for i in subset]]
        enum = weight_enumerator(rows)
        return enum.distribution(p)[len(subset)]
    raise ValueError(f"unknown method {method!r}")


def union_prob_incl_excl(rsg: Rsg, subset: Sequence[int], p: float) -> float:
    """Probability that at least one readout in ``subset`` flips, by inclusion-exclusion."""
    subset = list(dict.fromkeys(subset))
    k = len(subset)
    if k == 0:
        return 0.0
    if k > UNION_LIMIT:
        raise InstanceTooLarge(f"{k} readouts exceed the inclusion-exclusion limit of {UNION_LIMIT}")
    size = np.bitwise_count(np.arange(1 << k, dtype=np.uint64)).astype(np.int64)
    # character sums f(U) = (-1)^|U| (1-2p)^wt(U), then zeta transform over subsets
    g = np.where(size & 1, -1.0, 1.0) * (1.0 - 2.0 * p) ** _xor_weights(_row_ints(rsg, subset))
    idx = np.arange(1 << k)
    for j in range(k):
        bit = 1 << j
        sel = idx[(idx & bit) != 0]
        g[sel] += g[sel ^ bit]
    inter = g / 2.0**size
    terms = np.where(size & 1, 1.0, -1.0)[1:] * inter[1:]
    return min(1.0, max(0.0, math.fsum(terms)))


# -- extremal patterns ------------------------------------------------------


def max_error_count(rsg: Rsg, limit: int = BRUTE_FORCE_LIMIT) -> int:
    """Largest number of readouts any fault pattern can flip."""
    sub = rsg.matrix[:, _active(rsg.matrix, limit)]
    if sub.shape[1] == 0:
        return 0
    return max(int(pc.max()) for _, pc, _ in _chunks(sub))


def pattern_with_count(rsg: Rsg, k: int, limit: int = BRUTE_FORCE_LIMIT) -> np.ndarray | None:
    """Lexicographically smallest fault pattern (column order) flipping exactly ``k`` readouts."""
    active = _active(rsg.matrix, limit)
    sub = rsg.matrix[:, active]
    m = sub.shape[1]
    hit = 0 if k == 0 else None
    if hit is None and m:
        for start, pc, _ in _chunks(sub):
            found = np.flatnonzero(pc == k)
            if found.size:
                hit = start + int(found[0])
                break
    if hit is None:
        return None
    v = np.zeros(rsg.matrix.shape[1], dtype=np.uint8)
    for j in range(m):
        if (hit >> (m - 1 - j)) & 1:
            v[active[j]] = 1
    return v


def expectation_curve(rsg: Rsg, limit: int = BRUTE_FORCE_LIMIT):
    """Return ``E(p)``, the exact expected flip count as a vectorized function of ``p``.

    Each component's weight enumerator is computed once; single-readout
    components contribute their parity closed form.
    """
    singles = []
    enums = []
    for comp in components(rsg):
        if len(comp.rows) == 1:
            singles.append(len(comp.cols))
        else:
            enums.append(weight_enumerator(comp.submatrix(rsg), limit))
    degrees = np.array(singles, dtype=np.float64)

    def curve(p):
        p = np.asarray(p, dtype=np.float64)
        total = (0.5 - 0.5 * (1.0 - 2.0 * p[..., None]) ** degrees).sum(axis=-1)
        for enum in enums:
            total = total + enum.expectation(p)
        return total

    return curve
