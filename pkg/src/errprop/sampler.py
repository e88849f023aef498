"""Monte Carlo estimate of the error-number distribution.

Shots are packed 64 to a uint64 word.  For every contributing site a flip
mask (one bit per shot) is drawn, and the parity word of each readout is the
XOR of the masks of the sites feeding it.  Shots are processed in fixed-size
chunks; chunk ``c`` draws from a Philox stream keyed by ``(seed, c)``, so the
result depends only on the seed and shot count, never on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import ErrorDistribution, closed_empty, entropy
from .circuit import SEED_MAX, generate
from .graph import Rsg, gen_complete_rsg, rsg_of

__all__ = [
    "CHUNK_SHOTS",
    "SampleReport",
    "SweepRow",
    "sample",
    "sample_reference",
    "family_rsg",
    "sweep",
]

CHUNK_SHOTS = 1 << 14
# below this flip probability masks are built from geometric gaps instead of one uniform per bit
SPARSE_BELOW = 0.05


@dataclass(frozen=True, eq=False)
class SampleReport:
    distribution: ErrorDistribution
    counts: np.ndarray
    shots: int
    seed: int
    expectation: float
    variance: float
    expectation_stderr: float


def _check_args(p: float, shots: int, seed: int) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"bit-flip probability must lie in [0, 1], got {p}")
    if shots < 1:
        raise ValueError("need at least one shot")
    if isinstance(seed, bool) or not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _flip_masks(rng: np.random.Generator, m: int, shots: int, p: float) -> np.ndarray:
    """(m, words) uint64 masks; bit ``s`` of row ``j`` is set iff site ``j`` flips in shot ``s``."""
    words = (shots + 63) // 64
    masks = np.zeros((m, words), dtype=np.uint64)
    if p == 0.0 or m == 0:
        return masks
    if p >= SPARSE_BELOW:
        bits = rng.random((m, shots)) < p
        padded = np.zeros((m, words * 64), dtype=bool)
        padded[:, :shots] = bits
        return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64)
    # Bernoulli process over the m*shots cells: gaps between flips are geometric
    total = m * shots
    positions = []
    last = -1
    while True:
        expect = (total - last) * p
        gaps = rng.geometric(p, size=int(expect + 6 * math.sqrt(expect) + 16))
        pos = last + np.cumsum(gaps)
        positions.append(pos[pos < total])
        if pos[-1] >= total:
            break
        last = int(pos[-1])
    pos = np.concatenate(positions)
    col, shot = np.divmod(pos, shots)
    bit = np.left_shift(np.uint64(1), (shot & 63).astype(np.uint64))
    np.bitwise_or.at(masks, (col, shot >> 6), bit)
    return masks


def _active_columns(rsg: Rsg) -> tuple[np.ndarray, list[np.ndarray]]:
    active = np.flatnonzero(rsg.matrix.any(axis=0))
    sub = rsg.matrix[:, active]
    return active, [np.flatnonzero(row) for row in sub]


def _run_chunk(supports: list[np.ndarray], m: int, n: int, p: float, seed: int, chunk: int, shots: int) -> np.ndarray:
    masks = _flip_masks(_chunk_rng(seed, chunk), m, shots, p)
    words = masks.shape[1]
    parity = np.zeros((n, words), dtype=np.uint64)
    for i, cols in enumerate(supports):
        if cols.size:
            parity[i] = np.bitwise_xor.reduce(masks[cols], axis=0)
    bits = np.unpackbits(parity.view(np.uint8), axis=1, bitorder="little")[:, :shots]
    per_shot = bits.sum(axis=0, dtype=np.int64)
    return np.bincount(per_shot, minlength=n + 1)


def _chunk_sizes(shots: int) -> list[int]:
    full, rest = divmod(shots, CHUNK_SHOTS)
    return [CHUNK_SHOTS] * full + ([rest] if rest else [])


def _report(counts: np.ndarray, shots: int, seed: int) -> SampleReport:
    k = np.arange(len(counts))
    freq = counts / shots
    e = math.fsum(k * freq)
    var = math.fsum((k - e) ** 2 * freq)
    return SampleReport(ErrorDistribution(freq), counts, shots, seed, e, var, math.sqrt(var / shots))


def sample(rsg: Rsg, p: float, shots: int, seed: int = 0, workers: int = 1) -> SampleReport:
    """Estimate ``P(k)`` from ``shots`` independent fault patterns."""
    _check_args(p, shots, seed)
    active, supports = _active_columns(rsg)
    m = len(active)
    sizes = _chunk_sizes(shots)

    def job(c: int) -> np.ndarray:
        return _run_chunk(supports, m, rsg.n, p, seed, c, sizes[c])

    if workers <= 1 or len(sizes) == 1:
        parts = [job(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    counts = np.sum(parts, axis=0, dtype=np.int64)
    return _report(counts, shots, seed)


def sample_reference(rsg: Rsg, p: float, shots: int, seed: int = 0) -> SampleReport:
    """One shot at a time: unpack each shot's fault vector and form ``M v`` directly.

    Draws exactly the same flips as :func:`sample`; only the propagation differs.
    """
    _check_args(p, shots, seed)
    active, _ = _active_columns(rsg)
    sub = rsg.matrix[:, active].astype(np.int64)
    counts = np.zeros(rsg.n + 1, dtype=np.int64)
    for c, size in enumerate(_chunk_sizes(shots)):
        masks = _flip_masks(_chunk_rng(seed, c), len(active), size, p)
        for s in range(size):
            v = (masks[:, s >> 6] >> np.uint64(s & 63)) & np.uint64(1)
            b = (sub @ v.astype(np.int64)) % 2
            counts[int(b.sum())] += 1
    return _report(counts, shots, seed)


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    expectation: float
    variance: float
    shift: float
    entropy: float
    stderr: float
    shots: int
    seed: int


def family_rsg(family: str, params: dict, mode: str = "parity") -> Rsg:
    """RSG of a named circuit family, including the gate-free complete graph."""
    if family == "complete":
        extra = set(params) - {"n", "T"}
        if extra:
            raise ValueError(f"family 'complete' does not take {sorted(extra)}")
        return gen_complete_rsg(int(params["n"]), int(params["T"]))
    return rsg_of(generate(family, **params), mode)


def sweep(
    family: str,
    params: dict,
    axis: str,
    values: Sequence[float],
    shots: int,
    seed: int = 0,
    p: float | None = None,
    workers: int = 1,
    mode: str = "parity",
) -> list[SweepRow]:
    """Sample a circuit family along the ``T`` or ``p`` axis.

    Every grid point reuses ``seed`` (common random numbers), so a one-point
    sweep reproduces :func:`sample` exactly.  ``shift`` is measured against
    the exact expectation of the empty circuit with the same ``n``, ``T``, ``p``.
    """
    if not values:
        raise ValueError("empty grid")
    if axis not in ("T", "p"):
        raise ValueError(f"axis must be 'T' or 'p', got {axis!r}")
    if axis == "T" and p is None:
        raise ValueError("a T sweep needs a fixed p")
    rows = []
    fixed = None if axis == "T" else family_rsg(family, params, mode)
    for value in values:
        if axis == "T":
            rsg = family_rsg(family, {**params, "T": int(value)}, mode)
            prob = float(p)
        else:
            rsg, prob = fixed, float(value)
        rep = sample(rsg, prob, shots, seed, workers)
        base = closed_empty(rsg.n, rsg.T, prob).expectation
        rows.append(
            SweepRow(
                axis,
                value,
                rep.expectation,
                rep.variance,
                rep.expectation - base,
                entropy(rep.distribution),
                rep.expectation_stderr,
                shots,
                seed,
            )
        )
    return rows
