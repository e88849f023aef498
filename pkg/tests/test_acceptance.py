"""Acceptance suite: one test per criterion, each marked ``criterion(N)``.

The terminal summary prints a PASS/FAIL line per criterion (see conftest.py).
Distributions produced along the way are rebuilt by cached helpers so the
Markov-bound criterion can revisit all of them.
"""

import functools
import itertools
import math
import timeit

import numpy as np
import pytest

from errprop import analysis as an
from errprop.circuit import (
    gen_cnot_pair,
    gen_empty,
    gen_parallel_transversal,
    gen_random_global,
    gen_random_local,
    gen_staircase_transversal,
)
from errprop.cli import crossing, main
from errprop.gf2 import BitMatrix, BitVector, kernel_dim, mat_vec, solve
from errprop.graph import gen_complete_rsg, rsg_of
from errprop.pauli import PauliFrame, conj_cnot, conj_h, conj_phase, propagate_frame
from errprop.sampler import sample
from oracles import all_readouts, event_prob, random_circuit

PS = [0.01, 0.1, 0.3, 0.5]
EXACT = 1e-12


def report(n, ok, detail=""):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


def pcnot2q(p):
    q = 1 - p
    return [
        q**4 + p**2 * q**2 + 2 * p**3 * q,
        3 * p * q**3 + 3 * p**2 * q**2 + p**3 * q + p**4,
        p * q**3 + 2 * p**2 * q**2 + p**3 * q,
    ]


# -- cached producers shared with criterion 11 --------------------------------


@functools.cache
def c1_dists():
    return [an.brute_force_distribution(rsg_of(gen_cnot_pair()), p) for p in PS]


@functools.cache
def c2_dists():
    return [an.brute_force_distribution(rsg_of(gen_parallel_transversal(n)), p) for n in (2, 4, 6, 8) for p in PS]


@functools.cache
def c4_exact():
    return [
        (n, T, p, an.brute_force_distribution(rsg_of(gen_empty(n, T)), p))
        for n in (1, 2, 3)
        for T in range(1, 7)
        for p in PS
    ]


@functools.cache
def c4_sampled():
    return sample(rsg_of(gen_empty(60, 100)), 0.01, 10**6, seed=2024, workers=2)


@functools.cache
def c5_dists():
    return [
        (n, T, p, an.brute_force_distribution(gen_complete_rsg(n, T), p))
        for n in range(1, 5)
        for T in range(1, 5)
        for p in PS
    ]


@functools.cache
def c7_dists():
    return [
        (an.dp_transversal(r, p), an.brute_force_distribution(rsg_of(gen_staircase_transversal(2 * r)), p))
        for r in (1, 2, 3)
        for p in (0.05, 0.2)
    ]


@functools.cache
def c10_reports():
    start = timeit.default_timer()
    out = {"global": [], "local": []}
    for seed in range(20):
        out["global"].append(sample(rsg_of(gen_random_global(18, 5, 4, seed)), 0.01, 10**5, seed=seed))
        out["local"].append(sample(rsg_of(gen_random_local(18, 5, 4, seed)), 0.01, 10**5, seed=seed))
    return out, timeit.default_timer() - start


def small_circuits():
    """Family and random circuits with nT <= 16."""
    out = [gen_cnot_pair(), gen_cnot_pair(3)]
    out += [gen_empty(n, T) for n in (1, 2, 3, 4) for T in (1, 2, 4) if n * T <= 16]
    out += [gen_staircase_transversal(n) for n in (2, 4)]
    out += [gen_parallel_transversal(n) for n in (2, 4, 6, 8)]
    out += [gen_random_global(4, 4, 2, s) for s in range(3)]
    out += [gen_random_local(4, 4, 2, s) for s in range(3)]
    out += [gen_random_global(5, 3, 2, s) for s in range(3)]
    rng = np.random.default_rng(16)
    out += [random_circuit(rng, 4, 4, 2) for _ in range(4)]
    return out


# -- criteria ---------------------------------------------------------------


@pytest.mark.criterion(1)
def test_criterion_1_two_qubit_cnot():
    err = max(float(np.abs(d.probs - pcnot2q(p)).max()) for d, p in zip(c1_dists(), PS))
    rsg = rsg_of(gen_cnot_pair())
    runtime = min(timeit.repeat(lambda: an.brute_force_distribution(rsg, 0.1), number=1, repeat=200))
    report(1, err <= EXACT and runtime < 1e-3, f"max err {err:.1e}, runtime {runtime * 1e6:.0f} us")


# columns: Q1[1], Q1[2], Q3[1], Q3[2], flips on the (R1, R3) pair, number of faults
SIXTEEN_CASES = [
    (0, 0, 0, 0, 0, 0), (0, 0, 0, 1, 1, 1), (0, 0, 1, 0, 1, 1), (0, 0, 1, 1, 0, 2),
    (0, 1, 0, 0, 1, 1), (0, 1, 0, 1, 2, 2), (0, 1, 1, 0, 2, 2), (0, 1, 1, 1, 1, 3),
    (1, 0, 0, 0, 2, 1), (1, 0, 0, 1, 1, 2), (1, 0, 1, 0, 1, 2), (1, 0, 1, 1, 2, 3),
    (1, 1, 0, 0, 1, 2), (1, 1, 0, 1, 0, 3), (1, 1, 1, 0, 0, 3), (1, 1, 1, 1, 1, 4),
]


@pytest.mark.criterion(2)
def test_criterion_2_parallel_transversal():
    errs = []
    for d, (n, p) in zip(c2_dists(), itertools.product((2, 4, 6, 8), PS)):
        mom = an.moments(d)
        e = n / 2 * (5 * p - 8 * p**2 + 4 * p**3)
        v = n / 2 * (7 * p - 35 * p**2 + 84 * p**3 - 104 * p**4 + 64 * p**5 - 16 * p**6)
        errs += [abs(mom.expectation - e), abs(mom.variance - v)]
    # every fault pattern on the (Q1, Q3) pair, read through the matrix
    rsg = rsg_of(gen_parallel_transversal(4))
    cols = [rsg.column_of(q, t) for q, t in ((1, 1), (1, 2), (3, 1), (3, 2))]
    table_ok = True
    for *bits, flips, faults in SIXTEEN_CASES:
        v = np.zeros(rsg.num_sites, dtype=np.uint8)
        v[cols] = bits
        b = rsg.parities(v)
        table_ok &= int(b[0] + b[2]) == flips and sum(bits) == faults and not b[1] and not b[3]
    # the table's probabilities sum to the enumerated pair distribution
    p = 0.1
    pair = np.zeros(3)
    for *bits, flips, faults in SIXTEEN_CASES:
        pair[flips] += p**faults * (1 - p) ** (4 - faults)
    table_ok &= bool(np.allclose(pair, an.parallel_pair_probs(p), atol=EXACT))
    report(2, max(errs) <= EXACT and table_ok, f"max err {max(errs):.1e}, table {'ok' if table_ok else 'mismatch'}")


@pytest.mark.criterion(3)
def test_criterion_3_shift_peak():
    grid = np.arange(0, 5001) * 1e-4
    details, ok = [], True
    for n in (2, 4, 8, 16):
        curve = an.expectation_curve(rsg_of(gen_parallel_transversal(n)))
        shift = curve(grid) - np.array([an.closed_empty(n, 2, p).expectation for p in grid])
        i = int(np.argmax(shift))
        ok &= abs(grid[i] - 1 / 6) <= 1e-3 and abs(shift[i] - n / 27) <= 1e-6 * n
        details.append(f"n={n}: argmax {grid[i]:.4f} max {shift[i]:.7f}")
    report(3, ok, "; ".join(details))


@pytest.mark.criterion(4)
def test_criterion_4_empty_circuit():
    err = 0.0
    for n, T, p, d in c4_exact():
        closed = an.closed_empty(n, T, p)
        mom = an.moments(d)
        err = max(err, abs(mom.expectation - closed.expectation), abs(mom.variance - closed.variance))
        err = max(err, float(np.abs(an.empty_distribution(n, T, p).probs - d.probs).max()))
    rep = c4_sampled()
    target = 60 / 2 * (1 - 0.98**100)
    z = abs(rep.expectation - target) / rep.expectation_stderr
    es = [an.closed_empty(60, T, 0.01).expectation for T in range(1, 201)]
    monotone = all(b >= a for a, b in zip(es, es[1:]))
    report(4, err <= EXACT and z <= 5 and monotone, f"max err {err:.1e}, sampled z {z:.2f}, monotone {monotone}")


@pytest.mark.criterion(5)
def test_criterion_5_fully_connected():
    err = 0.0
    for n, T, p, d in c5_dists():
        top = 0.5 - 0.5 * (1 - 2 * p) ** (T * n)
        var = n**2 * (0.25 - 0.25 * (1 - 2 * p) ** (2 * T * n))
        err = max(err, float(np.abs(d.probs[1:n]).max(initial=0.0)), abs(d.probs[n] - top))
        err = max(err, abs(an.moments(d).variance - var))
    report(5, err <= EXACT, f"max err {err:.1e}")


WORKED = np.array(
    [
        [1, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 0, 0, 0],
        [1, 0, 0, 0, 1, 1, 0, 0],
        [0, 0, 1, 0, 0, 0, 1, 1],
    ],
    dtype=np.uint8,
)


def count_solutions(dense, b):
    m = dense.shape[1]
    idx = np.arange(1 << m, dtype=np.int64)
    v = ((idx[:, None] >> np.arange(m)) & 1).astype(np.int64)
    return int(((v @ dense.T.astype(np.int64)) & 1 == b).all(axis=1).sum())


@pytest.mark.criterion(6)
def test_criterion_6_xorsat():
    M = BitMatrix.from_dense(WORKED)
    witness = BitVector.from_dense([1, 0, 1, 0, 0, 1, 0, 1])
    b = mat_vec(M, witness)
    ok = b.to_dense().tolist() == [1, 1, 0, 0]
    sol = solve(M, b)
    ok &= sol is not None and mat_vec(M, sol) == b
    ok &= kernel_dim(M) == 4
    ok &= bool(np.array_equal(rsg_of(gen_parallel_transversal(4)).qubit_major(), WORKED))
    rng = np.random.default_rng(6)
    checked = 0
    for _ in range(40):
        rows, cols = int(rng.integers(1, 9)), int(rng.integers(1, 17))
        dense = (rng.random((rows, cols)) < rng.uniform(0.1, 0.7)).astype(np.uint8)
        A = BitMatrix.from_dense(dense)
        v0 = rng.integers(0, 2, cols)
        inside = (dense.astype(np.int64) @ v0) & 1
        ok &= count_solutions(dense, inside) == 2 ** kernel_dim(A)
        s = solve(A, BitVector.from_dense(inside))
        ok &= s is not None and mat_vec(A, s).to_dense().tolist() == inside.tolist()
        other = rng.integers(0, 2, rows)
        n_other = count_solutions(dense, other)
        ok &= n_other in (0, 2 ** kernel_dim(A))
        ok &= (solve(A, BitVector.from_dense(other)) is None) == (n_other == 0)
        checked += 1
    report(6, bool(ok), f"worked instance and {checked} random systems")


@pytest.mark.criterion(7)
def test_criterion_7_dp_vs_oracle():
    err = max(float(np.abs(dp.probs - brute.probs).max()) for dp, brute in c7_dists())
    report(7, err <= EXACT, f"max err {err:.1e}")


@pytest.mark.criterion(8)
def test_criterion_8_joint_probability():
    err, pairs = 0.0, 0
    for circuit in small_circuits():
        rsg = rsg_of(circuit)
        flips = all_readouts(circuit)
        m = circuit.n * circuit.T
        for i, j in itertools.combinations(range(1, circuit.n + 1), 2):
            mask = (flips[:, i - 1] == 1) & (flips[:, j - 1] == 1)
            for p in PS:
                err = max(err, abs(an.joint_prob(rsg, i, j, p) - event_prob(flips, m, p, mask)))
            pairs += 1
    # disjoint rows: the joint probability factorizes
    rsg = rsg_of(gen_empty(3, 4))
    indep = max(
        abs(an.joint_prob(rsg, 1, 2, p) - an.readout_prob(rsg, 1, p) * an.readout_prob(rsg, 2, p)) for p in PS
    )
    report(8, err <= EXACT and indep <= EXACT, f"{pairs} readout pairs, max err {err:.1e}, a=0 err {indep:.1e}")


CNOT_TABLE = {
    "II": "II", "XI": "XX", "IX": "IX", "XX": "XI", "ZI": "ZI", "IZ": "ZZ", "ZZ": "IZ", "YI": "YX",
    "IY": "ZY", "YY": "XZ", "XY": "YZ", "YX": "YI", "XZ": "YY", "ZX": "ZX", "YZ": "XY", "ZY": "IY",
}
H_TABLE = {"X": "Z", "Y": "Y", "Z": "X"}
P_TABLE = {"X": "Y", "Y": "X", "Z": "Z"}


@pytest.mark.criterion(9)
def test_criterion_9_pauli_tables():
    ok = all(str(conj_cnot(PauliFrame.from_string(a), 1, 2)) == b for a, b in CNOT_TABLE.items())
    ok &= all(str(conj_h(PauliFrame.from_string(a), 1)) == b for a, b in H_TABLE.items())
    ok &= all(str(conj_phase(PauliFrame.from_string(a), 1)) == b for a, b in P_TABLE.items())
    circuits = [gen_cnot_pair(), gen_parallel_transversal(4), gen_staircase_transversal(4)]
    circuits.append(random_circuit(np.random.default_rng(9), 4, 4, 2))
    patterns = 0
    for circuit in circuits:
        rsg = rsg_of(circuit)
        m = rsg.num_sites
        sites = [rsg.site_of(j) for j in range(m)]
        idx = np.arange(1 << m, dtype=np.int64)
        v = ((idx[:, None] >> np.arange(m)) & 1).astype(np.int64)
        predicted = (v @ rsg.matrix.T.astype(np.int64)) & 1
        for bits in range(1 << m):
            frame = propagate_frame(circuit, [(sites[j], "X") for j in range(m) if (bits >> j) & 1])
            ok &= frame.z == 0 and frame.x_bits() == predicted[bits].tolist()
        patterns += 1 << m
    report(9, bool(ok), f"16+3+3 table rows, {patterns} propagated fault patterns")


@pytest.mark.criterion(10)
def test_criterion_10_random_circuits():
    reps, elapsed = c10_reports()
    g = float(np.mean([r.expectation for r in reps["global"]]))
    l = float(np.mean([r.expectation for r in reps["local"]]))
    report(10, g > l and elapsed < 60, f"mean E global {g:.4f} > local {l:.4f}, {elapsed:.1f} s")


def all_distributions():
    out = list(c1_dists()) + list(c2_dists())
    out += [d for *_, d in c4_exact()] + [c4_sampled().distribution]
    out += [d for *_, d in c5_dists()]
    out += [d for pair in c7_dists() for d in pair]
    out += [an.brute_force_distribution(rsg_of(c), p) for c in small_circuits() for p in PS]
    out += [r.distribution for reps in c10_reports()[0].values() for r in reps]
    return out


@pytest.mark.criterion(11)
def test_criterion_11_markov_bound():
    checked, worst = 0, -math.inf
    for d in all_distributions():
        e = an.moments(d).expectation
        for k in (1, 3, 5):
            gap = an.logical_exact(d, k) - an.logical_bound(e, k)
            worst = max(worst, gap)
            checked += 1
    report(11, worst <= 1e-15, f"{checked} (distribution, d) checks, worst exact-bound {worst:.2e}")


def footer(text):
    return dict(line[2:].split(": ", 1) for line in text.splitlines() if line.startswith("# ") and ": " in line)


@pytest.mark.criterion(12)
def test_criterion_12_threshold_substitute(capsys):
    grid = [i * 1e-3 for i in range(1, 501)]
    plain = crossing(lambda p: an.surface_misid_rate(3, p), lambda p: an.surface_misid_rate(5, p), grid)
    code = main(["threshold", "--distances", "3,5", "--gen", "parallel", "n=4"])
    f = footer(capsys.readouterr().out)
    without = float(f["crossing d3/d5"])
    with_prop = float(f["crossing d3/d5 with propagation"])
    ok = code == 0 and 0.05 <= plain <= 0.2 and abs(without - plain) < 1e-4 and with_prop < without
    report(12, ok, f"crossing d3/d5 {without:.4f}, with propagation {with_prop:.4f}")
