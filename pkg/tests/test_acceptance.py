"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and repeated in the terminal summary
(see ``conftest.py``), so they appear even when output capture is on.
"""
import math
import time
import warnings

import numpy as np
import pytest

from cloneq.ensembles import (
    ObservableSet,
    eigenstate_ensemble,
    ensemble_from_bases,
    mub_bases,
)
from cloneq.errors import ConvergenceWarning
from cloneq.optimal import (
    BasisOptConfig,
    fopt_mub,
    mr_fidelity_bounds,
    optimal_cloning_fidelity,
    optimize_basis,
    q_optimal,
    sweep,
)
from cloneq.qcm import (
    average_cloning_fidelity,
    clone_output_closed,
    clone_output_oracle,
    f_avg,
    params_from_q,
    q_regime_max,
    q_unitary_max,
    universal_params,
)
from cloneq.qmath import OrthonormalBasis, haar_unitary, random_hermitian, random_ket
from cloneq.qubit import BlochPair, qubit_optimal_cloner

RESULTS: list[str] = []


def report(number, title, ok, detail, seconds):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}  [{detail}; {seconds:.2f}s]"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    dev = sym = 0.0
    for d in (2, 3, 4, 5, 6):
        for _ in range(200):
            params = params_from_q(d, rng.uniform(0.0, q_unitary_max(d)))
            basis = OrthonormalBasis(haar_unitary(d, rng))
            psi = random_ket(d, rng)
            closed = clone_output_closed(psi, basis, params)
            orc = clone_output_oracle(psi, basis, params)
            dev = max(dev, float(np.max(np.abs(closed.clone - orc.clone))))
            sym = max(sym, float(np.max(np.abs(orc.clone - orc.clone_b))))
    secs = time.perf_counter() - t0
    report(1, "closed-form clone equals tripartite oracle",
           dev <= 1e-10 and sym <= 1e-10 and secs < 60,
           f"max dev {dev:.2e}, A/B asymmetry {sym:.2e}", secs)


def test_criterion_2_universal_cloner():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    dev = spread = 0.0
    for d in range(2, 13):
        params = universal_params(d)
        target = (d + 3) / (2 * (d + 1))
        basis = OrthonormalBasis(haar_unitary(d, rng))
        fids = np.array([clone_output_closed(random_ket(d, rng), basis, params).fidelity
                         for _ in range(100)])
        ens = ensemble_from_bases([OrthonormalBasis(haar_unitary(d, rng)) for _ in range(2)])
        avg = average_cloning_fidelity(ens, basis, params)
        dev = max(dev, float(np.max(np.abs(fids - target))), abs(avg - target))
        spread = max(spread, float(fids.max() - fids.min()))
    d2 = average_cloning_fidelity(ensemble_from_bases(mub_bases(2, 2)),
                                  OrthonormalBasis.standard(2), universal_params(2))
    d2_dev = abs(d2 - 5 / 6)
    secs = time.perf_counter() - t0
    report(2, "universal cloner fidelity (d+3)/(2(d+1)) for d=2..12",
           dev <= 1e-12 and d2_dev <= 1e-12 and spread < 1e-10,
           f"max dev {dev:.2e}, d=2 dev {d2_dev:.2e}, spread {spread:.2e}", secs)


def test_criterion_3_mub_closed_form():
    t0 = time.perf_counter()
    dev = 0.0
    for n, d in ((2, 2), (3, 2), (2, 3), (4, 3), (2, 5)):
        ens = ensemble_from_bases(mub_bases(d, n))
        _, a = optimize_basis(ens, BasisOptConfig(restarts=32))
        dev = max(dev, abs(a - (n + d - 1)))
    secs = time.perf_counter() - t0
    report(3, "basis search recovers A_opt = N+d-1 on MUB ensembles",
           dev <= 1e-4 and secs < 120, f"max dev {dev:.2e}", secs)


def test_criterion_4_full_mub_set():
    t0 = time.perf_counter()
    dev = 0.0
    for d in (2, 3, 5):
        f, q = fopt_mub(d + 1, d)
        dev = max(dev, abs(q - 1 / math.sqrt(2 * (d + 1))), abs(f - (d + 3) / (2 * (d + 1))))
    _, q3 = fopt_mub(4, 3)
    dev = max(dev, abs(q3 - 1 / (2 * math.sqrt(2))))
    secs = time.perf_counter() - t0
    report(4, "d+1 MUBs give the universal cloner", dev <= 1e-12, f"max dev {dev:.2e}", secs)


def test_criterion_5_q_opt_maximality():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    excess = -math.inf
    for _ in range(50):
        d = int(rng.integers(2, 12))
        ratio = rng.uniform(max(1 / d, 2 / (d + 1)), 1.0)
        params = q_optimal(ratio * 10_000, 10_000, d)
        best = f_avg(ratio, d, params.p, params.q)
        qs = np.linspace(0.0, q_regime_max(d), 100_000)
        ps = np.sqrt(np.maximum(0.0, 1 - 2 * (d - 1) * qs**2))
        vals = ratio * (ps**2 - 2 * ps * qs) + 2 * ps * qs + (d - 1) * qs**2
        excess = max(excess, float(vals.max() - best))
    secs = time.perf_counter() - t0
    report(5, "closed-form q_opt beats a 1e5-point grid", excess <= 1e-9,
           f"largest grid excess {excess:.2e}", secs)


def test_criterion_6_qubit_closed_form():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    dev = 0.0
    for _ in range(50):
        a, b = (v / np.linalg.norm(v) for v in rng.normal(size=(2, 3)))
        pair = BlochPair(a, b)
        sol = qubit_optimal_cloner(pair)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            rep = optimal_cloning_fidelity(eigenstate_ensemble(pair.observables()))
        dev = max(dev, abs(sol.Q_c - rep.Q_c), abs(sol.A_opt - rep.A_opt))
    ortho = qubit_optimal_cloner(BlochPair([0, 0, 1], [1, 0, 0])).A_opt / 4
    collinear = max(qubit_optimal_cloner(BlochPair([0, 0, 1], s * np.array([0, 0, 1]))).Q_c
                    for s in (1, -1))
    secs = time.perf_counter() - t0
    report(6, "qubit closed form matches the generic pipeline",
           dev <= 1e-4 and ortho == 0.75 and collinear <= 1e-9,
           f"max dev {dev:.2e}, orthogonal A/4 {ortho}, collinear Q_c {collinear:.1e}", secs)


def test_criterion_7_faithfulness():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    comm_max, noncomm_min = 0.0, math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for k in range(20):
            d, n = 2 + k % 4, 2 + k % 3
            u = haar_unitary(d, rng)
            x = ObservableSet(tuple(u @ np.diag(rng.normal(size=d)) @ u.conj().T for _ in range(n)))
            comm_max = max(comm_max, optimal_cloning_fidelity(eigenstate_ensemble(x)).Q_c)
        for k in range(20):
            d, n = 2 + k % 4, 2 + k % 3
            x = ObservableSet(tuple(random_hermitian(d, rng) for _ in range(n)))
            assert not x.commuting()
            noncomm_min = min(noncomm_min, optimal_cloning_fidelity(eigenstate_ensemble(x)).Q_c)
    secs = time.perf_counter() - t0
    report(7, "Q_c vanishes exactly on commuting sets",
           comm_max <= 1e-6 and noncomm_min >= 1e-4,
           f"commuting max {comm_max:.2e}, non-commuting min {noncomm_min:.2e}", secs)


def test_criterion_8_figure_sweeps():
    t0 = time.perf_counter()
    by_d = sweep("vary_d", [2, 3, 5, 7, 11], 2)
    by_n = sweep("vary_N", range(2, 13), 11)
    secs = time.perf_counter() - t0

    def increasing(rows):
        qc = [r["Q_c"] for r in rows]
        return all(b > a for a, b in zip(qc, qc[1:]))

    below = all(r["Q_c"] < (1 - 1 / r["N"]) * (1 - 1 / r["d"]) for r in by_d + by_n)
    report(8, "sweeps increase strictly and stay below (1-1/N)(1-1/d)",
           increasing(by_d) and increasing(by_n) and below and secs < 10,
           f"{len(by_d)} d-rows, {len(by_n)} N-rows", secs)


def test_criterion_9_measure_and_reconstruct():
    t0 = time.perf_counter()
    exact = True
    dev = 0.0
    for d in (2, 3, 5, 7):
        for n in range(1, d + 2):
            f_mr, _ = mr_fidelity_bounds(n, d)
            exact &= f_mr == (n + d - 1) / (n * d)
            ens = ensemble_from_bases(mub_bases(d, n))
            for member in ens.groups():
                f0 = average_cloning_fidelity(ens, member, params_from_q(d, 0.0))
                dev = max(dev, abs(f0 - f_mr))
    secs = time.perf_counter() - t0
    report(9, "measure-and-reconstruct fidelity equals the q=0 cloner",
           exact and dev <= 1e-12, f"exact formula {exact}, max dev {dev:.2e}", secs)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
