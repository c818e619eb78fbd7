"""Oracle cross-checks run by ``cloneq verify``.

Each check measures a deviation between a closed form and an independent
route (tripartite simulation, grid search, numerical basis search) and
compares it with a fixed tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import ensembles, optimal, qcm, qubit
from .qmath import haar_unitary, random_ket


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


def _random_basis(d, rng):
    return ensembles.OrthonormalBasis(haar_unitary(d, rng))


def check_clone_oracle(dims, trials, rng) -> float:
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            params = qcm.params_from_q(d, rng.uniform(0, qcm.q_unitary_max(d)))
            basis = _random_basis(d, rng)
            psi = random_ket(d, rng)
            closed = qcm.clone_output_closed(psi, basis, params)
            orc = qcm.clone_output_oracle(psi, basis, params)
            worst = max(
                worst,
                float(np.max(np.abs(closed.clone - orc.clone))),
                float(np.max(np.abs(orc.clone - orc.clone_b))),
                abs(closed.fidelity - orc.fidelity),
            )
    return worst


def check_isometry(dims, trials, rng) -> float:
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            params = qcm.params_from_q(d, rng.uniform(0, qcm.q_unitary_max(d)))
            img = qcm.cloning_images(_random_basis(d, rng), params)
            worst = max(worst, float(np.max(np.abs(img.conj().T @ img - np.eye(d)))))
    return worst


def check_universal(rng) -> float:
    worst = 0.0
    for d in range(2, 13):
        params = qcm.universal_params(d)
        basis = _random_basis(d, rng)
        fids = [
            qcm.clone_output_closed(random_ket(d, rng), basis, params).fidelity for _ in range(20)
        ]
        worst = max(worst, max(abs(f - (d + 3) / (2 * (d + 1))) for f in fids))
    return worst


def check_q_grid(cases, grid, rng) -> float:
    """Largest excess of a grid point over the closed-form optimum."""
    worst = 0.0
    for _ in range(cases):
        d = int(rng.integers(2, 9))
        lo = max(1 / d, 2 / (d + 1))
        ratio = rng.uniform(lo, 1.0)
        m = 1000
        params = optimal.q_optimal(ratio * m, m, d)
        best = qcm.f_avg(ratio, d, params.p, params.q)
        qs = np.linspace(0.0, qcm.q_regime_max(d), grid)
        ps = np.sqrt(np.maximum(0.0, 1 - 2 * (d - 1) * qs**2))
        vals = ratio * (ps**2 - 2 * ps * qs) + 2 * ps * qs + (d - 1) * qs**2
        worst = max(worst, float(vals.max() - best))
    return max(worst, 0.0)


def check_g_angle() -> float:
    """G must equal tan(2 theta*) at the unconstrained optimum, sin(theta) = sqrt(2(d-1)) q."""
    worst = 0.0
    for d in (2, 3, 4, 6):
        for ratio in (0.6, 0.75, 0.9):
            k = math.sqrt(2 * (d - 1))

            def neg(th):
                return -qcm.f_avg(ratio, d, math.cos(th), math.sin(th) / k)

            th = minimize_scalar(neg, bounds=(0, math.pi / 2), method="bounded",
                                 options={"xatol": 1e-12}).x
            g = optimal.g_function(ratio * 1000, 1000, d)
            worst = max(worst, abs(math.tan(2 * th) - g) / max(1.0, abs(g)))
    return worst


def check_mub_recovery(cases, restarts) -> float:
    worst = 0.0
    for n, d in cases:
        s = ensembles.ensemble_from_bases(ensembles.mub_bases(d, n))
        _, a = optimal.optimize_basis(s, optimal.BasisOptConfig(restarts=restarts))
        worst = max(worst, abs(a - (n + d - 1)))
        for b in s.groups():
            worst = max(worst, abs(ensembles.participation(s, b).A - (n + d - 1)))
    return worst


def check_mub_pipeline(cases, restarts) -> float:
    worst = 0.0
    for n, d in cases:
        s = ensembles.ensemble_from_bases(ensembles.mub_bases(d, n))
        rep = optimal.optimal_cloning_fidelity(s, optimal.BasisOptConfig(restarts=restarts))
        worst = max(worst, abs(rep.F_opt - optimal.fopt_mub(n, d)[0]))
    return worst


def check_corollary() -> float:
    worst = 0.0
    for d in (2, 3, 5, 7):
        f, q = optimal.fopt_mub(d + 1, d)
        worst = max(worst, abs(q - 1 / math.sqrt(2 * (d + 1))), abs(f - (d + 3) / (2 * (d + 1))))
    return worst


def check_qubit_pipeline(pairs, rng) -> float:
    worst = 0.0
    for _ in range(pairs):
        a, b = (v / np.linalg.norm(v) for v in rng.normal(size=(2, 3)))
        pair = qubit.BlochPair(a, b)
        sol = qubit.qubit_optimal_cloner(pair)
        rep = optimal.optimal_cloning_fidelity(
            ensembles.eigenstate_ensemble(pair.observables()), optimal.BasisOptConfig(restarts=8)
        )
        worst = max(worst, abs(sol.Q_c - rep.Q_c), abs(sol.A_opt - rep.A_opt))
    return worst


def check_measure_reconstruct() -> float:
    worst = 0.0
    for d in (2, 3, 5):
        for n in range(1, d + 2):
            f_mr, _ = optimal.mr_fidelity_bounds(n, d)
            s = ensembles.ensemble_from_bases(ensembles.mub_bases(d, n))
            f0 = qcm.average_cloning_fidelity(s, s.group(0), qcm.params_from_q(d, 0.0))
            worst = max(worst, abs(f0 - f_mr), abs(f_mr - (n + d - 1) / (n * d)))
    return worst


def check_sweeps() -> float:
    """Count of rows breaking strict growth in Q_c or the ``Q_c < Q_bound`` ordering."""
    bad = 0
    for rows in (
        optimal.sweep("vary_d", [2, 3, 5, 7, 11], 2),
        optimal.sweep("vary_N", range(2, 13), 11),
    ):
        qc = [r["Q_c"] for r in rows]
        bad += sum(b <= a for a, b in zip(qc, qc[1:]))
        bad += sum(r["Q_c"] >= r["Q_bound"] for r in rows)
    return float(bad)


def run_checks(level: str = "fast", seed: int = 0) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    full = level == "full"
    rng = np.random.default_rng(seed)
    dims = [2, 3, 4, 5, 6] if full else [2, 3, 4]
    mub_cases = [(2, 2), (3, 2), (2, 3), (4, 3)] + ([(2, 5), (3, 5)] if full else [])
    plan: list[tuple[str, Callable[[], float], float]] = [
        ("closed form vs tripartite oracle", lambda: check_clone_oracle(dims, 200 if full else 30, rng), 1e-10),
        ("machine isometry", lambda: check_isometry(dims, 20, rng), 1e-10),
        ("universal cloner fidelity", lambda: check_universal(rng), 1e-12),
        ("q_opt vs grid search", lambda: check_q_grid(50 if full else 20, 100_000 if full else 20_000, rng), 1e-9),
        ("G equals tan(2 theta_opt)", check_g_angle, 1e-6),
        ("full MUB set gives the universal cloner", check_corollary, 1e-12),
        ("MUB A_opt recovery by basis search", lambda: check_mub_recovery(mub_cases, 32 if full else 8), 1e-4),
        ("MUB pipeline vs closed form", lambda: check_mub_pipeline(mub_cases, 32 if full else 8), 1e-6),
        ("qubit pipeline vs closed form", lambda: check_qubit_pipeline(50 if full else 8, rng), 1e-4),
        ("measure-and-reconstruct at q=0", check_measure_reconstruct, 1e-12),
        ("figure sweeps ordering", check_sweeps, 0.0),
    ]
    out = []
    for name, fn, tol in plan:
        t0 = time.perf_counter()
        dev = fn()
        out.append(CheckResult(name, float(dev), tol, time.perf_counter() - t0))
    return out
