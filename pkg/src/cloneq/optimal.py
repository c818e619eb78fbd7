"""Optimal symmetric cloners for eigenstate ensembles and the Q_c measure.

The average fidelity depends on the cloning basis only through the
participation sum ``A(S, B)``; inside the regime ``p >= 2q`` it is increasing
in ``A``, so the basis is optimised first and ``q`` afterwards in closed form.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .ensembles import (
    EigenstateEnsemble,
    ensemble_from_bases,
    is_prime,
    mub_bases,
    participation_total,
)
from .errors import ConvergenceWarning, TooManyBases
from .qmath import OrthonormalBasis, haar_unitary
from .qcm import (
    CloneParams,
    f_avg,
    f_avg_q,
    params_from_q,
    q_regime_max,
    universal_fidelity,
)

log = logging.getLogger(__name__)

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class BasisOptConfig:
    restarts: int = 32
    max_iters: int = 500
    step_tol: float = 1e-10
    value_tol: float = 1e-9
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_tol <= 0 or self.value_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class RestartRecord:
    index: int
    start: str
    value: float
    iterations: int
    grad_norm: float
    converged: bool


@dataclass(frozen=True, eq=False)
class BasisSearchResult:
    basis: OrthonormalBasis
    value: float
    records: tuple[RestartRecord, ...]
    best_index: int

    @property
    def converged(self) -> bool:
        return any(r.converged for r in self.records)


@dataclass(frozen=True, eq=False)
class CloneReport:
    A_opt: float
    M: int
    N: int
    d: int
    basis_opt: OrthonormalBasis
    params_opt: CloneParams
    F_opt: float
    Q_c: float
    G: float
    bound_Qc: float
    bound_Q: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get("converged", True))

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "M": self.M,
            "A_opt": self.A_opt,
            "q_opt": self.params_opt.q,
            "p_opt": self.params_opt.p,
            "F_opt": self.F_opt,
            "Q_c": self.Q_c,
            "G": self.G,
            "bound_Qc": self.bound_Qc,
            "bound_Q": self.bound_Q,
            "q_branch": self.params_opt.meta.get("branch"),
            "basis_opt": [
                [[float(z.real), float(z.imag)] for z in row] for row in self.basis_opt.vectors
            ],
            "diagnostics": self.diagnostics,
        }


# --------------------------------------------------------------------------
# basis search


def _ascent_direction(states_c: np.ndarray, u: np.ndarray) -> tuple[float, np.ndarray]:
    """Value of A and its gradient in the anti-Hermitian chart ``U -> U expm(X)``."""
    c = states_c @ u  # c[m, i] = <psi_m|u_i>
    w = np.abs(c) ** 2
    value = float(np.sum(w * w))
    k = c.T @ (w * c.conj())
    y = 4.0 * k.conj()
    g = (y - y.conj().T) / 2
    return value, g


def _local_ascent(
    states: np.ndarray, u0: np.ndarray, cfg: BasisOptConfig
) -> tuple[np.ndarray, float, int, float, bool]:
    states_c = states.conj()
    u = u0
    value, g = _ascent_direction(states_c, u)
    t = 0.1
    grad_tol = math.sqrt(cfg.value_tol)
    it = 0
    gn = float(np.linalg.norm(g))
    converged = gn <= grad_tol
    while not converged and it < cfg.max_iters:
        it += 1
        slope = gn * gn
        accepted = False
        for _ in range(60):
            cand = u @ expm(t * g)
            cval = participation_total(states, cand)
            if cval >= value + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no ascent possible at machine precision: treat as stationary
            converged = True
            break
        step = t * gn
        u = cand
        value, g = _ascent_direction(states_c, u)
        gn = float(np.linalg.norm(g))
        if gn <= grad_tol or step < cfg.step_tol:
            converged = True
        t = min(t * 2.0, 10.0)
    # re-orthonormalise accumulated rounding
    q, r = np.linalg.qr(u)
    u = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return u, participation_total(states, u), it, gn, converged


def search_basis(s: EigenstateEnsemble, cfg: BasisOptConfig | None = None) -> BasisSearchResult:
    """Maximise ``A(S, B)`` over orthonormal bases with multi-start local ascent.

    Starts are the member eigenbases of ``s`` followed by ``cfg.restarts``
    Haar-random unitaries seeded from ``cfg.seed``. Each start climbs along
    ``U expm(t G)`` with ``G`` the anti-Hermitian gradient and an Armijo
    backtracking step. The best value wins; ties keep the earlier start.
    """
    cfg = cfg or BasisOptConfig()
    d, m = s.dim, s.size
    starts: list[tuple[str, np.ndarray]] = [
        (f"member:{l}", s.group(l).vectors) for l in range(s.n_groups)
    ]
    starts += [
        (f"haar:{k}", haar_unitary(d, np.random.default_rng([cfg.seed, k])))
        for k in range(cfg.restarts)
    ]

    def run(item):
        return _local_ascent(s.states, np.array(item[1]), cfg)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(st) for st in starts]

    records = []
    best, best_val = 0, -math.inf
    for idx, ((label, _), (_, val, it, gn, conv)) in enumerate(zip(starts, results)):
        records.append(RestartRecord(idx, label, val, it, gn, conv))
        if val > best_val:
            best, best_val = idx, val
    u_best = results[best][0]
    value = min(max(best_val, m / d), float(m))
    res = BasisSearchResult(OrthonormalBasis(u_best), value, tuple(records), best)
    if not res.converged:
        warnings.warn(
            f"no basis-search restart converged within {cfg.max_iters} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    return res


def optimize_basis(
    s: EigenstateEnsemble, cfg: BasisOptConfig | None = None
) -> tuple[OrthonormalBasis, float]:
    res = search_basis(s, cfg)
    return res.basis, res.value


# --------------------------------------------------------------------------
# closed forms


def g_function(a_opt: float, m: int, d: int) -> float:
    """``4 (A - M) / ((M - 2A) sqrt(2(d-1)))``; signed infinity when M = 2A."""
    num = 4.0 * (a_opt - m)
    den = (m - 2.0 * a_opt) * math.sqrt(2 * (d - 1))
    if abs(m - 2.0 * a_opt) < SINGULAR_TOL:
        return math.copysign(math.inf, num) if num != 0 else math.inf
    return num / den


def _sgn(x: float) -> float:
    return float((x > 0) - (x < 0))


def q_optimal(a_opt: float, m: int, d: int) -> CloneParams:
    """Optimal cloner parameters for participation ``a_opt`` out of ``m`` states.

    The stationary point of the fidelity over ``p**2 + 2(d-1) q**2 = 1`` is
    taken from the signum-branch formula, then compared against the regime
    endpoints ``q = 0`` and ``q = 1/sqrt(2(d+1))``; the best admissible point
    is returned. ``meta["branch"]`` records which one won.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    ratio = a_opt / m
    base = 1.0 / (2.0 * math.sqrt(d - 1))
    g = g_function(a_opt, m, d)
    if abs(ratio - 0.5) < SINGULAR_TOL or math.isinf(g):
        q_closed = base
        branch = "half"
    else:
        q_closed = base * math.sqrt(max(0.0, 1.0 - _sgn(ratio - 0.5) / math.sqrt(1.0 + g * g)))
        branch = "closed"

    q_hi = q_regime_max(d)
    candidates = []
    if q_closed <= q_hi * (1 + 1e-12):
        candidates.append((min(q_closed, q_hi), branch))
    else:
        log.info("closed-form q=%.12g exceeds regime bound %.12g (A/M=%.12g, d=%d); clamping",
                 q_closed, q_hi, ratio, d)
    candidates += [(0.0, "endpoint:0"), (q_hi, "endpoint:regime")]
    best_q, best_name, best_f = candidates[0][0], candidates[0][1], f_avg_q(ratio, d, candidates[0][0])
    for q, name in candidates[1:]:
        f = f_avg_q(ratio, d, q)
        if f > best_f + 1e-15:
            best_q, best_name, best_f = q, name, f
    if q_closed > q_hi * (1 + 1e-12):
        best_name = "clamped"
    params = params_from_q(d, best_q)
    return CloneParams(
        d,
        params.p,
        params.q,
        meta={"branch": best_name, "q_closed": q_closed, "G": g, "fidelity": best_f},
    )


def optimal_from_participation(a_opt: float, m: int, d: int) -> tuple[CloneParams, float]:
    params = q_optimal(a_opt, m, d)
    return params, f_avg(a_opt / m, d, params.p, params.q)


def fopt_mub(n: int, d: int) -> tuple[float, float]:
    """Optimal fidelity and q for n mutually unbiased bases in dimension d."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > d + 1:
        raise TooManyBases(f"at most d+1={d + 1} MUBs exist in dimension {d}")
    params, f = optimal_from_participation(float(n + d - 1), n * d, d)
    return f, params.q


def qc_upper_bound(n: int, d: int) -> float:
    """Largest Q_c any n observables in dimension d can have."""
    if n <= d + 1:
        return 1.0 - fopt_mub(n, d)[0]
    return 1.0 - universal_fidelity(d)


def mr_fidelity_bounds(n: int, d: int) -> tuple[float, float]:
    """Measure-and-reconstruct fidelity of n MUBs and the matching Q bound."""
    return (n + d - 1) / (n * d), (1 - 1 / n) * (1 - 1 / d)


def optimal_cloning_fidelity(
    s: EigenstateEnsemble, cfg: BasisOptConfig | None = None
) -> CloneReport:
    cfg = cfg or BasisOptConfig()
    n, d, m = s.n_groups, s.dim, s.size
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        search = search_basis(s, cfg)
    params, f_opt = optimal_from_participation(search.value, m, d)
    q_hi = q_regime_max(d)
    diagnostics = {
        "converged": search.converged,
        "best_restart": search.best_index,
        "best_start": search.records[search.best_index].start,
        "q_branch": params.meta["branch"],
        "q_closed": params.meta["q_closed"],
        "F_at_q0": search.value / m,
        "F_at_regime_boundary": f_avg_q(search.value / m, d, q_hi),
        "restarts": [
            {
                "index": r.index,
                "start": r.start,
                "A": r.value,
                "iterations": r.iterations,
                "grad_norm": r.grad_norm,
                "converged": r.converged,
            }
            for r in search.records
        ],
    }
    if not search.converged:
        warnings.warn("basis search did not converge; report uses best found",
                      ConvergenceWarning, stacklevel=2)
    return CloneReport(
        A_opt=search.value,
        M=m,
        N=n,
        d=d,
        basis_opt=search.basis,
        params_opt=params,
        F_opt=f_opt,
        Q_c=1.0 - f_opt,
        G=params.meta["G"],
        bound_Qc=qc_upper_bound(n, d),
        bound_Q=mr_fidelity_bounds(n, d)[1],
        diagnostics=diagnostics,
    )


# --------------------------------------------------------------------------
# figure sweeps

SWEEP_COLUMNS = ("N", "d", "A_opt", "q_opt", "F_opt", "Q_c", "Q_bound")


def sweep_row(n: int, d: int, construct: bool = False, cfg: BasisOptConfig | None = None) -> dict:
    """One sweep row for n MUBs in dimension d.

    With ``construct`` the MUBs are built explicitly (prime d only) and pushed
    through the numerical pipeline instead of the closed form.
    """
    q_bound = mr_fidelity_bounds(n, d)[1]
    if construct:
        if not is_prime(d):
            from .errors import NotPrime

            raise NotPrime(f"d={d} is not prime; MUB construction needs prime d")
        rep = optimal_cloning_fidelity(ensemble_from_bases(mub_bases(d, n)), cfg)
        return dict(N=n, d=d, A_opt=rep.A_opt, q_opt=rep.params_opt.q,
                    F_opt=rep.F_opt, Q_c=rep.Q_c, Q_bound=q_bound)
    f, q = fopt_mub(n, d)
    return dict(N=n, d=d, A_opt=float(n + d - 1), q_opt=q, F_opt=f, Q_c=1.0 - f, Q_bound=q_bound)


def sweep(mode: str, values, fixed: int, construct: bool = False,
          cfg: BasisOptConfig | None = None) -> list[dict]:
    """Rows over ``values`` of d (``mode="vary_d"``, N fixed) or N (``"vary_N"``, d fixed)."""
    if mode == "vary_d":
        return [sweep_row(fixed, int(d), construct, cfg) for d in values]
    if mode == "vary_N":
        return [sweep_row(int(n), fixed, construct, cfg) for n in values]
    raise ValueError(f"unknown sweep mode {mode!r}")
