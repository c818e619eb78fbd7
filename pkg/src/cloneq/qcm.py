"""Symmetric 1->2 quantum cloning machine defined relative to a cloning basis.

The machine maps a cloning-basis ket ``|i>`` (with blank ancilla and machine
register) to::

    p |i>|i>|X_i> + q sum_{j != i} (|i>|j> + |j>|i>) |X_j>

with real ``p, q >= 0`` and ``p**2 + 2 (d-1) q**2 = 1``. The machine states
``|X_j>`` are the canonical basis of a d-dimensional register.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .ensembles import EigenstateEnsemble, participation
from .errors import DimensionMismatch, QOutOfRange
from .qmath import OrthonormalBasis, as_ket, partial_trace, partial_trace_pure

UNITARITY_TOL = 1e-12
ORACLE_MAX_DIM = 16


def q_regime_max(d: int) -> float:
    """Largest q with p**2 >= 2 p q, i.e. the universal cloner's q."""
    return 1.0 / math.sqrt(2 * (d + 1))


def q_unitary_max(d: int) -> float:
    return 1.0 / math.sqrt(2 * (d - 1))


def universal_fidelity(d: int) -> float:
    return (d + 3) / (2 * (d + 1))


@dataclass(frozen=True)
class CloneParams:
    d: int
    p: float
    q: float
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("cloner needs d >= 2")
        if self.p < 0 or self.q < 0:
            raise QOutOfRange(f"p={self.p}, q={self.q} must be non-negative")
        dev = self.p**2 + 2 * (self.d - 1) * self.q**2 - 1.0
        if abs(dev) > UNITARITY_TOL:
            raise QOutOfRange(f"p^2 + 2(d-1)q^2 - 1 = {dev:.3e}")

    @property
    def in_regime(self) -> bool:
        # p^2 >= 2pq  <=>  p >= 2q for p > 0
        return self.p - 2 * self.q >= -UNITARITY_TOL


@dataclass(frozen=True, eq=False)
class CloneOutput:
    clone: np.ndarray
    fidelity: float
    clone_b: np.ndarray | None = None  # B marginal, oracle only


def params_from_q(d: int, q: float) -> CloneParams:
    if d < 2:
        raise ValueError("cloner needs d >= 2")
    qmax = q_unitary_max(d)
    if not (0.0 <= q <= qmax * (1 + 1e-14)):
        raise QOutOfRange(f"q={q} outside [0, {qmax}] for d={d}")
    q = min(q, qmax)
    p = math.sqrt(max(0.0, 1.0 - 2 * (d - 1) * q * q))
    return CloneParams(d, p, q)


def universal_params(d: int) -> CloneParams:
    q = q_regime_max(d)
    return CloneParams(d, 2 * q, q, meta={"universal": True, "fidelity": universal_fidelity(d)})


def _check(psi: np.ndarray, b: OrthonormalBasis, params: CloneParams) -> None:
    if psi.shape[0] != b.dim or params.d != b.dim:
        raise DimensionMismatch(
            f"psi dim {psi.shape[0]}, basis dim {b.dim}, params dim {params.d}"
        )


def fidelity_from_participation(a: float, params: CloneParams) -> float:
    """Clone fidelity of a pure state with participation ``a = sum_i |alpha_i|^4``."""
    p, q, d = params.p, params.q, params.d
    return a * (p * p + (d - 2) * q * q) + (1.0 - a) * (2 * p * q + (d - 2) * q * q) + q * q


def clone_output_closed(psi, b: OrthonormalBasis, params: CloneParams) -> CloneOutput:
    psi = as_ket(psi)
    _check(psi, b, params)
    p, q, d = params.p, params.q, params.d
    alpha = b.vectors.conj().T @ psi
    w = np.abs(alpha) ** 2
    diag_c = p * p + (d - 2) * q * q
    off_c = 2 * p * q + (d - 2) * q * q
    c = off_c * np.outer(alpha, alpha.conj())
    c[np.diag_indices(d)] = diag_c * w
    c += q * q * np.eye(d)
    v = b.vectors
    clone = v @ c @ v.conj().T
    a = float(np.sum(w * w))
    return CloneOutput(clone=clone, fidelity=fidelity_from_participation(a, params))


def cloning_images(b: OrthonormalBasis, params: CloneParams) -> np.ndarray:
    """Images of the cloning-basis kets on A(x)B(x)C, one per column (d**3 x d)."""
    d = b.dim
    if params.d != d:
        raise DimensionMismatch(f"basis dim {d}, params dim {params.d}")
    if d > ORACLE_MAX_DIM:
        raise ValueError(f"tripartite oracle is capped at d <= {ORACLE_MAX_DIM}")
    e = [b.vectors[:, i] for i in range(d)]
    x = np.eye(d, dtype=complex)
    out = np.zeros((d**3, d), dtype=complex)
    for i in range(d):
        img = params.p * np.kron(np.kron(e[i], e[i]), x[i])
        for j in range(d):
            if j != i:
                img = img + params.q * np.kron(np.kron(e[i], e[j]) + np.kron(e[j], e[i]), x[j])
        out[:, i] = img
    return out


def clone_output_oracle(psi, b: OrthonormalBasis, params: CloneParams) -> CloneOutput:
    """Run the machine on the full tripartite space and trace out B, C (and A, C)."""
    psi = as_ket(psi)
    _check(psi, b, params)
    d = b.dim
    alpha = b.vectors.conj().T @ psi
    out = cloning_images(b, params) @ alpha
    dims = (d, d, d)
    if d <= 8:
        rho = np.outer(out, out.conj())
        ra = partial_trace(rho, "A", dims)
        rb = partial_trace(rho, "B", dims)
    else:
        ra = partial_trace_pure(out, "A", dims)
        rb = partial_trace_pure(out, "B", dims)
    fid = float(np.vdot(psi, ra @ psi).real)
    return CloneOutput(clone=ra, fidelity=fid, clone_b=rb)


def f_avg(a_ratio: float, d: int, p: float, q: float) -> float:
    """Average clone fidelity from the participation fraction ``A/M``."""
    return a_ratio * (p * p - 2 * p * q) + 2 * p * q + (d - 1) * q * q


def f_avg_q(a_ratio: float, d: int, q: float) -> float:
    p = math.sqrt(max(0.0, 1.0 - 2 * (d - 1) * q * q))
    return f_avg(a_ratio, d, p, q)


def average_cloning_fidelity(
    s: EigenstateEnsemble, b: OrthonormalBasis, params: CloneParams
) -> float:
    if s.dim != b.dim or params.d != b.dim:
        raise DimensionMismatch(f"ensemble dim {s.dim}, basis dim {b.dim}, params dim {params.d}")
    a = participation(s, b).A
    return f_avg(a / s.size, params.d, params.p, params.q)


def average_cloning_fidelity_direct(
    s: EigenstateEnsemble, b: OrthonormalBasis, params: CloneParams, oracle: bool = False
) -> float:
    """Mean of ``<psi_m|clone_m|psi_m>`` summed state by state in index order."""
    run = clone_output_oracle if oracle else clone_output_closed
    total = 0.0
    for psi in s.states:
        out = run(psi, b, params)
        total += float(np.vdot(psi, out.clone @ psi).real)
    return total / s.size
