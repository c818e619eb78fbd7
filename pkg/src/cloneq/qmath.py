"""Dense complex linear algebra used by the cloning simulations.

Matrices are plain ``numpy`` complex arrays. Kets are 1-D arrays; a basis
stores its kets as the columns of a square matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NotDensityMatrix,
    NotHermitian,
    NotOrthonormal,
    NotSquare,
)

HERMITIAN_TOL = 1e-9
DENSITY_TOL = 1e-9
ORTHONORMAL_TOL = 1e-9


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_ket(v) -> np.ndarray:
    k = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(k)):
        raise ValueError("ket has non-finite entries")
    return k


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def check_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix is {a.shape[0]}x{a.shape[1]}")


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    check_square(a)
    dev = float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0
    if dev > tol:
        raise NotHermitian(f"max|H - H^dagger| = {dev:.3e} exceeds {tol:.1e}")


def check_density(rho: np.ndarray, tol: float = DENSITY_TOL) -> None:
    try:
        check_hermitian(rho, tol)
    except NotHermitian as exc:
        raise NotDensityMatrix(str(exc)) from exc
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise NotDensityMatrix(f"trace {tr.real:.12g} is not 1")
    lam_min = float(np.linalg.eigvalsh((rho + dagger(rho)) / 2).min())
    if lam_min < -tol:
        raise NotDensityMatrix(f"negative eigenvalue {lam_min:.3e}")


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entry magnitude of ``[a, b]``."""
    return float(np.max(np.abs(a @ b - b @ a)))


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """An ordered orthonormal basis; ``vectors[:, i]`` is the i-th ket."""

    vectors: np.ndarray

    def __post_init__(self):
        v = as_matrix(self.vectors)
        check_square(v)
        gram = dagger(v) @ v
        dev = float(np.max(np.abs(gram - np.eye(v.shape[0])))) if v.size else 0.0
        if dev > ORTHONORMAL_TOL:
            raise NotOrthonormal(f"Gram matrix deviates from identity by {dev:.3e}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def kets(self) -> list[np.ndarray]:
        return [self.vectors[:, i] for i in range(self.dim)]

    @classmethod
    def standard(cls, d: int) -> "OrthonormalBasis":
        return cls(np.eye(d, dtype=complex))

    @classmethod
    def from_kets(cls, kets) -> "OrthonormalBasis":
        return cls(np.column_stack([as_ket(k) for k in kets]))

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(k, k.conj()) for k in self.kets]


def _canonical_span(v: np.ndarray) -> np.ndarray:
    """Orthonormal kets spanning ``range(v)``, fixed by Gram-Schmidt on e_0, e_1, ...

    ``v`` has orthonormal columns. Canonical vectors are projected onto the
    subspace in index order and kept when their residual is not negligible,
    so the output does not depend on which eigenvectors LAPACK returned.
    """
    d, k = v.shape
    out: list[np.ndarray] = []
    for j in range(d):
        if len(out) == k:
            break
        w = v @ v[j].conj()  # projection of e_j onto span(v)
        for _ in range(2):
            for u in out:
                w = w - u * np.vdot(u, w)
        nrm = np.linalg.norm(w)
        if nrm > 1e-6:
            out.append(w / nrm)
    return np.column_stack(out)


def hermitian_eigensystem(
    h, tol: float = HERMITIAN_TOL
) -> tuple[np.ndarray, OrthonormalBasis]:
    """Eigenvalues in descending order and a matching orthonormal eigenbasis.

    Eigenvalues closer than ``tol`` form one cluster; every cluster (including
    singletons) gets its kets from :func:`_canonical_span`, which also pins the
    global phase of non-degenerate eigenvectors.

    Raises:
        NotSquare: ``h`` is not square.
        NotHermitian: ``max|h - h^dagger| > tol``.
    """
    h = as_matrix(h)
    check_hermitian(h, tol)
    lam, vec = np.linalg.eigh((h + dagger(h)) / 2)
    lam, vec = lam[::-1], vec[:, ::-1]
    cols = []
    start = 0
    d = len(lam)
    for stop in range(1, d + 1):
        if stop == d or lam[stop - 1] - lam[stop] >= tol:
            cols.append(_canonical_span(vec[:, start:stop]))
            start = stop
    return lam.copy(), OrthonormalBasis(np.column_stack(cols))


def state_fidelity(rho, psi, tol: float = DENSITY_TOL) -> float:
    """Return ``<psi|rho|psi>`` for a density matrix and a unit ket."""
    rho = as_matrix(rho)
    psi = as_ket(psi)
    if rho.shape[0] != psi.shape[0]:
        raise DimensionMismatch(f"rho is {rho.shape[0]}-dim, psi is {psi.shape[0]}-dim")
    check_density(rho, tol)
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise DimensionMismatch("psi is not normalised")
    val = np.vdot(psi, rho @ psi)
    if abs(val.imag) > 1e-10:
        raise NotDensityMatrix(f"fidelity has imaginary part {val.imag:.3e}")
    return float(val.real)


def partial_trace(state, keep: int | str, dims: tuple[int, int, int]) -> np.ndarray:
    """Reduce a tripartite density matrix on A(x)B(x)C to one subsystem.

    Args:
        state: density matrix of size ``dA*dB*dC``.
        keep: ``0``/``"A"``, ``1``/``"B"`` or ``2``/``"C"``.
        dims: ``(dA, dB, dC)``.
    """
    state = as_matrix(state)
    dims = tuple(int(x) for x in dims)
    if len(dims) != 3:
        raise DimensionMismatch("dims must have three entries")
    n = dims[0] * dims[1] * dims[2]
    if state.shape != (n, n):
        raise DimensionMismatch(f"state is {state.shape}, dims imply {(n, n)}")
    idx = {"A": 0, "B": 1, "C": 2}.get(keep, keep)
    if idx not in (0, 1, 2):
        raise ValueError(f"unknown subsystem {keep!r}")
    t = state.reshape(dims + dims)
    letters = "abc"
    row = "".join(letters[k] if k != idx else "x" for k in range(3))
    col = "".join(letters[k] if k != idx else "y" for k in range(3))
    return np.einsum(f"{row}{col}->xy", t)


def partial_trace_pure(vec, keep: int | str, dims: tuple[int, int, int]) -> np.ndarray:
    """Same as :func:`partial_trace` for ``|vec><vec|`` without forming it."""
    vec = as_ket(vec)
    dims = tuple(int(x) for x in dims)
    if vec.shape[0] != dims[0] * dims[1] * dims[2]:
        raise DimensionMismatch(f"vector length {vec.shape[0]} does not match dims {dims}")
    idx = {"A": 0, "B": 1, "C": 2}.get(keep, keep)
    t = np.moveaxis(vec.reshape(dims), idx, 0).reshape(dims[idx], -1)
    return t @ dagger(t)


def haar_unitary(d: int, seed: int | np.random.Generator = 0) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary via QR of a complex Ginibre matrix.

    The diagonal of R is made positive so the distribution is exactly Haar.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + dagger(a)) / 2


def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)
