"""Observable sets, their eigenstate ensembles, MUB families and participation sums."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPrime, TooManyBases
from .qmath import (
    HERMITIAN_TOL,
    OrthonormalBasis,
    as_matrix,
    check_hermitian,
    hermitian_eigensystem,
)


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """N Hermitian d x d observables."""

    observables: tuple[np.ndarray, ...]
    labels: tuple[str, ...] | None = None
    tol: float = HERMITIAN_TOL

    def __post_init__(self):
        obs = tuple(as_matrix(x) for x in self.observables)
        if not obs:
            raise ValueError("an observable set needs at least one observable")
        d = obs[0].shape[0]
        for k, x in enumerate(obs):
            if x.shape != (d, d):
                raise DimensionMismatch(f"observable {k} has shape {x.shape}, expected {(d, d)}")
            check_hermitian(x, self.tol)
            x.setflags(write=False)
        object.__setattr__(self, "observables", obs)
        if self.labels is not None:
            if len(self.labels) != len(obs):
                raise ValueError("labels and observables differ in length")
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.observables[0].shape[0]

    def __len__(self) -> int:
        return len(self.observables)

    def commuting(self, tol: float = 1e-9) -> bool:
        obs = self.observables
        return all(
            np.max(np.abs(obs[i] @ obs[j] - obs[j] @ obs[i])) < tol
            for i in range(len(obs))
            for j in range(i + 1, len(obs))
        )


@dataclass(frozen=True, eq=False)
class EigenstateEnsemble:
    """Uniform ensemble of the N*d eigenstates of an observable set.

    ``states`` has shape ``(M, d)``; rows ``l*d .. l*d+d-1`` are the
    eigenbasis of observable ``l``.
    """

    states: np.ndarray
    n_groups: int

    def __post_init__(self):
        s = np.array(self.states, dtype=complex)
        if s.ndim != 2 or s.shape[0] != self.n_groups * s.shape[1]:
            raise DimensionMismatch(f"states of shape {s.shape} do not hold {self.n_groups} bases")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def weight(self) -> float:
        return 1.0 / self.size

    def group(self, l: int) -> OrthonormalBasis:
        d = self.dim
        return OrthonormalBasis(self.states[l * d:(l + 1) * d].T)

    def groups(self) -> list[OrthonormalBasis]:
        return [self.group(l) for l in range(self.n_groups)]


@dataclass(frozen=True)
class ParticipationReport:
    A_m: np.ndarray = field(repr=False)
    B_m: np.ndarray = field(repr=False)
    A: float
    B: float


def eigenstate_ensemble(x: ObservableSet, tol: float = HERMITIAN_TOL) -> EigenstateEnsemble:
    rows = []
    for obs in x.observables:
        _, basis = hermitian_eigensystem(obs, tol)
        rows.append(basis.vectors.T)
    return EigenstateEnsemble(np.vstack(rows), len(x))


def ensemble_from_bases(bases: Sequence[OrthonormalBasis]) -> EigenstateEnsemble:
    return EigenstateEnsemble(np.vstack([b.vectors.T for b in bases]), len(bases))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, int(n**0.5) + 1))


def mub_bases(d: int, n: int | None = None) -> list[OrthonormalBasis]:
    """First ``n`` of the d+1 mutually unbiased bases for prime ``d``.

    The computational basis comes first, followed by the bases with kets
    ``sum_k w^(r k^2 + j k) |k> / sqrt(d)`` for r = 0..d-1, ``w = exp(2 pi i/d)``.
    For d = 2 the quadratic phase is ``i^(r k)`` instead, giving Z, X, Y.
    """
    if not is_prime(d):
        raise NotPrime(f"d={d} is not prime")
    n = d + 1 if n is None else n
    if n < 1:
        raise ValueError("need at least one basis")
    if n > d + 1:
        raise TooManyBases(f"at most d+1={d + 1} MUBs exist in dimension {d}")
    k = np.arange(d)
    out = [OrthonormalBasis.standard(d)]
    for r in range(n - 1):
        cols = []
        for j in range(d):
            if d == 2:
                phase = (1j ** (r * k)) * (-1.0) ** (j * k)
            else:
                phase = np.exp(2j * np.pi * ((r * k * k + j * k) % d) / d)
            cols.append(phase / np.sqrt(d))
        out.append(OrthonormalBasis(np.column_stack(cols)))
    return out


def observable_from_basis(basis: OrthonormalBasis) -> np.ndarray:
    """Hermitian operator with spectrum d, d-1, ..., 1 on the given kets."""
    d = basis.dim
    v = basis.vectors
    return (v * np.arange(d, 0, -1)) @ v.conj().T


def mub_family(d: int, n: int) -> ObservableSet:
    bases = mub_bases(d, n)
    return ObservableSet(
        tuple(observable_from_basis(b) for b in bases),
        labels=tuple(f"mub{l}" for l in range(n)),
    )


def _overlaps(states: np.ndarray) -> np.ndarray:
    g = states.conj() @ states.T
    return np.abs(g) ** 2


def is_mutually_unbiased(x: ObservableSet, tol: float = 1e-9) -> bool:
    ens = eigenstate_ensemble(x)
    d = ens.dim
    ov = _overlaps(ens.states)
    target = np.full_like(ov, 1.0 / d)
    for l in range(ens.n_groups):
        sl = slice(l * d, (l + 1) * d)
        target[sl, sl] = np.eye(d)
    return bool(np.max(np.abs(ov - target)) <= tol)


def participation(s: EigenstateEnsemble, b: OrthonormalBasis) -> ParticipationReport:
    """Fourth-power overlaps of every ensemble state with the basis kets."""
    if s.dim != b.dim:
        raise DimensionMismatch(f"ensemble is {s.dim}-dim, basis is {b.dim}-dim")
    w = np.abs(s.states.conj() @ b.vectors) ** 2  # w[m, i] = |<e_i|psi_m>|^2
    a_m = np.sum(w**2, axis=1)
    b_m = 1.0 - a_m
    a = float(np.sum(a_m))
    return ParticipationReport(A_m=a_m, B_m=b_m, A=a, B=float(s.size - a))


def participation_total(states: np.ndarray, u: np.ndarray) -> float:
    """A(S, B) for raw arrays: ``states`` rows and the columns of ``u``."""
    w = np.abs(states.conj() @ u) ** 2
    return float(np.sum(w * w))


# JSON observable-set format: {"dim": d, "observables": [[[[re, im], ...], ...], ...]}

def observable_set_from_json(data: dict, tol: float = HERMITIAN_TOL) -> ObservableSet:
    if not isinstance(data, dict):
        raise ValueError("top level must be an object with 'dim' and 'observables'")
    if "dim" not in data:
        raise ValueError("missing field 'dim'")
    if "observables" not in data:
        raise ValueError("missing field 'observables'")
    d = data["dim"]
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"field 'dim' must be a positive integer, got {d!r}")
    raw = data["observables"]
    if not isinstance(raw, list) or not raw:
        raise ValueError("field 'observables' must be a non-empty list")
    mats = []
    for k, m in enumerate(raw):
        where = f"observables[{k}]"
        if not isinstance(m, list) or len(m) != d:
            raise ValueError(f"{where}: expected {d} rows")
        rows = []
        for i, row in enumerate(m):
            if not isinstance(row, list) or len(row) != d:
                raise ValueError(f"{where}[{i}]: expected {d} entries")
            vals = []
            for j, z in enumerate(row):
                if (
                    not isinstance(z, list)
                    or len(z) != 2
                    or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)
                ):
                    raise ValueError(f"{where}[{i}][{j}]: expected [re, im], got {z!r}")
                vals.append(complex(z[0], z[1]))
            rows.append(vals)
        mat = np.array(rows, dtype=complex)
        try:
            check_hermitian(mat, tol)
        except NotHermitian as exc:
            raise ValueError(f"{where}: not Hermitian ({exc})") from exc
        mats.append(mat)
    labels = data.get("labels")
    try:
        return ObservableSet(tuple(mats), labels=tuple(labels) if labels else None, tol=tol)
    except Exception as exc:  # re-raise with a field pointer
        raise ValueError(f"observables: {exc}") from exc


def observable_set_to_json(x: ObservableSet) -> dict:
    out = {
        "dim": x.dim,
        "observables": [
            [[[float(z.real), float(z.imag)] for z in row] for row in m] for m in x.observables
        ],
    }
    if x.labels:
        out["labels"] = list(x.labels)
    return out


def load_observable_set(path: str | Path, tol: float = HERMITIAN_TOL) -> ObservableSet:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return observable_set_from_json(data, tol)
