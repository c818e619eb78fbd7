"""Closed-form optimal cloner for a pair of qubit observables.

A qubit observable ``alpha1 I + alpha2 a.sigma`` has eigenprojectors
``(I +- a.sigma)/2``, so only the Bloch direction ``a`` matters here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import ObservableSet
from .errors import NotUnit
from .qcm import CloneParams, f_avg

UNIT_TOL = 1e-12

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _unit(v, name: str = "v") -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise NotUnit(f"{name} must have three components")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise NotUnit(f"|{name}| = {np.linalg.norm(v):.15g}, expected 1")
    return v


def bloch_to_observable(v) -> np.ndarray:
    """``v . sigma`` for a unit Bloch vector."""
    v = _unit(v)
    return sum(c * s for c, s in zip(v, PAULI))


@dataclass(frozen=True, eq=False)
class BlochPair:
    """Two qubit observables given by unit Bloch vectors.

    ``alpha`` and ``beta`` are the affine coefficients ``(x1, x2)`` in
    ``x1 I + x2 v.sigma``; they leave the eigenbases unchanged and only the
    requirement ``x2 != 0`` is enforced.
    """

    a: np.ndarray
    b: np.ndarray
    alpha: tuple[float, float] = (0.0, 1.0)
    beta: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "a", _unit(self.a, "a"))
        object.__setattr__(self, "b", _unit(self.b, "b"))
        if self.alpha[1] == 0 or self.beta[1] == 0:
            raise ValueError("alpha2 and beta2 must be non-zero")

    @property
    def overlap(self) -> float:
        return float(np.clip(self.a @ self.b, -1.0, 1.0))

    @property
    def gamma(self) -> float:
        return math.acos(self.overlap)

    def observables(self) -> ObservableSet:
        obs = tuple(
            x1 * np.eye(2) + x2 * bloch_to_observable(v)
            for v, (x1, x2) in ((self.a, self.alpha), (self.b, self.beta))
        )
        return ObservableSet(obs, labels=("A", "B"))


@dataclass(frozen=True, eq=False)
class QubitCloneSolution:
    A_opt: float
    G: float
    q_opt: float
    p_opt: float
    r_plus: np.ndarray | None
    r_minus: np.ndarray | None
    r_opt: np.ndarray
    F_opt: float
    Q_c: float
    degenerate_direction: bool

    @property
    def params(self) -> CloneParams:
        return CloneParams(2, self.p_opt, self.q_opt)


def _normalised(v: np.ndarray) -> np.ndarray | None:
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else None


def qubit_optimal_cloner(pair: BlochPair) -> QubitCloneSolution:
    """Optimal symmetric cloner for the four eigenstates of two qubit observables.

    ``r_plus`` and ``r_minus`` are the two stationary directions ``(a +- b)/|a +- b|``;
    ``r_opt`` is the maximising one (``r_plus`` when ``a.b >= 0``). When
    ``a.b = 0`` every direction in the a-b plane is optimal and
    ``degenerate_direction`` is set.
    """
    c = abs(pair.overlap)
    a_opt = 3.0 + c
    g = math.sqrt(2.0) * (1.0 - c) / (1.0 + c)
    q = 0.5 * math.sqrt(1.0 - 1.0 / math.sqrt(1.0 + g * g))
    p = math.sqrt(max(0.0, 1.0 - 2.0 * q * q))
    f = f_avg(a_opt / 4.0, 2, p, q)
    r_plus = _normalised(pair.a + pair.b)
    r_minus = _normalised(pair.a - pair.b)
    r_opt = r_plus if pair.overlap >= 0 else r_minus
    return QubitCloneSolution(
        A_opt=a_opt,
        G=g,
        q_opt=q,
        p_opt=p,
        r_plus=r_plus,
        r_minus=r_minus,
        r_opt=r_opt,
        F_opt=f,
        Q_c=1.0 - f,
        degenerate_direction=c < 1e-12,
    )


def participation_along(pair: BlochPair, r) -> float:
    """A for the basis measuring along Bloch direction ``r``."""
    r = np.asarray(r, dtype=float)
    return 2.0 + float(r @ pair.a) ** 2 + float(r @ pair.b) ** 2


def qubit_A_profile(pair: BlochPair, theta_grid: int) -> np.ndarray:
    """Rows ``(theta, A(theta))`` for measurement directions in the a-b plane.

    ``theta`` is measured from ``a`` towards ``b`` over ``[0, pi)``.
    """
    if theta_grid < 2:
        raise ValueError("theta_grid must be >= 2")
    a = pair.a
    perp = pair.b - (a @ pair.b) * a
    if np.linalg.norm(perp) < 1e-12:
        # collinear pair: any direction orthogonal to a spans the plane
        trial = np.eye(3)[np.argmin(np.abs(a))]
        perp = trial - (a @ trial) * a
    perp = perp / np.linalg.norm(perp)
    thetas = np.arange(theta_grid) * (math.pi / theta_grid)
    vals = [participation_along(pair, math.cos(t) * a + math.sin(t) * perp) for t in thetas]
    return np.column_stack([thetas, vals])
