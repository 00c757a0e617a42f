"""Virtual mass-spring-damper links.

Continuous model per Cartesian axis::

    M * ddx + D * dx + K * x = F_ext

with state ``[x, dx]``, ``A = [[0, 1], [-K/M, -D/M]]`` and ``B = [0, 1/M]``.
Discretisation holds ``F_ext`` constant over each period (zero-order hold).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, gammaln

# |zeta - 1| below this counts as critically damped.
CRITICAL_BAND = 1e-3
# Entry-wise agreement required between the closed form and the expm oracle.
ORACLE_TOL = 1e-12


class ImpedanceError(ValueError):
    pass


def solve_critical_damping(M: float, K: float) -> float:
    """Damping that makes the link critically damped: ``D = 2 sqrt(M K)``."""
    if not (M > 0 and K > 0):
        raise ImpedanceError(f"M and K must be positive, got M={M!r}, K={K!r}")
    return 2.0 * math.sqrt(M * K)


@dataclass(frozen=True)
class ImpedanceParams:
    M: float = 1.9
    D: float = 12.6
    K: float = 20.88
    K_v: float = 10.0

    def __post_init__(self):
        if not (self.M > 0 and self.K > 0):
            raise ImpedanceError(f"M and K must be positive, got M={self.M}, K={self.K}")
        if not self.D >= 0:
            raise ImpedanceError(f"D must be non-negative, got {self.D}")
        for name in ("M", "D", "K", "K_v"):
            if not math.isfinite(getattr(self, name)):
                raise ImpedanceError(f"{name} must be finite")

    @classmethod
    def critically_damped_from(cls, M: float, K: float, K_v: float = 10.0):
        return cls(M=M, D=solve_critical_damping(M, K), K=K, K_v=K_v)

    @property
    def omega_n(self) -> float:
        return math.sqrt(self.K / self.M)

    @property
    def zeta(self) -> float:
        return self.D / (2.0 * math.sqrt(self.M * self.K))

    def critically_damped(self) -> bool:
        return abs(self.zeta - 1.0) < CRITICAL_BAND

    @property
    def A(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [-self.K / self.M, -self.D / self.M]])

    @property
    def B(self) -> np.ndarray:
        return np.array([0.0, 1.0 / self.M])


def external_force(K_v: float, v_leader):
    """Force exerted on a leader-coupled link, proportional to leader velocity."""
    return K_v * np.asarray(v_leader, dtype=float)


def expm_oracle(params: ImpedanceParams, T: float):
    """Reference ``(A_d, B_d)`` from scaling-and-squaring on the augmented matrix."""
    aug = np.zeros((3, 3))
    aug[:2, :2] = params.A
    aug[:2, 2] = params.B
    phi = expm(aug * T)
    return phi[:2, :2], phi[:2, 2]


def _closed_form(params: ImpedanceParams, T: float):
    # Cayley-Hamilton about the repeated root lam = -D/(2M):
    #   e^{AT} = e^{lam T} (c0 I + c1 N),  N = A - lam I,  N^2 = mu2 I.
    # mu2 is exactly zero at zeta = 1 and tiny inside the critical band.
    M, D, K = params.M, params.D, params.K
    lam = -D / (2.0 * M)
    mu2 = lam * lam - K / M
    if mu2 > 0:
        mu = math.sqrt(mu2)
        c0, c1 = math.cosh(mu * T), math.sinh(mu * T) / mu
    elif mu2 < 0:
        w = math.sqrt(-mu2)
        c0, c1 = math.cos(w * T), math.sin(w * T) / w
    else:
        c0, c1 = 1.0, T
    e = math.exp(lam * T)
    A = params.A
    N = A - lam * np.eye(2)
    A_d = e * (c0 * np.eye(2) + c1 * N)
    # B_d = int_0^T e^{As} ds B.  With B = [0, 1/M] only column 1 of e^{As}
    # matters, and its top entry is e^{lam s} c1(s).  Integrating that directly
    # avoids the cancellation in A^{-1}(A_d - I)B when K is small.
    B_d = np.array([_int_exp_c1(lam, mu2, T) / M, A_d[0, 1] / M])
    return lam, A_d, B_d


def _moment(n: int, z: float) -> float:
    """``int_0^1 u^n e^{z u} du`` for ``z <= 0``."""
    x = -z
    if x < 1.0:
        # alternating series with rapidly shrinking terms
        total, term, j = 0.0, 1.0, 0
        while True:
            add = term / (n + j + 1)
            total += add
            if abs(add) < 1e-18 * abs(total):
                return total
            j += 1
            term *= z / j
    return math.exp(gammaln(n + 1) + math.log(gammainc(n + 1, x)) - (n + 1) * math.log(x))


def _int_exp_c1(lam: float, mu2: float, T: float) -> float:
    # c1(s) = sum_k mu2^k s^(2k+1) / (2k+1)!, so the integral is
    # sum_k mu2^k / (2k+1)! * T^(2k+2) * moment(2k+1, lam T).
    z = lam * T
    total = 0.0
    coef = T * T  # mu2^k T^(2k+2) / (2k+1)!
    for k in range(200):
        add = coef * _moment(2 * k + 1, z)
        total += add
        if abs(add) <= 1e-17 * abs(total):
            break
        coef *= mu2 * T * T / ((2 * k + 2) * (2 * k + 3))
    return total


@dataclass(frozen=True)
class DiscreteImpedance:
    A_d: np.ndarray
    B_d: np.ndarray
    T: float
    lam: float
    params: ImpedanceParams = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "lambda": self.lam,
            "A_d": self.A_d.tolist(),
            "B_d": self.B_d.tolist(),
            "params": None if self.params is None else {
                "M": self.params.M, "D": self.params.D,
                "K": self.params.K, "K_v": self.params.K_v,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def discretize(params: ImpedanceParams, T: float) -> DiscreteImpedance:
    """Exact zero-order-hold discretisation of a critically damped link.

    The result is cross-checked against :func:`expm_oracle`; a mismatch above
    ``ORACLE_TOL`` raises instead of returning a corrupt model.
    """
    if not (T > 0 and math.isfinite(T)):
        raise ImpedanceError(f"period must be positive, got {T!r}")
    if not params.critically_damped():
        raise ImpedanceError(
            f"discretize needs a critically damped link (|zeta-1| < {CRITICAL_BAND}), "
            f"got zeta={params.zeta:.6g}"
        )
    lam, A_d, B_d = _closed_form(params, T)
    A_ref, B_ref = expm_oracle(params, T)
    err = max(np.max(np.abs(A_d - A_ref)), np.max(np.abs(B_d - B_ref)))
    if not err <= ORACLE_TOL:
        raise ImpedanceError(
            f"closed-form discretisation disagrees with expm oracle by {err:.3g}"
        )
    A_d.setflags(write=False)
    B_d.setflags(write=False)
    return DiscreteImpedance(A_d=A_d, B_d=B_d, T=float(T), lam=lam, params=params)


@dataclass(frozen=True)
class LinkState:
    """Per-axis link displacement and its rate; arrays of any shape broadcast."""

    delta_x: np.ndarray
    delta_v: np.ndarray

    @classmethod
    def rest(cls, n_axes: int = 3):
        return cls(np.zeros(n_axes), np.zeros(n_axes))


def step(disc: DiscreteImpedance, state: LinkState, F_ext) -> LinkState:
    """Advance one period: ``[x, v]_{k+1} = A_d [x, v]_k + B_d F``."""
    x = np.asarray(state.delta_x, dtype=float)
    v = np.asarray(state.delta_v, dtype=float)
    F = np.asarray(F_ext, dtype=float)
    A, B = disc.A_d, disc.B_d
    return LinkState(
        A[0, 0] * x + A[0, 1] * v + B[0] * F,
        A[1, 0] * x + A[1, 1] * v + B[1] * F,
    )


def energy(params: ImpedanceParams, state: LinkState):
    x = np.asarray(state.delta_x)
    v = np.asarray(state.delta_v)
    return 0.5 * params.K * x * x + 0.5 * params.M * v * v
