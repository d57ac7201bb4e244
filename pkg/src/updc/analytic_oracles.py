"""Closed-form subspace solutions for n = 1..4.

Used as exact references for the numerical propagator and as fast
evaluators. n = 4 only exposes f_0 and f_4 for the vacuum start.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock_dynamics import NORM_TOL, SubspaceState

SQRT6 = math.sqrt(6.0)
SQRT73 = math.sqrt(73.0)
SQRT33 = math.sqrt(33.0)

# n = 3 mode frequencies, slow (+) and fast (-)
W3_PLUS = math.sqrt(10.0 - SQRT73)
W3_MINUS = math.sqrt(10.0 + SQRT73)

# unit vectors spanning the n = 2 solution family
_N2_AXIS = np.array([math.sqrt(2.0 / 3.0), 0.0, 1.0 / math.sqrt(3.0)])
_N2_COS = np.array([1.0 / math.sqrt(3.0), 0.0, -math.sqrt(2.0 / 3.0)])
_N2_SIN = np.array([0.0, 1.0, 0.0])


class FittingError(ValueError):
    pass


def _as_array(tau):
    return np.asarray(tau, dtype=float)


def oracle_n1(f0_init: float, f1_init: float, tau: float) -> SubspaceState:
    """One pump photon: a plane rotation by angle tau."""
    if abs(f0_init**2 + f1_init**2 - 1.0) > NORM_TOL:
        raise ValueError("initial amplitudes must be normalized")
    c, s = math.cos(tau), math.sin(tau)
    return SubspaceState(1, np.array([f0_init * c - f1_init * s, f1_init * c + f0_init * s]))


@dataclass(frozen=True)
class TwoPhotonParams:
    m: float
    phi0: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.phi0)):
            raise ValueError("n=2 parameters must be finite")


def n2_amplitudes(params: TwoPhotonParams, tau) -> np.ndarray:
    """Vectorized n=2 amplitudes, shape (3,) or (3, len(tau))."""
    m = params.m
    phase = SQRT6 * _as_array(tau) + params.phi0
    c, s = np.cos(phase), np.sin(phase)
    scale = 1.0 / math.sqrt(1.0 + 2.0 * m * m)
    f0 = (2.0 / 3.0) * math.sqrt(3.0) * scale * (m + 0.5 * c)
    f1 = scale * s
    f2 = (SQRT6 / 3.0) * scale * (m - c)
    return np.array([f0, f1, f2])


def oracle_n2(params: TwoPhotonParams, tau: float) -> SubspaceState:
    return SubspaceState(2, n2_amplitudes(params, tau))


def fit_n2_params(state: SubspaceState) -> TwoPhotonParams:
    """Invert the n=2 family at tau = 0.

    A family member is (sqrt(2) m a + cos(phi0) b + sin(phi0) e1) / sqrt(1+2m^2)
    for two fixed orthonormal vectors a, b, so m follows from the projection on
    a and phi0 from the projections on b and e1.
    """
    if state.n != 2:
        raise ValueError(f"expected an n=2 state, got n={state.n}")
    f = state.amplitudes
    p = float(f @ _N2_AXIS)
    if 1.0 - p * p < 1e-14:
        raise FittingError("state lies on the axis of the n=2 family (m is unbounded)")
    m = p / math.sqrt(2.0 * (1.0 - p * p))
    phi0 = math.atan2(float(f @ _N2_SIN), float(f @ _N2_COS))
    return TwoPhotonParams(m, phi0)


@dataclass(frozen=True)
class ThreePhotonParams:
    b_plus: float
    b_minus: float
    phi1: float = 0.0
    phi2: float = 0.0

    @classmethod
    def vacuum(cls) -> "ThreePhotonParams":
        """Constants for the |0,0,3> start."""
        return cls((SQRT73 + 7.0) / (2.0 * SQRT73), (SQRT73 - 7.0) / (2.0 * SQRT73))


def n3_amplitudes(params: ThreePhotonParams, tau) -> np.ndarray:
    tau = _as_array(tau)
    a_p = W3_PLUS * tau + params.phi1
    a_m = W3_MINUS * tau + params.phi2
    bp, bm = params.b_plus, params.b_minus
    f0 = bp * np.cos(a_p) + bm * np.cos(a_m)
    f1 = (bp * W3_PLUS * np.sin(a_p) + bm * W3_MINUS * np.sin(a_m)) / math.sqrt(3.0)
    f2 = math.sqrt(6.0 / 73.0) * (np.cos(a_p) - np.cos(a_m))
    f3 = 6.0 * math.sqrt(3.0 / 146.0) * (np.sin(a_p) / W3_PLUS - np.sin(a_m) / W3_MINUS)
    return np.array([f0, f1, f2, f3])


def oracle_n3(params: ThreePhotonParams, tau: float) -> SubspaceState:
    # the closed form has B-independent f2, f3: it is only normalized on the
    # vacuum-started trajectory, which SubspaceState validation enforces
    return SubspaceState(3, n3_amplitudes(params, tau))


def f_perp(state: SubspaceState) -> float:
    """sqrt(1 - f_0^2 - f_n^2): weight outside the two extreme basis states."""
    f = state.amplitudes
    return math.sqrt(max(0.0, 1.0 - f[0] ** 2 - f[-1] ** 2))


@dataclass(frozen=True)
class FourPhotonConstants:
    w_plus: float = math.sqrt(25.0 - 3.0 * SQRT33)
    w_minus: float = math.sqrt(25.0 + 3.0 * SQRT33)
    m: float = 144.0 * SQRT33
    c: float = 1.0 / (246.0 * SQRT33)
    b_plus: float = 51.0 * SQRT33 + 261.0
    b_minus: float = 51.0 * SQRT33 - 261.0


N4 = FourPhotonConstants()


def oracle_n4(tau):
    """(f_0, f_4) for the |0,0,4> start; accepts scalar or array tau."""
    tau = _as_array(tau)
    k = N4
    denom = 17.0 / 41.0 + k.m**2 / 1168992.0
    cos_p, cos_m = np.cos(k.w_plus * tau), np.cos(k.w_minus * tau)
    f0 = k.c / denom * (k.b_plus * cos_p + k.b_minus * cos_m + k.m)
    f4 = -6.0 * SQRT6 * k.c / denom * (k.w_minus**2 * cos_p - k.w_plus**2 * cos_m - k.m / 24.0)
    return f0, f4


def slow_frequency(n: int) -> float:
    """Smallest nonzero mode frequency for n = 3 or 4 (sets the plotting window)."""
    if n == 3:
        return W3_PLUS
    if n == 4:
        return N4.w_plus
    raise ValueError("closed-form frequencies are tabulated for n = 3 and 4 only")
