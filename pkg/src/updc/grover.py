"""Grover-style unity-efficiency down-conversion (UPDC).

Procedure on the input |0,0,n>:
  init    evolve for tau0
  flip    sign flip on the fully converted state |n,n,0>
  rotate  evolve for tau_m
and repeat flip/rotate for every scheduled iteration. The polarization
beam-splitter separation around the flip leaves the joint state unchanged
and is not modeled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .fock_dynamics import SubspaceState, cached_propagator, propagate

BOUNDARY_RTOL = 1e-12


def nsg_apply(s: SubspaceState) -> SubspaceState:
    """Nonlinear sign gate: negate the amplitude of |n,n,0>."""
    amps = s.amplitudes.copy()
    amps[s.n] = -amps[s.n]
    return SubspaceState(s.n, amps)


def efficiency_mu_n(s: SubspaceState) -> float:
    """Mean converted fraction sum_k k f_k^2 / n."""
    if s.n == 0:
        raise ValueError("conversion efficiency is undefined for n=0")
    k = np.arange(s.n + 1)
    return float(k @ (s.amplitudes**2)) / s.n


@dataclass(frozen=True)
class PumpSpectrum:
    """Photon-number probabilities |c_n|^2 of the pump."""

    weights: Mapping[int, float]

    def __post_init__(self):
        w = {int(n): float(p) for n, p in dict(self.weights).items()}
        if any(n < 0 for n in w) or any(p < 0 or not math.isfinite(p) for p in w.values()):
            raise ValueError("weights must be finite, non-negative, on n >= 0")
        if abs(math.fsum(w.values()) - 1.0) > 1e-12:
            raise ValueError("pump weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @property
    def mean_photons(self) -> float:
        return math.fsum(n * p for n, p in self.weights.items())


def efficiency_mu_total(spectrum: PumpSpectrum, per_n_states: Mapping[int, SubspaceState]) -> float:
    """Pump-number-weighted efficiency over a pump photon-number mixture."""
    denom = spectrum.mean_photons
    if denom <= 0:
        raise ValueError("all pump weight on n=0: total efficiency undefined")
    terms = []
    for n, p in spectrum.weights.items():
        if p == 0 or n == 0:
            continue
        if n not in per_n_states:
            raise KeyError(f"no state for pump number n={n}")
        terms.append(p * n * efficiency_mu_n(per_n_states[n]))
    return math.fsum(terms) / denom


@dataclass(frozen=True)
class SingleCrystal:
    """Every iteration reuses one crystal of length tau1."""

    tau1: float
    M: int

    @property
    def times(self) -> tuple[float, ...]:
        return (self.tau1,) * self.M


@dataclass(frozen=True)
class PerIteration:
    """Iteration m uses its own crystal length times[m-1]."""

    times: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))

    @property
    def M(self) -> int:
        return len(self.times)


Schedule = Union[SingleCrystal, PerIteration]


@dataclass(frozen=True)
class GroverConfig:
    n: int
    tau0: float
    schedule: Schedule = field(default_factory=lambda: PerIteration(()))
    iteration_cap: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("the procedure needs n >= 1 pump photons")
        if not self.tau0 > 0:
            raise ValueError("tau0 must be > 0")
        if self.schedule.M < 0:
            raise ValueError("iteration count must be >= 0")
        if any(not t > 0 for t in self.schedule.times):
            raise ValueError("all crystal times must be > 0")
        cap = self.schedule.M if self.iteration_cap is None else self.iteration_cap
        if cap < self.schedule.M:
            raise ValueError(f"iteration cap {cap} below scheduled M={self.schedule.M}")
        object.__setattr__(self, "iteration_cap", cap)


@dataclass(frozen=True)
class Stage:
    kind: str  # "init", "flip" or "rotate"
    m: int
    tau: float | None
    state: SubspaceState

    @property
    def f_n(self) -> float:
        return self.state.marked

    @property
    def f_n_sq(self) -> float:
        return self.state.marked ** 2

    @property
    def mu_n(self) -> float:
        return efficiency_mu_n(self.state)


@dataclass(frozen=True)
class PipelineTrace:
    n: int
    stages: tuple[Stage, ...]

    @property
    def outputs(self) -> tuple[Stage, ...]:
        """Psi_0 and each Psi'_m, i.e. the states after every crystal."""
        return tuple(s for s in self.stages if s.kind != "flip")

    @property
    def final(self) -> SubspaceState:
        return self.stages[-1].state

    @property
    def mu_n(self) -> float:
        return efficiency_mu_n(self.final)

    @property
    def f_n_sq(self) -> float:
        return self.final.marked ** 2


def run_pipeline(cfg: GroverConfig) -> PipelineTrace:
    prop = cached_propagator(cfg.n)
    state = propagate(prop, SubspaceState.vacuum(cfg.n), cfg.tau0)
    stages = [Stage("init", 0, cfg.tau0, state)]
    for m, tau in enumerate(cfg.schedule.times, start=1):
        state = nsg_apply(state)
        stages.append(Stage("flip", m, None, state))
        state = propagate(prop, state, tau)
        stages.append(Stage("rotate", m, tau, state))
    return PipelineTrace(cfg.n, tuple(stages))


def angle_from_amplitude(f_n: float) -> float:
    return 2.0 * math.asin(min(1.0, max(-1.0, f_n)))


def grover_angle(trace: PipelineTrace) -> np.ndarray:
    """SU(2) angle theta_m with sin(theta_m/2) = f_n after each crystal."""
    return np.array([angle_from_amplitude(s.f_n) for s in trace.outputs])


def termination_M(theta_g: float) -> int:
    """Largest M with (2M+1) theta_g <= pi; boundary ties count as satisfied."""
    if not 0 < theta_g <= math.pi * (1 + BOUNDARY_RTOL):
        raise ValueError(f"Grover angle must lie in (0, pi], got {theta_g}")
    limit = math.pi * (1 + BOUNDARY_RTOL)
    M = max(0, math.floor((math.pi / theta_g - 1.0) / 2.0))
    while (2 * (M + 1) + 1) * theta_g <= limit:
        M += 1
    while M > 0 and (2 * M + 1) * theta_g > limit:
        M -= 1
    return M
