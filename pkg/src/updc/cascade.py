"""Bookkeeping for K-level cascades of two-photon UPDC unit cells.

Level k holds 2^(k-1) unit cells, each turning |0,0,2> into |2,2,0> with one
sign gate. Frequency conversion between levels is treated as a lossless
relabeling, so the cells are independent and only counts are tracked.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .fock_dynamics import SubspaceState, cached_propagator, propagate
from .grover import nsg_apply

SQRT6 = math.sqrt(6.0)
UNIT_CELL_TAU0 = 0.976 / SQRT6
UNIT_CELL_TAU1 = (math.pi - 0.626) / SQRT6


@dataclass(frozen=True)
class NsgModel:
    kind: str = "deterministic"  # or "nondeterministic"
    success_probability: float = 1.0
    ancillae_per_use: int = 0

    def __post_init__(self):
        if self.kind not in ("deterministic", "nondeterministic"):
            raise ValueError(f"unknown sign-gate kind {self.kind!r}")
        if self.kind == "deterministic" and self.success_probability != 1.0:
            raise ValueError("a deterministic sign gate succeeds with probability 1")
        if not 0.0 < self.success_probability <= 1.0:
            raise ValueError("success probability must lie in (0, 1]")
        if isinstance(self.ancillae_per_use, bool) or int(self.ancillae_per_use) != self.ancillae_per_use \
                or self.ancillae_per_use < 0:
            raise ValueError("ancillae per use must be an integer >= 0")

    @classmethod
    def nondeterministic(cls, p: float = 0.25, ancillae_per_use: int = 2) -> "NsgModel":
        """Postselected gate; default p = 1/n^2 at n = 2, with >= n ancillae."""
        return cls("nondeterministic", p, ancillae_per_use)


@dataclass(frozen=True)
class CascadeSpec:
    K: int
    nsg: NsgModel = NsgModel()
    max_levels: int = 30

    def __post_init__(self):
        if isinstance(self.K, bool) or int(self.K) != self.K or self.K < 1:
            raise ValueError(f"cascade needs K >= 1 levels, got {self.K!r}")
        if self.K > self.max_levels:
            raise ValueError(f"K={self.K} exceeds the level cap {self.max_levels}")


@dataclass(frozen=True)
class CascadeReport:
    K: int
    unit_cell_count: int
    output_spatial_modes: int
    signal_photons: int
    idler_photons: int
    overall_success_probability: float
    total_ancillae: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def plan_cascade(spec: CascadeSpec) -> CascadeReport:
    cells = 2**spec.K - 1
    photons = 2**spec.K
    return CascadeReport(
        K=spec.K,
        unit_cell_count=cells,
        output_spatial_modes=2 ** (spec.K - 1),
        signal_photons=photons,
        idler_photons=photons,
        overall_success_probability=spec.nsg.success_probability**cells,
        total_ancillae=spec.nsg.ancillae_per_use * cells,
    )


def nondeterministic_penalty(n: int) -> float:
    """Success factor (1/n^2)^sqrt(n) from ~sqrt(n) postselected sign gates."""
    if n < 2:
        raise ValueError("the penalty is defined for n >= 2 (n = 1 needs no sign gate)")
    root = math.isqrt(n)
    if root * root == n:
        return 1.0 / n ** (2 * root)  # exact for perfect squares
    return (1.0 / n**2) ** math.sqrt(n)


def unit_cell_fn_sq(tau0: float = UNIT_CELL_TAU0, tau1: float = UNIT_CELL_TAU1) -> float:
    """f_2^2 after init, one sign flip and one rotation (zero times allowed)."""
    prop = cached_propagator(2)
    state = propagate(prop, SubspaceState.vacuum(2), tau0)
    state = propagate(prop, nsg_apply(state), tau1)
    return state.marked**2


def verify_unit_cell(tau0: float = UNIT_CELL_TAU0, tau1: float = UNIT_CELL_TAU1,
                     threshold: float = 0.999) -> bool:
    return unit_cell_fn_sq(tau0, tau1) >= threshold
