"""Exact down-conversion dynamics inside one n-pump-photon subspace.

The subspace is spanned by |k, k, n-k> for k = 0..n (k signal-idler pairs,
n-k pump photons left). Amplitudes are real when evolution starts from real
amplitudes, and they obey  df/dtau = A f  with a real tridiagonal
skew-symmetric generator A. All times are dimensionless, tau = kappa * t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_PUMP_PHOTONS = 50
NORM_TOL = 1e-10


def _check_n(n: int, allow_large: bool) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValueError(f"pump photon count must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise ValueError(f"pump photon count must be >= 0, got {n}")
    if n > MAX_PUMP_PHOTONS and not allow_large:
        raise ValueError(
            f"n={n} exceeds {MAX_PUMP_PHOTONS}; pass allow_large=True to proceed"
            " without an accuracy guarantee"
        )
    return n


@dataclass(frozen=True)
class SubspaceState:
    """Normalized real amplitudes (f_0, ..., f_n) over the basis |k,k,n-k>."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if np.iscomplexobj(amps):
            raise TypeError("amplitudes must be real")
        amps = np.array(amps, dtype=float)
        if amps.ndim != 1 or amps.shape[0] != self.n + 1:
            raise ValueError(
                f"expected {self.n + 1} amplitudes for n={self.n}, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm_sq = float(amps @ amps)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: sum f_k^2 = {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def vacuum(cls, n: int) -> "SubspaceState":
        """The unconverted input |0, 0, n>."""
        amps = np.zeros(n + 1)
        amps[0] = 1.0
        return cls(n, amps)

    @property
    def marked(self) -> float:
        """Amplitude f_n of the fully converted state |n, n, 0>."""
        return float(self.amplitudes[self.n])

    def __len__(self):
        return self.n + 1


@dataclass(frozen=True)
class Generator:
    n: int
    matrix: np.ndarray


def build_generator(n: int, allow_large: bool = False) -> Generator:
    """Generator A of the coupled amplitude equations, in units of kappa.

    A[k, k-1] = k sqrt(n-k+1) and A[k, k+1] = -(k+1) sqrt(n-k). Both entries of
    each off-diagonal pair come from the same product, so A + A^T == 0 exactly.
    """
    n = _check_n(n, allow_large)
    k = np.arange(n, dtype=float)
    coupling = (k + 1.0) * np.sqrt(n - k)
    matrix = np.diag(coupling, -1) - np.diag(coupling, 1)
    matrix.setflags(write=False)
    return Generator(n, matrix)


class Propagator:
    """Spectral form of U(tau) = exp(tau A) for one subspace.

    i*A is Hermitian, so U(tau) = V diag(exp(-i w tau)) V^H with real
    eigenfrequencies w. The decomposition is done once and reused for any
    number of times.
    """

    def __init__(self, generator: Generator):
        self.n = generator.n
        self.generator = generator
        freqs, modes = np.linalg.eigh(1j * generator.matrix)
        if not np.all(np.isfinite(freqs)) or not np.all(np.isfinite(modes)):
            raise np.linalg.LinAlgError(f"spectral decomposition failed for n={self.n}")
        self.eigenfrequencies = freqs
        self.mode_shapes = modes
        self._modes_h = modes.conj().T
        for arr in (self.eigenfrequencies, self.mode_shapes, self._modes_h):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.n + 1

    def matrix(self, tau: float) -> np.ndarray:
        """Real orthogonal matrix U(tau)."""
        phases = np.exp(-1j * self.eigenfrequencies * tau)
        return np.real((self.mode_shapes * phases) @ self._modes_h)

    def matrices(self, taus) -> np.ndarray:
        """Stack of U(tau) for every tau, shape (len(taus), d, d)."""
        taus = np.asarray(taus, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(taus, self.eigenfrequencies))
        return np.real(np.einsum("ij,tj,jk->tik", self.mode_shapes, phases, self._modes_h))

    def trajectory(self, amplitudes, taus) -> np.ndarray:
        """Amplitudes U(tau) f for every tau, shape (d, len(taus))."""
        return self.trajectories(np.asarray(amplitudes, dtype=float)[:, None], taus)[0]

    def trajectories(self, columns, taus) -> np.ndarray:
        """Evolve each column of a (d, B) array over all taus; shape (B, d, T)."""
        taus = np.asarray(taus, dtype=float)
        coeffs = self._modes_h @ np.asarray(columns, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(self.eigenfrequencies, taus))
        return np.real(
            np.einsum("ij,jb,jt->bit", self.mode_shapes, coeffs, phases, optimize=True)
        )


def make_propagator(g: Generator) -> Propagator:
    return Propagator(g)


@lru_cache(maxsize=64)
def cached_propagator(n: int, allow_large: bool = False) -> Propagator:
    """Propagator for n, built once per process."""
    return Propagator(build_generator(n, allow_large=allow_large))


def propagate(p: Propagator, s: SubspaceState, tau: float) -> SubspaceState:
    """Evolve a state for dimensionless time tau (negative tau runs backwards)."""
    if p.n != s.n:
        raise ValueError(f"propagator is for n={p.n} but state has n={s.n}")
    return SubspaceState(s.n, p.matrix(tau) @ s.amplitudes)


def small_time_amplitudes(n: int, dtau: float) -> np.ndarray:
    """Leading-order amplitudes after a short time dtau from |0,0,n>.

    f_k ~ sqrt(n!/(n-k)!) dtau^k, the first nonvanishing Taylor term of
    (exp(dtau A))_{k0}. Not normalized.
    """
    n = _check_n(n, allow_large=True)
    if not 0.0 < dtau <= 0.01:
        raise ValueError(f"small-time expansion needs 0 < dtau <= 0.01, got {dtau}")
    k = np.arange(n + 1)
    log_falling = np.array([math.lgamma(n + 1) - math.lgamma(n - j + 1) for j in k])
    return np.exp(0.5 * log_falling + k * math.log(dtau))
