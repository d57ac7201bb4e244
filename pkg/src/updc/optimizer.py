"""Crystal-length grid search for conventional and UPDC conversion.

Crystal times are integer multiples of a fixed step (the cut precision).
The single-crystal search is exhaustive over (tau0, tau1, M): for each tau1
the stack of iteration matrices (U(tau1) F)^M is built once and applied to
every initialization state in one matrix product.

Work is split into fixed-size tau1 blocks that do not depend on the worker
count, and reductions use a total order (higher mu, then smaller tau0, then
smaller tau1), so results are identical for any number of threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fock_dynamics import Propagator, cached_propagator
from .grover import (GroverConfig, PerIteration, SingleCrystal, run_pipeline,
                     termination_M)

FIGURE1_N = (1, 2, 3, 4, 5, 6, 7, 8, 10, 20, 40, 50)
BLOCK = 16
TRAJ_CHUNK = 20000


@dataclass(frozen=True)
class GridSpec:
    step: float = 1e-3
    tau_max: float = 2 * math.pi
    M_max: int | None = None
    mu_tol: float = 5e-4
    tie_tol: float = 1e-6

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be > 0")
        if not self.tau_max >= self.step:
            raise ValueError("tau_max must be >= step")
        if self.M_max is not None and self.M_max < 1:
            raise ValueError("M_max must be >= 1")
        if self.mu_tol < 0 or self.tie_tol < 0:
            raise ValueError("mu_tol and tie_tol must be >= 0")

    @property
    def size(self) -> int:
        return int(math.floor(self.tau_max / self.step + 1e-9))

    def taus(self) -> np.ndarray:
        return np.arange(1, self.size + 1) * self.step

    def iteration_cap(self, n: int) -> int:
        if self.M_max is not None:
            return self.M_max
        return 4 * math.ceil(math.sqrt(n)) + 4


@dataclass(frozen=True)
class EfficiencyReport:
    n: int
    mode: str  # "conventional", "single-crystal" or "per-iteration"
    mu: float
    fn_sq: float
    tau0: float
    taus: tuple[float, ...]
    M: int
    mu_max: float
    per_M_best: tuple[float, ...] = field(default=(), compare=False, repr=False)

    @property
    def tau1(self) -> float | None:
        return self.taus[0] if self.taus else None

    @property
    def runtime(self) -> float:
        """Total rotation-crystal time; M * tau1 for a single crystal."""
        if self.mode == "single-crystal":
            return self.M * self.taus[0] if self.M else 0.0
        return math.fsum(self.taus)

    def config(self) -> GroverConfig:
        if self.mode == "single-crystal":
            return GroverConfig(self.n, self.tau0, SingleCrystal(self.taus[0], self.M))
        return GroverConfig(self.n, self.tau0, PerIteration(self.taus))


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("UPDC_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def _ordered_map(fn, items, workers: int):
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _weights(n: int) -> np.ndarray:
    return np.arange(n + 1) / n


def _vacuum_trajectory(prop: Propagator, taus: np.ndarray) -> np.ndarray:
    e0 = np.zeros(prop.dim)
    e0[0] = 1.0
    parts = [prop.trajectory(e0, taus[i:i + TRAJ_CHUNK]) for i in range(0, len(taus), TRAJ_CHUNK)]
    return np.concatenate(parts, axis=1)


def _iteration_powers(prop: Propagator, tau1: float, M_max: int) -> np.ndarray:
    """(U(tau1) F)^M for M = 1..M_max, shape (M_max, d, d)."""
    step = prop.matrix(tau1)
    step[:, -1] *= -1.0
    powers = np.empty((M_max,) + step.shape)
    powers[0] = step
    for m in range(1, M_max):
        powers[m] = step @ powers[m - 1]
    return powers


def _mu_after_iterations(prop, initial, tau1, M_max, weights) -> np.ndarray:
    """mu after 1..M_max iterations for every initial column, shape (M_max, N)."""
    d = prop.dim
    powers = _iteration_powers(prop, tau1, M_max)
    X = powers.reshape(M_max * d, d) @ initial
    X *= X
    return weights @ X.reshape(M_max, d, -1)


class _BestPerM:
    """Running per-M maximum with (mu desc, tau0 asc, tau1 asc) ordering.

    Also keeps, for every (M, tau0), the best mu over all tau1 scanned so
    far; elementwise maxima do not depend on the order blocks arrive in.
    """

    def __init__(self, M_max: int, N: int):
        self.mu = np.full(M_max, -np.inf)
        self.i0 = np.full(M_max, -1)
        self.j = np.full(M_max, -1)
        self.by_tau0 = np.full((M_max, N), -np.inf)

    def offer(self, mu, i0, j):
        # callers offer tau1 indices in increasing order
        for m in range(len(self.mu)):
            if mu[m] > self.mu[m] or (mu[m] == self.mu[m] and i0[m] < self.i0[m]):
                self.mu[m], self.i0[m], self.j[m] = mu[m], i0[m], j[m]

    def offer_columns(self, mu, cols=slice(None)):
        self.by_tau0[:, cols] = np.maximum(self.by_tau0[:, cols], mu)


def _full_scan(prop, S0, taus, M_max, weights, workers) -> _BestPerM:
    N = len(taus)

    def scan_block(start):
        js = range(start, min(start + BLOCK, N))
        mus = np.stack([_mu_after_iterations(prop, S0, taus[j], M_max, weights) for j in js], axis=-1)
        flat = mus.reshape(M_max, -1)  # tau0-major, then tau1
        idx = np.argmax(flat, axis=1)
        width = mus.shape[-1]
        return flat[np.arange(M_max), idx], idx // width, start + idx % width, mus.max(axis=2)

    best = _BestPerM(M_max, N)
    for mu, i0, j, cols in _ordered_map(scan_block, list(range(0, N, BLOCK)), workers):
        best.offer(mu, i0, j)
        best.offer_columns(cols)
    return best


def _prefilter_scan(prop, S0, taus, M_max, weights, workers, stride=10, band=0.01) -> _BestPerM:
    """Coarse scan on every stride-th point, then full resolution near good cells.

    Cells within `band` (relative) of the coarse optimum, at any M, get their
    +/- stride neighbourhood rescanned at full resolution for all M.
    """
    N = len(taus)
    coarse = np.arange(stride - 1, N, stride)
    S0c = S0[:, coarse]

    def coarse_block(start):
        js = coarse[start:start + BLOCK]
        return np.stack([_mu_after_iterations(prop, S0c, taus[j], M_max, weights) for j in js], axis=-1)

    blocks = _ordered_map(coarse_block, list(range(0, len(coarse), BLOCK)), workers)
    mus_c = np.concatenate(blocks, axis=-1)  # (M_max, tau0, tau1)
    threshold = (1.0 - band) * mus_c.max()
    mask = np.zeros((N, N), dtype=bool)  # rows tau1, columns tau0
    for _, a, b in np.argwhere(mus_c >= threshold):
        i0, j = coarse[a], coarse[b]
        mask[max(0, j - stride):j + stride + 1, max(0, i0 - stride):i0 + stride + 1] = True
    rows = np.flatnonzero(mask.any(axis=1))

    def fine_block(start):
        out = []
        for j in rows[start:start + BLOCK]:
            cols = np.flatnonzero(mask[j])
            mu = _mu_after_iterations(prop, S0[:, cols], taus[j], M_max, weights)
            k = np.argmax(mu, axis=1)
            out.append((mu[np.arange(M_max), k], cols[k], np.full(M_max, j), mu, cols))
        return out

    best = _BestPerM(M_max, N)
    for chunk in _ordered_map(fine_block, list(range(0, len(rows), BLOCK)), workers):
        for mu, i0, j, mu_cols, cols in chunk:
            best.offer(mu, i0, j)
            best.offer_columns(mu_cols, cols)
    return best


def _report_from_config(cfg: GroverConfig, mode: str, mu_max: float, per_M=()) -> EfficiencyReport:
    trace = run_pipeline(cfg)
    return EfficiencyReport(
        n=cfg.n, mode=mode, mu=trace.mu_n, fn_sq=trace.f_n_sq, tau0=cfg.tau0,
        taus=tuple(cfg.schedule.times), M=cfg.schedule.M, mu_max=mu_max, per_M_best=tuple(per_M),
    )


def optimize_conventional(n: int, grid: GridSpec = GridSpec()) -> EfficiencyReport:
    """Best single crystal without sign gates.

    Times within grid.tie_tol of the best mu are ties; the shortest wins.
    """
    if not 1 <= n <= 50:
        raise ValueError("conventional optimization needs 1 <= n <= 50")
    prop = cached_propagator(n)
    taus = grid.taus()
    traj = _vacuum_trajectory(prop, taus)
    mu = _weights(n) @ (traj * traj)
    mu_max = float(mu.max())
    i = int(np.flatnonzero(mu >= mu_max - grid.tie_tol)[0])
    cfg = GroverConfig(n, float(taus[i]), PerIteration(()))
    return _report_from_config(cfg, "conventional", mu_max)


def optimize_single_crystal(n: int, grid: GridSpec = GridSpec(), workers: int | None = None,
                            prefilter: bool = False) -> EfficiencyReport:
    """Joint search over tau0, a shared tau1 and the iteration count M >= 1.

    M is the fewest iterations whose best mu is within grid.mu_tol of the
    overall best. At that M, points within grid.tie_tol of its best count as
    ties and the shortest tau0, then the shortest tau1, wins; periodic
    replicas of an optimum at longer times differ only by grid rounding.
    mu_max keeps the exact grid maximum.
    """
    if not 2 <= n <= 50:
        raise ValueError("single-crystal UPDC needs 2 <= n <= 50")
    workers = resolve_workers(workers)
    prop = cached_propagator(n)
    taus = grid.taus()
    M_max = grid.iteration_cap(n)
    S0 = _vacuum_trajectory(prop, taus)
    scan = _prefilter_scan if prefilter else _full_scan
    weights = _weights(n)
    best = scan(prop, S0, taus, M_max, weights, workers)
    mu_max = float(best.mu.max())
    M = int(np.flatnonzero(best.mu >= mu_max - grid.mu_tol)[0]) + 1
    level = best.mu[M - 1] - grid.tie_tol
    i0 = int(np.flatnonzero(best.by_tau0[M - 1] >= level)[0])
    line = _tau1_line(prop, S0[:, i0], taus, M, weights)
    hits = np.flatnonzero(line >= level)
    j = int(hits[0]) if len(hits) else int(np.argmax(line))
    cfg = GroverConfig(n, float(taus[i0]), SingleCrystal(float(taus[j]), M), iteration_cap=M_max)
    return _report_from_config(cfg, "single-crystal", mu_max, best.mu.tolist())


def _tau1_line(prop, initial, taus, M, weights, chunk=2048) -> np.ndarray:
    """mu after M iterations from one initial state, for every tau1."""
    out = []
    for k in range(0, len(taus), chunk):
        U = prop.matrices(taus[k:k + chunk])
        X = np.broadcast_to(initial, (len(U), prop.dim)).copy()
        for _ in range(M):
            X[:, -1] *= -1.0
            X = np.einsum("tij,tj->ti", U, X)
        out.append((X * X) @ weights)
    return np.concatenate(out)


def _index_of(tau: float, step: float) -> int:
    return int(round(tau / step)) - 1


def _schedule_mu(prop, idx, taus, weights):
    """mu after every crystal of an index schedule (init first)."""
    state = prop.matrix(taus[idx[0]])[:, 0]
    mus = [weights @ state**2]
    for j in idx[1:]:
        flipped = state.copy()
        flipped[-1] = -flipped[-1]
        state = prop.matrix(taus[j]) @ flipped
        mus.append(weights @ state**2)
    return np.array(mus), state


def _line_search(prop, idx, pos, taus, weights):
    """mu of the full schedule for every grid value of crystal `pos`."""
    state = np.zeros(prop.dim)
    state[0] = 1.0
    for c, j in enumerate(idx[:pos]):
        if c > 0:
            state[-1] = -state[-1]
        state = prop.matrix(taus[j]) @ state
    if pos > 0:
        state[-1] = -state[-1]
    X = np.concatenate([prop.trajectory(state, taus[i:i + TRAJ_CHUNK])
                        for i in range(0, len(taus), TRAJ_CHUNK)], axis=1)
    for j in idx[pos + 1:]:
        X[-1] *= -1.0
        X = prop.matrix(taus[j]) @ X
    return weights @ (X * X)


def optimize_per_iteration(n: int, grid: GridSpec = GridSpec(), start: EfficiencyReport | None = None,
                           workers: int | None = None, max_sweeps: int = 50) -> EfficiencyReport:
    """Let every iteration use its own crystal length.

    Starts from the single-crystal optimum and line-searches each crystal
    time over the grid in turn (appending or dropping trailing iterations
    when that helps) until a full sweep changes nothing. Each accepted move
    strictly raises mu, so the result never falls below the start.
    """
    if not 2 <= n <= 50:
        raise ValueError("per-iteration UPDC needs 2 <= n <= 50")
    if start is None:
        start = optimize_single_crystal(n, grid, workers=workers)
    prop = cached_propagator(n)
    taus = grid.taus()
    weights = _weights(n)
    M_max = grid.iteration_cap(n)
    idx = [_index_of(start.tau0, grid.step)] + [_index_of(t, grid.step) for t in start.taus]

    for _ in range(max_sweeps):
        changed = False
        for pos in range(len(idx)):
            mu = _line_search(prop, idx, pos, taus, weights)
            k = int(np.argmax(mu))
            if mu[k] > mu[idx[pos]]:
                idx[pos] = k
                changed = True
        if len(idx) - 1 < M_max:
            stage_mu, _ = _schedule_mu(prop, idx, taus, weights)
            mu = _line_search(prop, idx + [0], len(idx), taus, weights)
            k = int(np.argmax(mu))
            if mu[k] > stage_mu[-1]:
                idx.append(k)
                changed = True
        stage_mu, _ = _schedule_mu(prop, idx, taus, weights)
        keep = int(np.argmax(stage_mu))
        if stage_mu[keep] > stage_mu[-1]:
            trimmed = idx[:max(keep, 1) + 1]
            if trimmed != idx:
                idx = trimmed
                changed = True
        if not changed:
            break

    cfg = GroverConfig(n, float(taus[idx[0]]), PerIteration([float(taus[j]) for j in idx[1:]]),
                       iteration_cap=max(M_max, len(idx) - 1))
    trace = run_pipeline(cfg)
    return _report_from_config(cfg, "per-iteration", trace.mu_n)


@dataclass(frozen=True)
class AmplificationSchedule:
    """Crystal times that walk f_n along sin((2m+1) theta_g / 2)."""

    n: int
    tau0: float
    taus: tuple[float, ...]
    theta_g: float
    M_target: int

    @property
    def tracked(self) -> int:
        """Number of iterations that reached their target amplitude."""
        return len(self.taus)

    def targets(self) -> np.ndarray:
        m = np.arange(self.M_target + 1)
        return np.sin((2 * m + 1) * self.theta_g / 2)

    def config(self) -> GroverConfig:
        return GroverConfig(self.n, self.tau0, PerIteration(self.taus))


def grover_schedule(n: int, grid: GridSpec = GridSpec(), theta_scale: float = 1.0,
                    tol: float = 0.05, beam_width: int = 64) -> AmplificationSchedule:
    """Constructive amplitude-amplification schedule.

    tau0 is the longest grid time on the first rise of f_n that keeps
    sin(theta_g/2) = f_n below sin(theta_scale / (2 sqrt n)). For each
    iteration m, the candidate crystal times are the grid points where f_n
    comes closest to sin((2m+1) theta_g / 2) (local minima of the miss,
    within tol). A beam of candidates is kept, ranked by the largest f_n
    reachable in the following iteration. The schedule stops at the
    termination count or when no candidate reaches its target.
    """
    if not 2 <= n <= 50:
        raise ValueError("amplitude amplification needs 2 <= n <= 50")
    prop = cached_propagator(n)
    taus = grid.taus()
    traj = _vacuum_trajectory(prop, taus)
    cap = math.sin(theta_scale / (2 * math.sqrt(n)))
    above = np.flatnonzero(traj[n] > cap)
    if len(above) == 0 or above[0] == 0:
        raise ValueError("grid cannot resolve an initialization below the amplitude cap")
    i0 = int(above[0]) - 1
    theta_g = 2 * math.asin(traj[n, i0])
    M_target = termination_M(theta_g)

    beam = [(traj[:, i0], ())]
    for m in range(1, M_target + 1):
        target = math.sin((2 * m + 1) * theta_g / 2)
        states = np.stack([b[0] for b in beam], axis=1)
        states[-1] *= -1.0
        evolved = prop.trajectories(states, taus)
        cands = []
        for b, (_, hist) in enumerate(beam):
            miss = np.abs(evolved[b, n] - target)
            inner = np.flatnonzero((miss[1:-1] <= miss[:-2]) & (miss[1:-1] <= miss[2:])
                                   & (miss[1:-1] < tol)) + 1
            cands.extend((evolved[b, :, j], hist + (j,), miss[j]) for j in inner)
        if not cands:
            break
        if m < M_target:
            nxt = np.stack([c[0] for c in cands], axis=1)
            nxt[-1] *= -1.0
            score = np.concatenate([prop.trajectories(nxt[:, k:k + 64], taus)[:, n, :].max(axis=1)
                                    for k in range(0, nxt.shape[1], 64)])
        else:
            score = -np.array([c[2] for c in cands])
        order = np.argsort(-score, kind="stable")[:beam_width]
        beam = [cands[k][:2] for k in order]

    best_hist = beam[0][1]
    return AmplificationSchedule(n, float(taus[i0]), tuple(float(taus[j]) for j in best_hist),
                                 theta_g, M_target)


def figure1_data(grid: GridSpec = GridSpec(), ns=FIGURE1_N, workers: int | None = None,
                 prefilter_from: int | None = None) -> list[dict]:
    """Conventional vs single-crystal UPDC efficiency for each pump number.

    n = 1 uses no sign gate, so both columns hold the conventional optimum.
    """
    rows = []
    for n in ns:
        conv = optimize_conventional(n, grid)
        if n == 1:
            updc = conv
        else:
            pre = prefilter_from is not None and n >= prefilter_from
            updc = optimize_single_crystal(n, grid, workers=workers, prefilter=pre)
        rows.append({
            "n": n,
            "eff_conventional": conv.mu,
            "eff_updc": updc.mu,
            "tau0": updc.tau0,
            "tau1": updc.tau1,
            "M": updc.M,
            "fn_sq_conventional": conv.fn_sq,
            "fn_sq_updc": updc.fn_sq,
        })
    return rows


def figure2_data(fig1_rows: list[dict]) -> list[dict]:
    """Runtime M_n * tau1 against sqrt(n) from the single-crystal optima."""
    rows = []
    for r in fig1_rows:
        if r["n"] < 2:
            continue
        rows.append({
            "n": r["n"],
            "sqrt_n": math.sqrt(r["n"]),
            "M": r["M"],
            "tau1": r["tau1"],
            "runtime": r["M"] * r["tau1"],
        })
    return rows


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares slope, intercept and coefficient of determination."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
