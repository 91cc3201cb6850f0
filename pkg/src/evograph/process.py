"""The evolving multigraph: vertex arrivals, preferential edges, deletions.

At every time-step ``t >= 2`` exactly one substep runs:

1. with probability ``alpha1`` a vertex arrives with ``m`` edges to
   preferentially chosen endpoints;
2. with probability ``alpha - alpha1`` ``m`` edges are added between
   preferentially chosen endpoints;
3. with probability ``1 - alpha`` ``min(m, e)`` uniformly chosen edges are
   deleted.

A preferential endpoint is picked with probability ``degree / (2 e)`` using
the degrees at the start of the step. Loops and parallel edges are kept, and
vertices are never removed.

Two code paths implement the same step: :func:`advance` (plain numpy, one
step at a time, for inspection and tests) and :func:`run_trial` (compiled,
for long runs). They consume random numbers identically, so a given
:class:`RngStream` produces the same graph either way.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .analysis import DegreeHistogram, TrajectorySample
from .errors import EmptyGraph
from .params import ModelParams

log = logging.getLogger(__name__)

CHUNK_STEPS = 1 << 15


@dataclass(frozen=True)
class RngStream:
    """One reproducible random stream: ``(seed, stream_id)`` -> PCG64."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class StepOutcome:
    kind: str  # "VertexAdded" | "EdgesAdded" | "EdgesDeleted" | "NoOp"
    count: int


_KIND_NAMES = ("VertexAdded", "EdgesAdded", "EdgesDeleted", "NoOp")


@dataclass
class MultigraphState:
    """Mutable graph state after time-step ``step``.

    Vertex ``x_t`` has id ``n_vertices - 1`` at the moment it is added, so ids
    are dense and in arrival order.
    """

    step: int = 1
    n_vertices: int = 1
    n_edges: int = 0
    ends: np.ndarray = field(default_factory=lambda: np.zeros(16, dtype=np.int64))
    degree: np.ndarray = field(default_factory=lambda: np.zeros(8, dtype=np.int64))

    @property
    def edges(self) -> np.ndarray:
        """``(n_edges, 2)`` view of the edge list."""
        return self.ends[: 2 * self.n_edges].reshape(-1, 2)

    @property
    def degrees(self) -> np.ndarray:
        return self.degree[: self.n_vertices]

    def histogram(self, trial_id: int = 0) -> DegreeHistogram:
        return DegreeHistogram(self.step, np.bincount(self.degrees), trial_id)

    def sample(self) -> TrajectorySample:
        deg = self.degrees
        return TrajectorySample(
            self.step, self.n_edges, self.n_vertices, int(deg.max()) if len(deg) else 0
        )

    def check(self):
        total = int(self.degrees.sum())
        if total != 2 * self.n_edges:
            raise AssertionError(
                f"degree sum {total} != 2*edges {2 * self.n_edges} at t={self.step}"
            )
        if (self.degrees < 0).any():
            raise AssertionError(f"negative degree at t={self.step}")

    def _reserve(self, extra_edges: int, extra_vertices: int):
        need = 2 * (self.n_edges + extra_edges)
        if need > len(self.ends):
            self.ends = np.resize(self.ends, max(need, 2 * len(self.ends)))
        need = self.n_vertices + extra_vertices
        if need > len(self.degree):
            grown = np.zeros(max(need, 2 * len(self.degree)), dtype=np.int64)
            grown[: len(self.degree)] = self.degree
            self.degree = grown

    def write_edges(self, path):
        """Dump the edge list as ``"u v"`` lines."""
        with open(path, "w", newline="\n") as fh:
            for a, b in self.edges:
                fh.write(f"{a} {b}\n")


def init_state() -> MultigraphState:
    """``G_1``: one isolated vertex."""
    return MultigraphState()


def _pick(u: float, n: int) -> int:
    return min(int(u * n), n - 1)


def sample_preferential(state: MultigraphState, rng: np.random.Generator) -> int:
    """A vertex with probability ``degree / (2 e)``."""
    if state.n_edges == 0:
        raise EmptyGraph("preferential choice needs at least one edge")
    return int(state.ends[_pick(rng.random(), 2 * state.n_edges)])


def draws_per_step(m: int) -> int:
    return 2 * m + 1


def advance(
    state: MultigraphState,
    params: ModelParams,
    rng: np.random.Generator,
    cold_start_edges: int = 1,
) -> StepOutcome:
    """Execute one time-step in place."""
    m = params.m
    u = rng.random(draws_per_step(m))
    v, e = state.n_vertices, state.n_edges
    state._reserve(max(m, cold_start_edges), 1)
    ends, degree = state.ends, state.degree
    if u[0] < params.alpha1:
        x = v
        if e > 0:
            targets = [int(ends[_pick(u[1 + i], 2 * e)]) for i in range(m)]
            for i, w in enumerate(targets):
                ends[2 * (e + i)] = x
                ends[2 * (e + i) + 1] = w
                degree[w] += 1
            degree[x] = m
            state.n_edges = e + m
            count = m
        else:
            tgt = _pick(u[1], v)
            for i in range(cold_start_edges):
                ends[2 * (e + i)] = x
                ends[2 * (e + i) + 1] = tgt
                degree[tgt] += 1
            degree[x] = cold_start_edges
            state.n_edges = e + cold_start_edges
            count = cold_start_edges
        state.n_vertices = v + 1
        outcome = StepOutcome("VertexAdded", count)
    elif u[0] < params.alpha:
        if e > 0:
            pairs = [
                (int(ends[_pick(u[1 + 2 * i], 2 * e)]), int(ends[_pick(u[2 + 2 * i], 2 * e)]))
                for i in range(m)
            ]
            for i, (a, b) in enumerate(pairs):
                ends[2 * (e + i)] = a
                ends[2 * (e + i) + 1] = b
                degree[a] += 1
                degree[b] += 1
            state.n_edges = e + m
            outcome = StepOutcome("EdgesAdded", m)
        else:
            outcome = StepOutcome("NoOp", 0)
    else:
        n_del = min(m, e)
        for i in range(n_del):
            j = _pick(u[1 + i], e)
            degree[ends[2 * j]] -= 1
            degree[ends[2 * j + 1]] -= 1
            ends[2 * j] = ends[2 * (e - 1)]
            ends[2 * j + 1] = ends[2 * (e - 1) + 1]
            e -= 1
        state.n_edges = e
        outcome = StepOutcome("EdgesDeleted", n_del)
    state.step += 1
    return outcome


# -- long runs ------------------------------------------------------------


def default_trajectory_times(horizon: int) -> list[int]:
    times, t = [], 1
    while t < horizon:
        times.append(t)
        t *= 2
    times.append(horizon)
    return times


def default_snapshot_times(horizon: int) -> list[int]:
    times = [1 << p for p in range(10, 63) if (1 << p) < horizon]
    return times + [horizon]


@dataclass
class TrialResult:
    trial_id: int
    stream: RngStream
    histograms: dict[int, DegreeHistogram]
    trajectory: list[TrajectorySample]
    kind_counts: np.ndarray
    state: MultigraphState | None = None


def run_trial(
    params: ModelParams,
    horizon: int,
    rng: RngStream,
    snapshot_times=None,
    trajectory_times=None,
    cold_start_edges: int = 1,
    trial_id: int = 0,
    keep_state: bool = False,
    debug: bool = False,
) -> TrialResult:
    """Run the process from ``G_1`` to ``G_horizon``.

    Histograms are taken exactly at ``snapshot_times`` and trajectory samples
    at ``trajectory_times`` (defaults: powers of two from 1024, and powers of
    two from 1, each plus ``horizon``). With ``debug=True`` the degree-sum
    identity is checked after every step instead of only at recorded times.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if cold_start_edges not in (1, params.m):
        raise ValueError("cold_start_edges must be 1 or m")
    if snapshot_times is None:
        snapshot_times = default_snapshot_times(horizon)
    if trajectory_times is None:
        trajectory_times = default_trajectory_times(horizon)
    snaps = {t for t in snapshot_times if 1 <= t <= horizon}
    trajs = {t for t in trajectory_times if 1 <= t <= horizon}
    stops = sorted(snaps | trajs | {horizon})

    m = params.m
    width = max(m, cold_start_edges)
    state = MultigraphState(
        ends=np.zeros(2 * (width * (horizon - 1) + 1), dtype=np.int64),
        degree=np.zeros(horizon + 1, dtype=np.int64),
    )
    gen = rng.generator()
    st = np.array([state.step, state.n_vertices, state.n_edges], dtype=np.int64)
    kinds = np.zeros(4, dtype=np.int64)
    histograms, trajectory = {}, []
    chunk = 1 if debug else CHUNK_STEPS
    ncol = draws_per_step(m)

    for stop in stops:
        while st[0] < stop:
            n = min(chunk, stop - int(st[0]))
            draws = gen.random((n, ncol))
            _kernels.simulate_steps(
                state.ends, state.degree, st, draws,
                params.alpha1, params.alpha, m, cold_start_edges, kinds,
            )
            if debug:
                state.step, state.n_vertices, state.n_edges = (int(x) for x in st)
                state.check()
        state.step, state.n_vertices, state.n_edges = (int(x) for x in st)
        state.check()
        if stop in snaps:
            histograms[stop] = state.histogram(trial_id)
        if stop in trajs:
            trajectory.append(state.sample())

    return TrialResult(
        trial_id, rng, histograms, trajectory, kinds, state if keep_state else None
    )


def run_trials(
    params: ModelParams,
    horizon: int,
    trials: int,
    seed: int,
    workers: int | None = None,
    first_stream: int = 0,
    **kwargs,
) -> list[TrialResult]:
    """Independent trials on streams ``first_stream, first_stream+1, ...``.

    The compiled kernel releases the GIL, so trials run on a thread pool.
    Results are returned in stream order regardless of scheduling.
    """
    streams = [RngStream(seed, first_stream + i) for i in range(trials)]

    def one(i):
        return run_trial(params, horizon, streams[i], trial_id=first_stream + i, **kwargs)

    if workers is None or workers <= 1 or trials == 1:
        return [one(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(trials)))
