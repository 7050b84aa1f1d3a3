"""Monte Carlo sweeps of the complex-level fraction and level-flow tracing.

Sweeps use common random numbers: realization ``r`` draws its ``H`` from
``child_stream(master_seed, r)`` and reuses it in every ``(mu, T)`` cell.
Work is split by realization; results are reduced by index, so the output
does not depend on scheduling.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .ensembles import (
    EnsembleSpec,
    SpectralNormalization,
    SymmetryClass,
    build_coupling,
    child_stream,
    sample_h,
)
from .errors import IntegrityError, ParameterError, RangeError
from .hamiltonian import SymmetryVariant
from .perturbation import scales
from .spectral import FractionEstimate, classify, effective_spectrum, fraction_from_counts

__all__ = [
    "SweepConfig",
    "SweepResult",
    "CoalescenceEvent",
    "LevelFlowTrace",
    "default_mu_grid",
    "default_t_grid",
    "run_sweep",
    "mu_half",
    "extract_mu_half",
    "collapse_diagnostic",
    "default_path",
    "trace_levels",
]

log = logging.getLogger(__name__)


def default_mu_grid(n: int = 16, top: float = 4.0) -> np.ndarray:
    """``0`` followed by ``n - 1`` geometric points up to ``top`` (units of mu0)."""
    return np.concatenate([[0.0], np.geomspace(0.05, top, n - 1)])


def default_t_grid(n: int = 16) -> np.ndarray:
    return np.geomspace(0.01, 1.0, n)


def _strictly_increasing(x) -> bool:
    x = np.asarray(x, dtype=float)
    return x.ndim == 1 and x.size >= 1 and bool(np.all(np.diff(x) > 0))


@dataclass(frozen=True)
class SweepConfig:
    """Grid, ensemble and classification settings of a sweep.

    ``mu_grid`` is in units of ``mu0``; ``tolerance`` in units of the mean
    level spacing.
    """

    ensemble: EnsembleSpec
    variant: SymmetryVariant = SymmetryVariant.PT
    mu_grid: tuple = tuple(default_mu_grid())
    t_grid: tuple = tuple(default_t_grid())
    realizations: int = 100
    window_fraction: float = 0.25
    tolerance: float = 1e-8
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", SymmetryVariant.parse(self.variant))
        mu = tuple(float(x) for x in np.atleast_1d(self.mu_grid))
        ts = tuple(float(x) for x in np.atleast_1d(self.t_grid))
        if not _strictly_increasing(mu) or mu[0] < 0:
            raise ParameterError("mu_grid must be non-negative and strictly increasing")
        if not _strictly_increasing(ts) or ts[0] <= 0 or ts[-1] > 1:
            raise ParameterError("t_grid must be strictly increasing within (0, 1]")
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ParameterError(f"realizations must be >= 1, got {self.realizations!r}")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        object.__setattr__(self, "mu_grid", mu)
        object.__setattr__(self, "t_grid", ts)
        object.__setattr__(self, "realizations", int(self.realizations))

    @property
    def normalization(self) -> SpectralNormalization:
        return SpectralNormalization.for_dim(self.ensemble.M, window_fraction=self.window_fraction)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ensemble"] = {
            "class": self.ensemble.symmetry.value,
            "M": self.ensemble.M,
            "N": self.ensemble.N,
            "seed": self.ensemble.seed,
        }
        d["variant"] = self.variant.value
        d["mu_grid"] = list(self.mu_grid)
        d["t_grid"] = list(self.t_grid)
        return d


@dataclass
class SweepResult:
    """Per-cell fractions indexed ``[iT, imu]`` plus raw per-realization counts."""

    config: SweepConfig
    mu0: float
    delta0: float
    n_complex: np.ndarray  # (realizations, nT, nmu)
    n_levels: np.ndarray
    failed: np.ndarray  # bool, (realizations, nT, nmu)
    diagnostics: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        nT, nmu = len(self.config.t_grid), len(self.config.mu_grid)
        self.cells = [[self._estimate(i, j) for j in range(nmu)] for i in range(nT)]

    def _estimate(self, i, j) -> FractionEstimate:
        if np.any(self.failed[:, i, j]):
            return FractionEstimate(math.nan, math.nan, self.config.realizations, 0)
        return fraction_from_counts(self.n_complex[:, i, j], self.n_levels[:, i, j])

    @property
    def mu_grid(self) -> np.ndarray:
        return np.asarray(self.config.mu_grid)

    @property
    def t_grid(self) -> np.ndarray:
        return np.asarray(self.config.t_grid)

    @property
    def f(self) -> np.ndarray:
        return np.array([[c.f for c in row] for row in self.cells])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([[c.stderr for c in row] for row in self.cells])

    def t_index(self, T: float) -> int:
        idx = np.flatnonzero(np.isclose(self.t_grid, T, rtol=1e-12, atol=0))
        if idx.size == 0:
            raise RangeError(f"T={T!r} is not on the sweep grid {list(self.t_grid)}")
        return int(idx[0])

    def column(self, T: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(mu / mu0, f, stderr)`` at fixed ``T``."""
        i = self.t_index(T)
        return self.mu_grid, self.f[i], self.stderr[i]


def _threads() -> int:
    raw = os.environ.get("PTBREAK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring PTBREAK_THREADS=%r", raw)
        return 1


def _sweep_realization(config: SweepConfig, r: int):
    spec = config.ensemble
    norm = config.normalization
    delta0 = norm.delta0
    mu0 = scales(spec.N, 1.0, delta0).mu0
    tol = config.tolerance * delta0
    h = sample_h(spec, norm, child_stream(config.master_seed, r))
    nT, nmu = len(config.t_grid), len(config.mu_grid)
    nc = np.zeros((nT, nmu), dtype=np.int64)
    nl = np.zeros((nT, nmu), dtype=np.int64)
    failed = np.zeros((nT, nmu), dtype=bool)
    diags = []
    for i, T in enumerate(config.t_grid):
        coupling = build_coupling(spec.M, spec.N, T, delta0)
        for j, m in enumerate(config.mu_grid):
            src = {"realization": r, "T": T, "mu_over_mu0": m}
            try:
                cs = classify(effective_spectrum(h, coupling, m * mu0, config.variant, src),
                              norm.window_half_width, tol)
            except IntegrityError as exc:
                failed[i, j] = True
                diags.append({"realization": r, "T": T, "mu_over_mu0": m,
                              "error": str(exc), "n_unpaired": len(exc.unpaired)})
                continue
            nc[i, j] = cs.n_complex
            nl[i, j] = cs.n_levels
    return r, nc, nl, failed, diags


def _sweep_chunk(config: SweepConfig, rs):
    return [_sweep_realization(config, r) for r in rs]


def run_sweep(config: SweepConfig, progress=None) -> SweepResult:
    """Ensemble-averaged complex fraction on the ``(T, mu)`` grid of ``config``.

    Cells hit by an integrity error are reported as ``nan`` with a record in
    ``diagnostics``; the rest of the sweep continues.
    """
    R = config.realizations
    nT, nmu = len(config.t_grid), len(config.mu_grid)
    n_complex = np.zeros((R, nT, nmu), dtype=np.int64)
    n_levels = np.zeros((R, nT, nmu), dtype=np.int64)
    failed = np.zeros((R, nT, nmu), dtype=bool)
    diagnostics = []

    workers = min(_threads(), R)
    if workers > 1:
        chunks = [list(range(k, R, workers)) for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = [item for chunk in pool.map(_sweep_chunk, [config] * workers, chunks)
                       for item in chunk]
    else:
        outputs = []
        for r in range(R):
            outputs.append(_sweep_realization(config, r))
            if progress is not None:
                progress(r + 1, R)
    for r, nc, nl, fl, diags in sorted(outputs, key=lambda item: item[0]):
        n_complex[r], n_levels[r], failed[r] = nc, nl, fl
        diagnostics.extend(diags)

    delta0 = config.normalization.delta0
    return SweepResult(
        config=config,
        mu0=scales(config.ensemble.N, 1.0, delta0).mu0,
        delta0=delta0,
        n_complex=n_complex,
        n_levels=n_levels,
        failed=failed,
        diagnostics=diagnostics,
        metadata={"config": config.as_dict(), "version": __version__},
    )


def mu_half(mu, f, stderr=None, label: str = "column") -> tuple[float, float]:
    """Interpolated ``mu`` at which ``f`` first reaches 1/2.

    ``f`` is made monotone with a running maximum before linear
    interpolation.  The error is the cell error at the crossing divided by the
    local slope.
    """
    mu = np.asarray(mu, dtype=float)
    f = np.asarray(f, dtype=float)
    if mu.shape != f.shape or mu.size < 2:
        raise ParameterError("mu and f must be equal-length arrays with >= 2 points")
    if np.any(np.isnan(f)):
        raise RangeError(f"{label} has failed cells")
    se = np.zeros_like(f) if stderr is None else np.asarray(stderr, dtype=float)
    g = np.maximum.accumulate(f)
    above = np.flatnonzero(g >= 0.5)
    if above.size == 0 or g[0] > 0.5:
        raise RangeError(f"{label}: f does not cross 1/2 in mu range "
                         f"[{mu[0]:g}, {mu[-1]:g}] (f from {g[0]:.3f} to {g[-1]:.3f})")
    j = int(above[0])
    if g[j] == 0.5 or j == 0:
        slope = (g[min(j + 1, g.size - 1)] - g[max(j - 1, 0)]) / (
            mu[min(j + 1, g.size - 1)] - mu[max(j - 1, 0)])
        err = se[j] / slope if slope > 0 else math.inf
        return float(mu[j]), float(err)
    f0, f1 = g[j - 1], g[j]
    x = mu[j - 1] + (0.5 - f0) * (mu[j] - mu[j - 1]) / (f1 - f0)
    w = (x - mu[j - 1]) / (mu[j] - mu[j - 1])
    slope = (f1 - f0) / (mu[j] - mu[j - 1])
    s = math.hypot((1 - w) * se[j - 1], w * se[j])
    return float(x), float(s / slope)


def extract_mu_half(result: SweepResult, T: float) -> tuple[float, float]:
    """``mu_half / mu0`` and its uncertainty at transmission ``T``."""
    mu, f, se = result.column(T)
    return mu_half(mu, f, se, label=f"column T={T:g}")


def _scale_factor(scaling: str, N: int, T: float) -> float:
    s = scales(N, T, 1.0)
    if scaling == "mu0":
        return 1.0
    if scaling == "mu0prime":
        return s.mu0prime / s.mu0
    if scaling == "muTprime":
        return s.muTprime / s.mu0
    raise ParameterError(f"unknown scaling {scaling!r}; expected mu0, mu0prime or muTprime")


def collapse_diagnostic(result: SweepResult, scaling: str = "mu0", t_values=None,
                        n_points: int = 64) -> float:
    """RMS spread of ``f`` across ``T`` columns after rescaling the ``mu`` axis.

    Each column's ``mu/mu0`` axis is divided by ``scale(T)/mu0``; the columns
    are interpolated onto a common grid spanning their overlap.  Zero means
    perfect collapse.
    """
    ts = result.t_grid if t_values is None else np.asarray(t_values, dtype=float)
    if ts.size < 2:
        raise ParameterError("collapse needs at least two T columns")
    N = result.config.ensemble.N
    cols = []
    for T in ts:
        mu, f, _ = result.column(T)
        cols.append((mu / _scale_factor(scaling, N, T), f))
    lo = max(x[0] for x, _ in cols)
    hi = min(x[-1] for x, _ in cols)
    if not hi > lo:
        raise RangeError(f"rescaled columns do not overlap under {scaling!r} scaling")
    grid = np.linspace(lo, hi, n_points)
    stack = np.array([np.interp(grid, x, f) for x, f in cols])
    return float(np.sqrt(np.mean(np.var(stack, axis=0))))


# -- level flow ---------------------------------------------------------------


@dataclass(frozen=True)
class CoalescenceEvent:
    stage: int
    parameter: float
    level_a: int
    level_b: int
    energy: float
    resolved: bool  # gap fell below delta0/100 before the pair left the real axis


@dataclass
class LevelFlowTrace:
    """Continuation-matched eigenvalues along a piecewise-linear path.

    ``trajectories[s, q]`` is level ``q`` at path step ``s``; ``params`` holds
    the ``(stage, T, mu/mu0)`` of each step.
    """

    path: list
    params: np.ndarray
    trajectories: np.ndarray
    events: list
    reentries: list
    ambiguous_steps: list
    branch: np.ndarray  # +1 / -1 / 0: sign of net drift along the first stage
    tolerance: float
    delta0: float
    mu0: float
    window_half_width: float

    def real_mask(self) -> np.ndarray:
        return np.abs(self.trajectories.imag) <= self.tolerance

    def window_census(self, step: int, half_width: float | None = None) -> tuple[int, int]:
        """``(real levels, conjugate pairs)`` within ``half_width`` (default: the window) at ``step``."""
        z = self.trajectories[step]
        inside = np.abs(z.real) <= (self.window_half_width if half_width is None else half_width)
        real = np.abs(z.imag) <= self.tolerance
        return int(np.count_nonzero(inside & real)), int(np.count_nonzero(inside & (z.imag > self.tolerance)))


def default_path(mu_max: float = 4.0) -> list:
    """``T: 0 -> 1`` at ``mu = 0``, then ``mu: 0 -> mu_max mu0`` at ``T = 1``."""
    return [(0.0, 0.0), (1.0, 0.0), (1.0, float(mu_max))]


def _match(pred: np.ndarray, new: np.ndarray, atol: float = 1e-12,
           same: float = 1e-10) -> tuple[np.ndarray, bool]:
    """Assign ``new`` eigenvalues to predicted positions.

    Minimizes the total squared distance.  Returns the permutation and whether
    a transposition of two targets costs within ``atol`` of the optimum.  Swaps between predictions (or targets)
    closer than ``same`` are relabelings, not ambiguities.
    """
    # squared distance: plain |dE| ties whenever levels are collinear on the real axis
    cost = np.abs(pred[:, None] - new[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty_like(cols)
    perm[rows] = cols
    matched = cost[rows, perm[rows]]
    n = pred.size
    for a in range(n):
        # cost change of swapping the targets of a and every b
        delta = cost[a, perm] + cost[np.arange(n), perm[a]] - matched[a] - matched
        delta[a] = np.inf
        distinct = (np.abs(pred - pred[a]) > same) & (np.abs(new[perm] - new[perm[a]]) > same)
        # the two members of a fresh conjugate pair are interchangeable
        distinct &= np.abs(new[perm] - np.conj(new[perm[a]])) > same
        if np.any(distinct & (delta <= atol)):
            return perm, True
    return perm, False


def trace_levels(spec: EnsembleSpec, variant=SymmetryVariant.PT, path=None, steps: int = 100,
                 tolerance: float = 1e-8, window_fraction: float = 0.25,
                 max_refinements: int = 6) -> LevelFlowTrace:
    """Follow all ``2M`` eigenvalues along ``path`` of ``(T, mu/mu0)`` waypoints.

    Each leg between waypoints is a stage sampled at ``steps`` intervals.
    Consecutive steps are matched by a minimum-total-distance assignment to
    linearly extrapolated positions.  An interval in which a real pair turns
    complex, or whose matching is ambiguous, is bisected up to
    ``max_refinements`` times; events are located at the finest bracket.
    """
    variant = SymmetryVariant.parse(variant)
    path = default_path() if path is None else [tuple(map(float, p)) for p in path]
    if len(path) < 2:
        raise ParameterError("path needs at least two waypoints")
    if steps < 2:
        raise ParameterError("need at least 2 steps per stage")
    for T, m in path:
        if not 0 <= T <= 1 or m < 0:
            raise ParameterError(f"invalid waypoint (T={T}, mu/mu0={m})")

    norm = SpectralNormalization.for_dim(spec.M, window_fraction=window_fraction)
    delta0 = norm.delta0
    mu0 = scales(spec.N, 1.0, delta0).mu0
    tol = tolerance * delta0
    h = sample_h(spec, norm, child_stream(spec.seed, 0))

    def spectrum_at(T, m):
        c = build_coupling(spec.M, spec.N, T, delta0)
        return effective_spectrum(h, c, m * mu0, variant).eigenvalues

    def point(stage, s):
        (T0, m0), (T1, m1) = path[stage], path[stage + 1]
        return T0 + s * (T1 - T0), m0 + s * (m1 - m0)

    params = []
    traj = []
    events, reentries, ambiguous_steps = [], [], []

    z = spectrum_at(*path[0])
    last, velocity = z, np.zeros_like(z)
    params.append((0, *path[0]))
    traj.append(z)

    def advance(stage, s0, s1, cur, vel, depth):
        """Continue from ``cur`` at ``s0`` to ``s1``; ``vel`` is d(E)/ds."""
        new = spectrum_at(*point(stage, s1))
        perm, amb = _match(cur + vel * (s1 - s0), new)
        nxt = new[perm]
        was_real = np.abs(cur.imag) <= tol
        now_cplx = np.abs(nxt.imag) > tol
        turning = np.flatnonzero(was_real & now_cplx)
        returning = np.flatnonzero(~was_real & ~now_cplx)
        if (amb or turning.size or returning.size) and depth < max_refinements:
            sm = 0.5 * (s0 + s1)
            mid, v = advance(stage, s0, sm, cur, vel, depth + 1)
            return advance(stage, sm, s1, mid, v, depth + 1)
        if amb:
            ambiguous_steps.append((stage, float(s1)))
        _record(stage, s0, s1, cur, nxt, turning, returning)
        return nxt, (nxt - cur) / (s1 - s0)

    def _record(stage, s0, s1, cur, nxt, turning, returning):
        seen = set()
        for a in turning:
            if a in seen:
                continue
            partners = [b for b in turning if b != a and b not in seen
                        and abs(nxt[b] - np.conj(nxt[a])) <= 10 * tol + 1e-3 * abs(nxt[a].imag)]
            b = partners[0] if partners else -1
            T, m = point(stage, 0.5 * (s0 + s1))
            resolved = b >= 0 and abs(cur[a].real - cur[b].real) < delta0 / 100
            param = T if path[stage][1] == path[stage + 1][1] else m
            events.append(CoalescenceEvent(stage=stage, parameter=float(param), level_a=int(a),
                                           level_b=int(b), energy=float(nxt[a].real),
                                           resolved=bool(resolved)))
            seen.update({a, b})
        for a in returning:
            T, m = point(stage, 0.5 * (s0 + s1))
            reentries.append((stage, float(m), int(a)))

    for stage in range(len(path) - 1):
        grid = np.linspace(0.0, 1.0, steps + 1)
        for s0, s1 in zip(grid[:-1], grid[1:]):
            last, velocity = advance(stage, s0, s1, last, velocity, 0)
            params.append((stage, *point(stage, s1)))
            traj.append(last)
        velocity = np.zeros_like(velocity)

    traj = np.array(traj)
    first_stage_end = steps
    drift = traj[first_stage_end].real - traj[0].real
    scale = delta0 * 1e-3
    branch = np.where(drift > scale, 1, np.where(drift < -scale, -1, 0))
    return LevelFlowTrace(path=list(path), params=np.array(params), trajectories=traj,
                          events=events, reentries=reentries, ambiguous_steps=ambiguous_steps,
                          branch=branch, tolerance=tol, delta0=delta0, mu0=mu0,
                          window_half_width=norm.window_half_width)
