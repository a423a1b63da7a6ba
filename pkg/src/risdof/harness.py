"""Monte-Carlo drivers for feasibility grids and phase-transition curves.

Every trial draws from its own random stream keyed by the master seed and
the trial coordinates, so results do not depend on execution order or on
how many worker processes are used.
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .channel import RisChannel, sample_channel
from .numerics import Rng, gaussian_complex
from .optimizer import DEFAULT_DELTA, AlmParams
from .precoding import DEFAULT_RESTARTS, SlpProblem, solve

FEASGRID = "feasgrid"
TRANSITION = "transition"
PERCENTILES = "percentiles"
KINDS = (FEASGRID, TRANSITION, PERCENTILES)

# stream tags, first component of every per-trial stream key
_S_GRID_CHANNEL = 1
_S_GRID_POINT = 2
_S_TRANSITION = 3

FEASGRID_HEADER = ["re", "im", "residual", "feasible"]
TRANSITION_HEADER = ["m", "k", "n", "direct", "trials", "successes", "prob"]
PERCENTILE_HEADER = ["k", "level", "n_first", "n_interp"]

DEFAULT_LEVELS = (0.2, 0.5, 0.8)


class RangeError(ValueError):
    """Requested success level is not bracketed by the simulated N range."""


@dataclass
class ExperimentConfig:
    kind: str = TRANSITION
    m: int = 2
    n: int = 5
    n_min: int = 2
    n_max: int = 8
    k: int = 4
    k_list: tuple = (4,)
    direct: bool = False
    p: float = None  # per-kind default: 1 for grids, 10 for transitions
    sigma2: float = 1.0
    trials: int = 200
    grid_res: int = 81
    grid_extent: float = 1.5
    delta: float = DEFAULT_DELTA
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    levels: tuple = DEFAULT_LEVELS
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.p is None:
            self.p = 1.0 if self.kind == FEASGRID else 10.0
        self.k_list = tuple(int(k) for k in self.k_list)
        self.levels = tuple(float(v) for v in self.levels)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.grid_res < 2:
            raise ValueError("grid resolution must be >= 2")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError(f"empty N range [{self.n_min}, {self.n_max}]")
        if min(self.m, self.n, self.k) < 1 or not self.k_list or min(self.k_list) < 1:
            raise ValueError("dimensions must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.delta <= 0 or self.p < 0 or self.grid_extent <= 0:
            raise ValueError("delta, P and grid extent must be positive")
        if not self.levels or not all(0 < v <= 1 for v in self.levels):
            raise ValueError("success levels must lie in (0, 1]")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self):
        d = asdict(self)
        d["k_list"] = list(self.k_list)
        d["levels"] = list(self.levels)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _run_items(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def nested_channel(seed, m, n, k, direct=False, p=1.0, sigma2=1.0):
    """Channel whose first N RIS elements do not depend on N.

    Element i draws its H column and G row from its own stream, so channels
    for increasing N share their leading elements.
    """
    root = Rng(seed, (_S_GRID_CHANNEL,))
    cols, rows = [], []
    for i in range(n):
        r = root.spawn(1 + i)
        cols.append(gaussian_complex(r, k, 1)[:, 0])
        rows.append(gaussian_complex(r, 1, m)[0])
    h = np.stack(cols, axis=1)
    g = np.stack(rows, axis=0)
    f = gaussian_complex(root.spawn(0), k, m) if direct else np.zeros((k, m), complex)
    return RisChannel(h, g, f, p, sigma2)


# -- feasibility grid ---------------------------------------------------------

@dataclass
class FeasGridResult:
    config: ExperimentConfig
    channel: RisChannel
    rows: list  # (re, im, residual, feasible), row-major over (im, re)
    stalled: int = 0

    def feasible_fraction(self, min_abs=0.0):
        sel = [r for r in self.rows if abs(complex(r[0], r[1])) >= min_abs]
        if not sel:
            return 0.0
        return sum(1 for r in sel if r[3]) / len(sel)

    def grid(self):
        """(re axis, im axis, feasible mask [im, re], residual [im, re])."""
        res = self.config.grid_res
        axis = np.linspace(-self.config.grid_extent, self.config.grid_extent, res)
        feas = np.array([r[3] for r in self.rows], dtype=bool).reshape(res, res)
        resid = np.array([r[2] for r in self.rows]).reshape(res, res)
        return axis, axis, feas, resid


def _grid_point(item):
    cfg, ch, params, i, j, y = item
    target = np.full(ch.k, y)
    rng = Rng(cfg.seed, (_S_GRID_POINT, ch.n, i, j))
    sol = solve(SlpProblem(ch, target), params, cfg.restarts, rng, cfg.delta)
    return sol.residual, sol.feasible, sol.stalled


def run_feasgrid(cfg, params=AlmParams()):
    """Feasibility of Y = [y, ..., y] over a square grid of y, one channel."""
    ch = nested_channel(cfg.seed, cfg.m, cfg.n, cfg.k, cfg.direct, cfg.p, cfg.sigma2)
    axis = np.linspace(-cfg.grid_extent, cfg.grid_extent, cfg.grid_res)
    items = [(cfg, ch, params, i, j, complex(axis[j], axis[i]))
             for i in range(cfg.grid_res) for j in range(cfg.grid_res)]
    out = _run_items(_grid_point, items, cfg.threads)
    rows, stalled = [], 0
    for it, (resid, feas, st) in zip(items, out):
        y = it[5]
        rows.append((float(y.real), float(y.imag), float(resid), bool(feas)))
        stalled += bool(st)
    return FeasGridResult(cfg, ch, rows, stalled)


# -- phase transition -----------------------------------------------------------

@dataclass
class TransitionRow:
    m: int
    k: int
    n: int
    direct: bool
    trials: int
    successes: int
    stalled: int = 0

    @property
    def prob(self):
        return self.successes / self.trials


@dataclass
class TransitionResult:
    rows: list = field(default_factory=list)

    def ks(self):
        return sorted({r.k for r in self.rows})

    def curve(self, k, direct=None):
        sel = [r for r in self.rows if r.k == k and (direct is None or r.direct == direct)]
        sel.sort(key=lambda r: r.n)
        return [r.n for r in sel], [r.prob for r in sel]

    def crossing(self, k, level=0.5, direct=None):
        ns, ps = self.curve(k, direct)
        return _level_crossing(ns, ps, level)[1]

    @property
    def stalled(self):
        return sum(r.stalled for r in self.rows)

    @property
    def total_trials(self):
        return sum(r.trials for r in self.rows)


def _transition_trial(item):
    cfg, params, k, n, t = item
    rng = Rng(cfg.seed, (_S_TRANSITION, k, n, int(cfg.direct), t))
    ch = sample_channel(rng.spawn(0), cfg.m, n, k, cfg.direct, cfg.p, cfg.sigma2)
    target = np.exp(1j * rng.spawn(1).uniform_phase(k))
    sol = solve(SlpProblem(ch, target), params, cfg.restarts, rng.spawn(2), cfg.delta)
    return sol.feasible, sol.stalled


def run_transition(cfg, params=AlmParams()):
    """Success probability of synthesizing a random unit-circle K-vector, per (K, N)."""
    items = [(cfg, params, k, n, t)
             for k in cfg.k_list
             for n in range(cfg.n_min, cfg.n_max + 1)
             for t in range(cfg.trials)]
    out = _run_items(_transition_trial, items, cfg.threads)
    agg = {}
    for (_, _, k, n, _), (ok, st) in zip(items, out):
        s, q = agg.get((k, n), (0, 0))
        agg[(k, n)] = (s + bool(ok), q + bool(st))
    rows = [TransitionRow(cfg.m, k, n, cfg.direct, cfg.trials, s, q)
            for (k, n), (s, q) in sorted(agg.items())]
    return TransitionResult(rows)


def _level_crossing(ns, ps, level):
    """First N with success >= level, and the linearly interpolated crossing."""
    for i, (n, p) in enumerate(zip(ns, ps)):
        if p >= level:
            if i == 0:
                if p > level:
                    raise RangeError(f"level {level} lies below the curve at N={n}")
                return n, float(n)
            n0, p0 = ns[i - 1], ps[i - 1]
            return n, n0 + (level - p0) / (p - p0) * (n - n0)
    raise RangeError(f"level {level} is never reached over N in [{ns[0]}, {ns[-1]}]")


def percentile_table(result, levels=DEFAULT_LEVELS):
    """Rows (k, level, n_first, n_interp) for each K in the result."""
    out = []
    for k in result.ks():
        ns, ps = result.curve(k)
        for level in levels:
            n_first, n_interp = _level_crossing(ns, ps, level)
            out.append((k, level, n_first, n_interp))
    return out


# -- output -------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def feasgrid_rows(result):
    return result.rows


def transition_rows(result):
    return [(r.m, r.k, r.n, r.direct, r.trials, r.successes, r.prob) for r in result.rows]


def read_transition_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRANSITION_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRANSITION_HEADER)}")
        for d in reader:
            rows.append(TransitionRow(int(d["m"]), int(d["k"]), int(d["n"]),
                                      d["direct"] == "1", int(d["trials"]),
                                      int(d["successes"])))
    return TransitionResult(rows)


def write_metadata(path, cfg, params, wall_time, **extra):
    meta = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "solver": params.to_dict(),
        "wall_time_s": wall_time,
    }
    meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
