"""
world module
axis-aligned box obstacles in the unit hypercube, the counted collision detector and
seeded scenario generation
"""
import json
import logging as log
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from threading import Lock
import numpy as np
from scipy import ndimage
from .. import DEFAULT_RESOLUTION
from .roadmap import EdgeStatus


MAX_XI_OBS = 0.9
PLACEMENT_RETRIES = 100
LAYOUT_ATTEMPTS = 200
COVERAGE_SAMPLES = 100_000
MIN_HALF_WIDTH = 0.01
PATH_CLEARANCE = 0.01
RASTER_CELLS = 2**22

PRESETS = {
    "empty": (0, 0.0),
    "easy-2d": (100, 0.33),
    "hard-2d": (1000, 0.75),
    "easy-4d": (500, 0.33),
    "hard-4d": (3000, 0.75),
}


class ScenarioError(RuntimeError):
    """
    raised when a scenario cannot be generated; `diagnostics` holds what was attempted
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class Obstacle:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError(f"corner dimensions differ: {len(self.lo)} != {len(self.hi)}")
        for l, h in zip(self.lo, self.hi):
            if not 0.0 <= l < h <= 1.0:
                raise ValueError(f"invalid obstacle extent [{l}, {h}]")

    def contains(self, q):
        return all(l <= x <= h for l, x, h in zip(self.lo, q, self.hi))


@dataclass
class EdgeResult:
    status: EdgeStatus
    configs: np.ndarray
    in_collision: np.ndarray

    @property
    def tested(self):
        return [(q, bool(c)) for q, c in zip(self.configs, self.in_collision)]


@lru_cache(maxsize=4096)
def bisection_order(m):
    """
    order in which the m evenly spaced configurations of an edge are tested:
    interior midpoints breadth-first, then both endpoints
    """
    if m == 1:
        return (0,)
    order = []
    queue = deque([(0, m - 1)])
    while queue:
        lo, hi = queue.popleft()
        if hi - lo < 2:
            continue
        mid = (lo + hi) // 2
        order.append(mid)
        queue.append((lo, mid))
        queue.append((mid, hi))
    order.extend((0, m - 1))
    return tuple(order)


def num_edge_configs(length, resolution):
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    return int(math.ceil(length / resolution)) + 1


def interpolate(u, v, resolution):
    """
    evenly spaced configurations along the segment uv, at most `resolution` apart, endpoints
    included; always generated from the lexicographically smaller endpoint so that uv and vu
    embed bit-identical configurations
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if tuple(v) < tuple(u):
        u, v = v, u
    m = num_edge_configs(float(np.linalg.norm(v - u)), resolution)
    if m == 1:
        return u[None, :].copy()
    return np.linspace(u, v, m)


def boxes_contain(lo, hi, points):
    """
    (m,) mask of points lying in at least one of the closed boxes [lo, hi]
    """
    points = np.atleast_2d(points)
    if lo.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=bool)
    inside = (points[:, None, :] >= lo[None, :, :]) & (points[:, None, :] <= hi[None, :, :])
    return inside.all(axis=2).any(axis=1)


def cover_samples(lo, hi, samples, covered=None):
    """
    marks the samples lying in any of the closed boxes [lo, hi], on top of `covered` when given
    """
    if covered is None:
        covered = np.zeros(samples.shape[0], dtype=bool)
    for l, h in zip(lo, hi):
        covered |= np.all((samples >= l) & (samples <= h), axis=1)
    return covered


def raster_size(d, clearance=PATH_CLEARANCE, max_cells=RASTER_CELLS):
    return max(2, min(math.ceil(1.0 / (2.0 * clearance)), int(max_cells ** (1.0 / d))))


def free_space_connected(lo, hi, start, goal, clearance=PATH_CLEARANCE):
    """
    conservative start-goal connectivity: the hypercube is cut into g^d closed cells, a cell
    touching any closed box is occupied, and start and goal must lie in one face-connected
    component of free cells, so a positive answer guarantees a collision-free path
    """
    d = len(start)
    g = raster_size(d, clearance)
    occupied = np.zeros((g,) * d, dtype=bool)
    # cell i spans [i/g, (i+1)/g] and meets [l, h] iff ceil(l*g) - 1 <= i <= floor(h*g)
    first = np.clip(np.ceil(np.asarray(lo) * g).astype(int) - 1, 0, g - 1)
    last = np.clip(np.floor(np.asarray(hi) * g).astype(int), 0, g - 1)
    for a, b in zip(first.reshape(-1, d), last.reshape(-1, d)):
        occupied[tuple(slice(i, j + 1) for i, j in zip(a, b))] = True
    labels, _ = ndimage.label(~occupied)
    s = tuple(np.minimum((np.asarray(start) * g).astype(int), g - 1))
    t = tuple(np.minimum((np.asarray(goal) * g).astype(int), g - 1))
    return bool(labels[s] != 0 and labels[s] == labels[t])


class World:
    """
    obstacle set of a hypercube scenario; every configuration-level detector call increments
    `check_counter`
    """

    def __init__(
        self,
        d,
        obstacles=(),
        start=None,
        goal=None,
        resolution=DEFAULT_RESOLUTION,
        seed=None,
        xi_obs_target=0.0,
        xi_obs_realized=0.0,
    ):
        self.d = d
        obstacles = list(obstacles)
        for o in obstacles:
            if len(o.lo) != d:
                raise ValueError(f"obstacle of dimension {len(o.lo)} in a {d}-dimensional world")
        self.lo = np.array([o.lo for o in obstacles], dtype=np.float64).reshape(-1, d)
        self.hi = np.array([o.hi for o in obstacles], dtype=np.float64).reshape(-1, d)
        self.start = np.full(d, 0.25) if start is None else np.asarray(start, dtype=np.float64)
        self.goal = np.full(d, 0.75) if goal is None else np.asarray(goal, dtype=np.float64)
        self.resolution = resolution
        self.seed = seed
        self.xi_obs_target = xi_obs_target
        self.xi_obs_realized = xi_obs_realized
        self.__counter = 0
        self.__lock = Lock()

    @property
    def obstacles(self):
        return [Obstacle(tuple(l.tolist()), tuple(h.tolist())) for l, h in zip(self.lo, self.hi)]

    @property
    def check_counter(self):
        return self.__counter

    def __count(self, n):
        with self.__lock:
            self.__counter += n

    def fresh(self):
        """
        returns a copy sharing the obstacle set with its own zeroed counter
        """
        world = World(
            self.d,
            start=self.start,
            goal=self.goal,
            resolution=self.resolution,
            seed=self.seed,
            xi_obs_target=self.xi_obs_target,
            xi_obs_realized=self.xi_obs_realized,
        )
        world.lo, world.hi = self.lo, self.hi
        return world

    def _check_dimension(self, q):
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.d,):
            raise ValueError(f"configuration of shape {q.shape} in a {self.d}-dimensional world")
        return q

    def is_config_free(self, q):
        q = self._check_dimension(q)
        self.__count(1)
        return not bool(boxes_contain(self.lo, self.hi, q)[0])

    def check_edge(self, u, v, resolution=None):
        """
        tests the configurations of segment uv in bisection order and stops at the first collision
        """
        u = self._check_dimension(u)
        v = self._check_dimension(v)
        configs = interpolate(u, v, resolution or self.resolution)
        configs = configs[list(bisection_order(configs.shape[0]))]
        hits = boxes_contain(self.lo, self.hi, configs)
        if hits.any():
            n_tested = int(np.argmax(hits)) + 1
            status = EdgeStatus.BLOCKED
        else:
            n_tested = configs.shape[0]
            status = EdgeStatus.FREE
        self.__count(n_tested)
        return EdgeResult(status, configs[:n_tested], hits[:n_tested])

    def coverage_estimate(self, num_samples=COVERAGE_SAMPLES, seed=0):
        """
        Monte-Carlo fraction of the hypercube covered by obstacles; does not touch the counter
        """
        if num_samples < 1:
            raise ValueError(f"need at least one sample, got {num_samples}")
        samples = np.random.default_rng(seed).uniform(0.0, 1.0, (num_samples, self.d))
        return float(cover_samples(self.lo, self.hi, samples).mean())

    def to_dict(self):
        return {
            "d": self.d,
            "start": self.start.tolist(),
            "goal": self.goal.tolist(),
            "xi_obs_target": self.xi_obs_target,
            "xi_obs_realized": self.xi_obs_realized,
            "seed": self.seed,
            "resolution": self.resolution,
            "obstacles": [{"lo": l.tolist(), "hi": h.tolist()} for l, h in zip(self.lo, self.hi)],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["d"],
            obstacles=[Obstacle(tuple(o["lo"]), tuple(o["hi"])) for o in data["obstacles"]],
            start=data["start"],
            goal=data["goal"],
            resolution=data.get("resolution", DEFAULT_RESOLUTION),
            seed=data.get("seed"),
            xi_obs_target=data.get("xi_obs_target", 0.0),
            xi_obs_realized=data.get("xi_obs_realized", 0.0),
        )

    def save(self, filename):
        with open(filename, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=1)
            f.write("\n")

    @classmethod
    def load(cls, filename):
        with open(filename, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class ScenarioParams:
    d: int
    num_obstacles: int
    xi_obs: float
    seed: int
    start: np.ndarray = None
    goal: np.ndarray = None
    resolution: float = DEFAULT_RESOLUTION
    samples: int = field(default=COVERAGE_SAMPLES, repr=False)
    require_path: bool = True

    def __post_init__(self):
        if self.start is None:
            self.start = np.full(self.d, 0.25)
        if self.goal is None:
            self.goal = np.full(self.d, 0.75)

    @classmethod
    def from_preset(cls, name, seed, d=None, **kwargs):
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}, choose from {sorted(PRESETS)}")
        num_obstacles, xi_obs = PRESETS[name]
        if d is None:
            d = 4 if name.endswith("4d") else 2
        return cls(d=d, num_obstacles=num_obstacles, xi_obs=xi_obs, seed=seed, **kwargs)


def max_half_width(params):
    """
    upper end of the uniform half-width draw, 0.5 * xi_obs^(1/d)
    """
    return max(MIN_HALF_WIDTH, 0.5 * params.xi_obs ** (1.0 / params.d))


def _place_obstacles(params, rng, samples, attempt):
    d = params.d
    start = np.asarray(params.start, dtype=np.float64)
    goal = np.asarray(params.goal, dtype=np.float64)
    hw_max = max_half_width(params)
    covered = np.zeros(samples.shape[0], dtype=bool)
    lo_all, hi_all = [], []
    while len(lo_all) < params.num_obstacles and covered.mean() < params.xi_obs:
        for _ in range(PLACEMENT_RETRIES):
            center = rng.uniform(0.0, 1.0, d)
            half_width = rng.uniform(MIN_HALF_WIDTH, hw_max, d)
            lo = np.clip(center - half_width, 0.0, 1.0)
            hi = np.clip(center + half_width, 0.0, 1.0)
            if not (np.all((lo <= start) & (start <= hi)) or np.all((lo <= goal) & (goal <= hi))):
                break
        else:
            raise ScenarioError(
                f"could not place obstacle {len(lo_all) + 1} clear of start and goal",
                diagnostics={
                    "params": params,
                    "retries": PLACEMENT_RETRIES,
                    "attempt": attempt,
                    "placed": len(lo_all),
                    "coverage": float(covered.mean()),
                },
            )
        lo_all.append(lo)
        hi_all.append(hi)
        cover_samples(lo[None, :], hi[None, :], samples, covered)
    return np.array(lo_all).reshape(-1, d), np.array(hi_all).reshape(-1, d), float(covered.mean())


def generate_scenario(params):
    """
    places random boxes until the obstacle budget or the coverage target is reached; boxes
    touching start or goal are redrawn, and with `require_path` whole layouts are redrawn from
    derived seeds until start and goal are connected
    """
    if not 0.0 <= params.xi_obs < MAX_XI_OBS:
        raise ValueError(f"xi_obs must lie in [0, {MAX_XI_OBS}), got {params.xi_obs}")
    if params.num_obstacles < 0:
        raise ValueError(f"negative obstacle count {params.num_obstacles}")

    d = params.d
    sample_seq, layout_seq = np.random.SeedSequence(params.seed).spawn(2)
    samples = np.random.default_rng(sample_seq).uniform(0.0, 1.0, (params.samples, d))

    for attempt, seq in enumerate(layout_seq.spawn(LAYOUT_ATTEMPTS)):
        lo, hi, realized = _place_obstacles(params, np.random.default_rng(seq), samples, attempt)
        if not params.require_path or free_space_connected(lo, hi, params.start, params.goal):
            break
        log.debug(f"layout {attempt} of seed {params.seed} separates start and goal, redrawing")
    else:
        raise ScenarioError(
            f"no layout out of {LAYOUT_ATTEMPTS} connects start and goal",
            diagnostics={"params": params, "attempts": LAYOUT_ATTEMPTS, "coverage": realized},
        )

    log.info(
        f"generated {lo.shape[0]} obstacles in d={d} (seed {params.seed}, layout {attempt}), "
        f"coverage {realized:.3f} for target {params.xi_obs:.3f}"
    )
    return World(
        d,
        [Obstacle(tuple(l.tolist()), tuple(h.tolist())) for l, h in zip(lo, hi)],
        start=params.start,
        goal=params.goal,
        resolution=params.resolution,
        seed=params.seed,
        xi_obs_target=params.xi_obs,
        xi_obs_realized=realized,
    )
