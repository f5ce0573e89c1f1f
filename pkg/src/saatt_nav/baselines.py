"""Comparison methods: grid A*, social force model, and the planner with intent reasoning removed."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Vec2
from .env import Observation, PedestrianState, WorldConfig
from .planner import PlannerConfig, plan

SQRT2 = math.sqrt(2.0)


class MethodKind(enum.Enum):
    SAATT = "saatt"
    ABLATION = "ablation"
    ASTAR = "astar"
    SFM = "sfm"

    @property
    def label(self) -> str:
        return {"saatt": "SAATT", "ablation": "Ablation", "astar": "A*", "sfm": "SFM"}[self.value]

    @classmethod
    def parse(cls, name: str) -> MethodKind:
        key = name.strip().lower().replace("*", "star")
        for m in cls:
            if m.value == key or m.label.lower() == name.strip().lower():
                return m
        raise ValueError(f"unknown method {name!r}")


class NoPathError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridConfig:
    cell_size: float = 0.1
    inflation_radius: float = 0.4
    lookahead: float = 0.5

    def validate(self, world: WorldConfig = WorldConfig()) -> None:
        if self.cell_size <= 0:
            raise ValueError("cell size must be positive")
        if self.inflation_radius < world.wheelchair_radius:
            raise ValueError("inflation radius must cover the wheelchair radius")
        if self.lookahead <= 0:
            raise ValueError("lookahead must be positive")


@dataclass(frozen=True)
class SfmParams:
    tau_relax: float = 0.5
    a_ped: float = 2.1
    b_ped: float = 0.3
    a_wall: float = 10.0
    b_wall: float = 0.2
    lookahead: float = 1.0

    def validate(self) -> None:
        if min(self.a_ped, self.a_wall) < 0:
            raise ValueError("repulsion amplitudes must be non-negative")
        if min(self.b_ped, self.b_wall, self.tau_relax, self.lookahead) <= 0:
            raise ValueError("ranges, relaxation time and lookahead must be positive")


# --------------------------------------------------------------------------- A*


@dataclass(frozen=True)
class OccupancyGrid:
    occupied: np.ndarray  # [row, col], row indexes y
    cell_size: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.occupied.shape

    def cell_of(self, p: Vec2) -> tuple[int, int]:
        rows, cols = self.occupied.shape
        r = min(max(int(p.y / self.cell_size), 0), rows - 1)
        c = min(max(int(p.x / self.cell_size), 0), cols - 1)
        return r, c

    def center_of(self, cell: tuple[int, int]) -> Vec2:
        r, c = cell
        return Vec2((c + 0.5) * self.cell_size, (r + 0.5) * self.cell_size)


def build_occupancy(
    pedestrians: Sequence[PedestrianState],
    world: WorldConfig = WorldConfig(),
    grid: GridConfig = GridConfig(),
) -> OccupancyGrid:
    """Walls plus every pedestrian as a static disk, all inflated by ``grid.inflation_radius``."""
    cols = int(round(world.arena_width / grid.cell_size))
    rows = int(round(world.arena_height / grid.cell_size))
    xs = (np.arange(cols) + 0.5) * grid.cell_size
    ys = (np.arange(rows) + 0.5) * grid.cell_size
    X, Y = np.meshgrid(xs, ys)
    infl = grid.inflation_radius
    occ = (X <= infl) | (X >= world.arena_width - infl) | (Y <= infl) | (Y >= world.arena_height - infl)
    for ped in pedestrians:
        reach = ped.radius + infl
        occ |= (X - ped.position.x) ** 2 + (Y - ped.position.y) ** 2 <= reach * reach
    return OccupancyGrid(occ, grid.cell_size)


_MOVES = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def grid_neighbors(occ: np.ndarray, cell: tuple[int, int]):
    """8-connected free neighbours; a diagonal move needs both adjacent orthogonal cells free."""
    rows, cols = occ.shape
    r, c = cell
    for dr, dc in _MOVES:
        nr, nc = r + dr, c + dc
        if not (0 <= nr < rows and 0 <= nc < cols) or occ[nr, nc]:
            continue
        diagonal = dr != 0 and dc != 0
        if diagonal and (occ[r, nc] or occ[nr, c]):
            continue
        yield (nr, nc), diagonal


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    return (max(dr, dc) - min(dr, dc)) + SQRT2 * min(dr, dc)


def astar_grid(
    occ: np.ndarray, start: tuple[int, int], goal: tuple[int, int]
) -> tuple[list[tuple[int, int]], tuple[int, int]]:
    """Shortest 8-connected path in cells and its cost as (straight moves, diagonal moves).

    Frontier ties break on lower f, then lower h, then row-major cell index.
    The start cell is treated as free.
    """
    if occ[goal]:
        raise NoPathError("goal cell is occupied")
    occ = occ.copy()
    occ[start] = False
    cols = occ.shape[1]
    g: dict[tuple[int, int], tuple[int, int]] = {start: (0, 0)}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    h0 = octile(start, goal)
    frontier = [(h0, h0, start[0] * cols + start[1], start)]
    closed = set()
    while frontier:
        _, _, _, cell = heapq.heappop(frontier)
        if cell in closed:
            continue
        if cell == goal:
            path = [cell]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return path, g[goal]
        closed.add(cell)
        ns, nd = g[cell]
        for nxt, diagonal in grid_neighbors(occ, cell):
            if nxt in closed:
                continue
            cand = (ns, nd + 1) if diagonal else (ns + 1, nd)
            cand_cost = cand[0] + SQRT2 * cand[1]
            old = g.get(nxt)
            if old is not None and old[0] + SQRT2 * old[1] <= cand_cost:
                continue
            g[nxt] = cand
            parent[nxt] = cell
            h = octile(nxt, goal)
            heapq.heappush(frontier, (cand_cost + h, h, nxt[0] * cols + nxt[1], nxt))
    raise NoPathError("goal unreachable")


def inflated_gap_passable(
    p1: Vec2,
    p2: Vec2,
    pedestrians: Sequence[PedestrianState],
    world: WorldConfig = WorldConfig(),
    grid: GridConfig = GridConfig(),
) -> bool:
    """True when some free cell of the inflated grid lies on the segment between two pedestrians."""
    occ = build_occupancy(pedestrians, world, grid)
    n = max(2, int(math.ceil(p1.dist(p2) / (0.25 * grid.cell_size))))
    for i in range(n + 1):
        cell = occ.cell_of(p1 + (p2 - p1) * (i / n))
        if not occ.occupied[cell]:
            return True
    return False


@dataclass(frozen=True)
class AStarPlan:
    path: list[Vec2]
    cells: list[tuple[int, int]]
    cost_moves: tuple[int, int]
    cell_size: float = 0.1

    @property
    def cost(self) -> float:
        return (self.cost_moves[0] + SQRT2 * self.cost_moves[1]) * self.cell_size


def astar_plan(
    start: Vec2,
    goal: Vec2,
    pedestrians: Sequence[PedestrianState],
    world: WorldConfig = WorldConfig(),
    grid: GridConfig = GridConfig(),
) -> AStarPlan:
    """Plan once over pedestrians frozen at their current positions; raises NoPathError."""
    occ = build_occupancy(pedestrians, world, grid)
    s, g = occ.cell_of(start), occ.cell_of(goal)
    cells, moves = astar_grid(occ.occupied, s, g)
    path = [occ.center_of(c) for c in cells]
    path[-1] = goal
    return AStarPlan(path, cells, moves, grid.cell_size)


def astar_follow(
    position: Vec2, path: Sequence[Vec2], lookahead: float = 0.5, v_nom: float = 1.5
) -> tuple[Vec2, float]:
    """First path point beyond ``lookahead``, searching forward from the closest path point."""
    if not path:
        raise ValueError("empty path")
    nearest = min(range(len(path)), key=lambda i: (path[i].dist(position), i))
    for p in path[nearest:]:
        if p.dist(position) > lookahead:
            return p, v_nom
    return path[-1], v_nom


# -------------------------------------------------------------------------- SFM


def _repulsion(amplitude: float, rng: float, reach: float, dist: float) -> float:
    return amplitude * math.exp((reach - dist) / rng)


def sfm_force(
    observation: Observation,
    params: SfmParams = SfmParams(),
    world: WorldConfig = WorldConfig(),
    v_nom: float = 1.5,
) -> Vec2:
    """Net social force on the wheelchair: goal relaxation plus pedestrian and wall repulsion."""
    wc = observation.wheelchair
    p = wc.position
    vel = Vec2(math.cos(wc.heading), math.sin(wc.heading)) * wc.linear_velocity
    to_goal = observation.goal - p
    dg = to_goal.norm()
    desired = to_goal * (v_nom / dg) if dg > 0 else Vec2(0.0, 0.0)
    fx = (desired.x - vel.x) / params.tau_relax
    fy = (desired.y - vel.y) / params.tau_relax

    for ped in observation.pedestrians:
        off = p - ped.position
        d = off.norm()
        if d == 0.0:
            continue
        mag = _repulsion(params.a_ped, params.b_ped, wc.radius + ped.radius, d)
        fx += mag * off.x / d
        fy += mag * off.y / d

    w, h = world.arena_width, world.arena_height
    # (distance to wall, outward-from-wall unit normal)
    for d, nx, ny in ((p.x, 1.0, 0.0), (w - p.x, -1.0, 0.0), (p.y, 0.0, 1.0), (h - p.y, 0.0, -1.0)):
        mag = _repulsion(params.a_wall, params.b_wall, wc.radius, d)
        fx += mag * nx
        fy += mag * ny
    return Vec2(fx, fy)


def sfm_subgoal(
    observation: Observation,
    params: SfmParams = SfmParams(),
    world: WorldConfig = WorldConfig(),
    v_nom: float = 1.5,
) -> tuple[Vec2, float]:
    """Short-horizon subgoal along the velocity the net force relaxes towards.

    ``v + tau * F`` equals the desired goal velocity plus ``tau`` times the
    repulsions, so at rest it points along ``F`` itself.
    """
    wc = observation.wheelchair
    force = sfm_force(observation, params, world, v_nom)
    vel = Vec2(math.cos(wc.heading), math.sin(wc.heading)) * wc.linear_velocity
    direction = vel + force * params.tau_relax
    n = direction.norm()
    if n < 1e-9:
        return observation.goal, v_nom
    return wc.position + direction * (params.lookahead / n), v_nom


# --------------------------------------------------------------------- Ablation


def ablation_policy(observation: Observation, config: PlannerConfig = PlannerConfig()) -> tuple[Vec2, float]:
    return plan(observation, None, None, config)
