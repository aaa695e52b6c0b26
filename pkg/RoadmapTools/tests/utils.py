"""
variables required for testing functionality of the package
"""
import math
import numpy as np
from RoadmapTools.lib.roadmap import build_samples
from RoadmapTools.lib.world import Obstacle, World

HALTON_2D = [
    (1, (1 / 2, 1 / 3)),
    (2, (1 / 4, 2 / 3)),
    (4, (1 / 8, 4 / 9)),
]

START_2D = (0.25, 0.25)
GOAL_2D = (0.75, 0.75)
DIRECT_LENGTH_2D = math.sqrt(0.5)

# vertical wall across the straight start-goal line, passable above y = 0.7
WALL = Obstacle((0.45, 0.0), (0.55, 0.7))

# four thin walls enclosing the goal
GOAL_CAGE = [
    Obstacle((0.65, 0.65), (0.67, 0.85)),
    Obstacle((0.83, 0.65), (0.85, 0.85)),
    Obstacle((0.65, 0.65), (0.85, 0.67)),
    Obstacle((0.65, 0.83), (0.85, 0.85)),
]


def empty_world(d=2):
    return World(d)


def wall_world():
    return World(2, [WALL])


def caged_world():
    return World(2, GOAL_CAGE)


def grid_samples(start=START_2D, goal=GOAL_2D, steps=5):
    """
    start and goal followed by the points of a regular steps x steps grid strictly inside the square
    """
    axis = (np.arange(steps) + 0.5) / steps
    points = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    return build_samples(start, goal, points)
