"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest

from radmesh.geom import Ball


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def random_balls(rng, n, box=10.0, rmin=0.1, rmax=1.5):
    pts = rng.uniform(0.0, box, (n, 2))
    rads = rng.uniform(rmin, rmax, n)
    return [Ball((float(x), float(y)), float(r)) for (x, y), r in zip(pts, rads)]


def jittered_grid(rng, n, jitter=0.15, radius=None, fix_boundary=False):
    """n x n unit grid of equal circles, interior centers jittered."""
    if radius is None:
        radius = math.sqrt(2.0) / 2.0
    balls = []
    for i in range(n):
        for j in range(n):
            boundary = i in (0, n - 1) or j in (0, n - 1)
            if boundary and fix_boundary:
                c = (float(i), float(j))
            else:
                d = rng.uniform(-jitter, jitter, 2)
                c = (i + float(d[0]), j + float(d[1]))
            balls.append(Ball(c, radius, fix_center=boundary and fix_boundary))
    return balls


@pytest.fixture
def rng():
    return philox(0)
