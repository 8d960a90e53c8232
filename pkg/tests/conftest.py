import numpy as np
import pytest

from finslerkit import gallery

GALLERY_SPECS = [
    ("euclidean", {"n": 2}),
    ("minkowski", {"n": 2, "eps": 0.3}),
    ("funk", {"n": 2}),
    ("shen_flat", {"n": 2}),
    ("rotation2d", {}),
    ("cylinder", {"n": 3}),
    ("bao_shen_s3", {"eps": 0.3}),
    ("slab", {"kappa": 0.5}),
]

RANDERS_SPECS = [
    ("euclidean", {"n": 2}),
    ("funk", {"n": 2}),
    ("rotation2d", {}),
    ("cylinder", {"n": 3}),
    ("bao_shen_s3", {"eps": 0.3}),
    ("slab", {"kappa": 0.5}),
]


@pytest.fixture(scope="session")
def entries():
    return {name: gallery.make(name, **kw) for name, kw in GALLERY_SPECS}


@pytest.fixture(scope="session")
def rotation2d():
    return gallery.rotation2d()


@pytest.fixture(scope="session")
def funk2():
    return gallery.funk(2)


@pytest.fixture(scope="session")
def cylinder3():
    return gallery.cylinder(3)


def sample_sites(entry, n, seed):
    """Seeded interior points plus unit tangent directions."""
    pts = entry.metric.domain.sample_points(n, seed)
    rng = np.random.default_rng([seed, 77])
    dirs = rng.normal(size=(n, entry.dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return pts, dirs


def disk_sites(n, seed, radius=0.95, dim=2, z_extent=0.0):
    """Points uniform in the disk/cylinder of given radius, unit directions."""
    rng = np.random.default_rng([seed, 55])
    pts = []
    while len(pts) < n:
        cand = rng.uniform(-radius, radius, size=(4 * n, 2))
        for row in cand:
            if row @ row < radius * radius:
                pts.append(row)
                if len(pts) == n:
                    break
    pts = np.array(pts)
    if dim > 2:
        extra = rng.uniform(-z_extent, z_extent, size=(n, dim - 2))
        pts = np.hstack([pts, extra])
    dirs = rng.normal(size=(n, dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return pts, dirs
