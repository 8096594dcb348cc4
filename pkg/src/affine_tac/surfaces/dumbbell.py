"""A sphere pinched into a dumbbell

The surface is the image of the unit sphere under F(x, y, z) = (w(z) x, w(z) y, L z) with the
neck profile w(z) = 1 - depth exp(-sharpness z²). F is a diffeomorphism of R³ whenever w > 0.
"""

import numpy as np

from affine_tac.exceptions import InputError
from affine_tac.manifold import Atlas
from affine_tac.surfaces.sphere import MapJet, composite_atlas, spherical_atlas

NECK_DEPTH = 0.6
NECK_SHARPNESS = 8.0
STRETCH = 1.5


def neck_profile(
    z: np.ndarray, depth: float = NECK_DEPTH, sharpness: float = NECK_SHARPNESS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """w(z) and its first two derivatives"""
    bump = depth * np.exp(-sharpness * z**2)
    w = 1 - bump
    dw = 2 * sharpness * z * bump
    d2w = 2 * sharpness * bump * (1 - 2 * sharpness * z**2)
    return w, dw, d2w


def dumbbell_map(
    depth: float = NECK_DEPTH, sharpness: float = NECK_SHARPNESS, stretch: float = STRETCH,
) -> MapJet:
    """The jet of F, usable with composite charts"""

    def map_jet(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        w, dw, d2w = neck_profile(z, depth, sharpness)
        zero = np.zeros_like(z)

        value = np.stack([w * x, w * y, stretch * z], axis=-1)
        diff = np.stack(
            [
                np.stack([w, zero, dw * x], axis=-1),
                np.stack([zero, w, dw * y], axis=-1),
                np.stack([zero, zero, np.full_like(z, stretch)], axis=-1),
            ],
            axis=-2,
        )
        hess = np.zeros(p.shape[:-1] + (3, 3, 3))
        hess[..., 0, 0, 2] = hess[..., 0, 2, 0] = dw
        hess[..., 0, 2, 2] = d2w * x
        hess[..., 1, 1, 2] = hess[..., 1, 2, 1] = dw
        hess[..., 1, 2, 2] = d2w * y
        return value, diff, hess

    return map_jet


def dumbbell_atlas(
    depth: float = NECK_DEPTH, sharpness: float = NECK_SHARPNESS, stretch: float = STRETCH,
) -> Atlas:
    """The dumbbell over the two-chart sphere atlas"""
    if not 0 <= depth < 1:
        raise InputError(f"Neck depth must lie in [0, 1), got {depth}")
    return composite_atlas(spherical_atlas(), dumbbell_map(depth, sharpness, stretch), "dumbbell")
