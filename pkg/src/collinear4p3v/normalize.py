"""Per-view normalization of the three-view four-point instance.

Each camera frame is rotated so the first point images at the origin and the
second point images onto the y-axis: x_j1 = y_j1 = x_j2 = 0 for every view j.
The rotations rho_j are kept so solutions can be mapped back to the original
frames afterwards.

The rotation is composed from three elementary rotations (about the camera
x-, y- and z-axes in that order of application) whose angles come from
closed-form arctangent expressions in the first two image points.  The axis
sign conventions are fixed once by the requirement that the three target
coordinates actually vanish; tests assert this post-condition on random
views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .errors import BehindCamera, DegenerateView
from .poly import Rat, rat

_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class ProblemInstance:
    """Measured data: 3 views x 4 image points plus the baseline length.

    Image points use normalized camera units (z = 1 plane).  Coordinates are
    held as exact rationals; floats passed in are converted exactly.
    """

    points: tuple  # 3 x 4 tuple of (Rat, Rat)
    baseline: Rat

    def __post_init__(self):
        pts = tuple(
            tuple((rat(x), rat(y)) for (x, y) in view) for view in self.points
        )
        if len(pts) != 3 or any(len(v) != 4 for v in pts):
            raise ValueError("instance requires exactly 3 views x 4 points")
        d = rat(self.baseline)
        if not d > 0:
            raise ValueError("baseline length must be positive")
        for view in pts:
            for x, y in view:
                if not (math.isfinite(float(x)) and math.isfinite(float(y))):
                    raise ValueError("image coordinates must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "baseline", d)

    def float_points(self) -> np.ndarray:
        return np.array(
            [[[float(x), float(y)] for (x, y) in view] for view in self.points]
        )


@dataclass(frozen=True)
class NormalizedProblem:
    """Instance after the per-view rotations, with the rotations recorded.

    points keeps exact rationals with the three zeroed coordinates exactly
    zero; rho[j] is the applied rotation for view j (float, orthonormal to
    1e-12); angles[j] = (phi, theta, psi).
    """

    points: tuple  # 3 x 4 tuple of (Rat, Rat)
    rho: tuple  # 3 rotation matrices, np.ndarray (3, 3)
    angles: tuple  # 3 triples (phi, theta, psi)
    baseline: Rat

    def float_points(self) -> np.ndarray:
        return np.array(
            [[[float(x), float(y)] for (x, y) in view] for view in self.points]
        )

    def coord(self, j: int, i: int) -> tuple[Rat, Rat]:
        """(x_ji, y_ji) with 1-based camera and point indices."""
        return self.points[j - 1][i - 1]


def normalization_angles(view: Sequence) -> tuple[float, float, float]:
    """Angles (psi, theta, phi) that normalize one view of 4 points.

    Raises DegenerateView when the phi denominator (y_j2 - y_j1 times the
    first point's depth factor) is below 1e-12 in magnitude.
    """
    (x1, y1), (x2, y2) = (
        (float(view[0][0]), float(view[0][1])),
        (float(view[1][0]), float(view[1][1])),
    )
    psi = math.atan2(y1, 1.0)
    theta = math.atan2(x1, math.sqrt(1.0 + y1 * y1))
    num = x2 * (1.0 + y1 * y1) - x1 * (1.0 + y1 * y2)
    den = (y2 - y1) * math.sqrt(1.0 + x1 * x1 + y1 * y1)
    if abs(den) < _DEGENERATE_EPS:
        raise DegenerateView(
            f"phi denominator {den:.3e} below {_DEGENERATE_EPS}"
        )
    phi = math.atan2(num, den) if den > 0 else math.atan2(-num, -den)
    return psi, theta, phi


def rotation_from_angles(psi: float, theta: float, phi: float) -> np.ndarray:
    """Compose the normalization rotation from its three angles.

    Applied to a homogeneous image point as rho @ (x, y, 1): the psi stage
    (about x) zeroes y_j1, the theta stage (about y, opposite-handed) zeroes
    x_j1, and the phi stage (about z) zeroes x_j2 while fixing the first
    point on the optical axis.
    """
    cps, sps = math.cos(psi), math.sin(psi)
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    r_psi = np.array([[1.0, 0.0, 0.0], [0.0, cps, -sps], [0.0, sps, cps]])
    r_theta = np.array([[cth, 0.0, -sth], [0.0, 1.0, 0.0], [sth, 0.0, cth]])
    r_phi = np.array([[cph, -sph, 0.0], [sph, cph, 0.0], [0.0, 0.0, 1.0]])
    return r_phi @ r_theta @ r_psi


def apply_normalization(inst: ProblemInstance) -> NormalizedProblem:
    """Rotate every view so that x_j1 = y_j1 = x_j2 = 0.

    Already-normalized views pass through exactly (identity rotation, exact
    coordinates untouched).  Raises BehindCamera if a rotated point lands
    with nonpositive third homogeneous component.
    """
    new_points = []
    rhos = []
    angles = []
    for j, view in enumerate(inst.points):
        psi, theta, phi = normalization_angles(view)
        angles.append((phi, theta, psi))
        if psi == 0.0 and theta == 0.0 and phi == 0.0:
            rhos.append(np.eye(3))
            new_points.append(tuple(view))
            continue
        rho = rotation_from_angles(psi, theta, phi)
        rhos.append(rho)
        rotated = []
        for i, (x, y) in enumerate(view):
            h = rho @ np.array([float(x), float(y), 1.0])
            if h[2] <= 0.0:
                raise BehindCamera(
                    f"point {i + 1} behind camera {j + 1} after normalization"
                )
            rotated.append((rat(h[0] / h[2]), rat(h[1] / h[2])))
        # the three structurally-zero coordinates carry only rounding dust
        rotated[0] = (mpq(0), mpq(0))
        rotated[1] = (mpq(0), rotated[1][1])
        new_points.append(tuple(rotated))
    return NormalizedProblem(
        points=tuple(new_points),
        rho=tuple(rhos),
        angles=tuple(angles),
        baseline=inst.baseline,
    )
