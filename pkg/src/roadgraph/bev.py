"""Inverse-perspective (birds-eye-view) projection from a 4-point calibration.

The user marks the road region as a quadrilateral in image space
(order: near-left, near-right, far-right, far-left) and states its real
size in feet.  A homography maps the image quad onto a ``width x length``
rectangle whose far edge is row 0, so longitudinal distance ahead of the
near edge is ``length - row``.  The ego vehicle sits on the near edge at
a configurable pixel column; projected points are re-expressed relative
to it, putting the ego at (0, 0) with +x rightward and +y forward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import Detection
from .errors import DegenerateCalibration, NotFound, OutOfCalibratedRegion

Pixel = tuple[float, float]


@dataclass(frozen=True)
class GroundPoint:
    """Metric ego-frame ground position: x lateral (+right), y forward, feet."""

    x: float
    y: float


def fit_homography(image_points, ground_points) -> np.ndarray:
    """Solve the 4-correspondence direct linear system; h33 is fixed to 1.

    Each pair (u, v) -> (x, y) contributes two rows of the 8x8 system; a
    singular system (collinear image points) raises DegenerateCalibration.
    """
    src = np.asarray(image_points, dtype=np.float64)
    dst = np.asarray(ground_points, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise DegenerateCalibration(
            f"need 4 point pairs, got {src.shape} -> {dst.shape}")
    extent = max(src.max() - src.min(), 1.0)
    for i in range(4):
        rest = [j for j in range(4) if j != i]
        d1 = src[rest[1]] - src[rest[0]]
        d2 = src[rest[2]] - src[rest[0]]
        if abs(d1[0] * d2[1] - d1[1] * d2[0]) <= 1e-9 * extent * extent:
            raise DegenerateCalibration(
                f"image points {rest} are collinear; cannot fit a homography")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((u, v), (x, y)) in enumerate(zip(src, dst)):
        a[2 * i] = [u, v, 1, 0, 0, 0, -x * u, -x * v]
        a[2 * i + 1] = [0, 0, 0, u, v, 1, -y * u, -y * v]
        b[2 * i] = x
        b[2 * i + 1] = y
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateCalibration(f"calibration points are degenerate: {exc}") from exc
    if not np.all(np.isfinite(h)):
        raise DegenerateCalibration("calibration produced a non-finite homography")
    return np.append(h, 1.0).reshape(3, 3)


def apply_homography(h: np.ndarray, point: Pixel) -> tuple[float, float]:
    u, v = point
    x, y, w = h @ np.array([u, v, 1.0])
    return float(x / w), float(y / w)


def _point_in_convex_quad(point: Pixel, quad: np.ndarray) -> bool:
    """True when point lies inside (or on) the quad traced by its vertices."""
    px, py = point
    sign = 0.0
    for i in range(4):
        ax, ay = quad[i]
        bx, by = quad[(i + 1) % 4]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if cross != 0.0:
            if sign == 0.0:
                sign = cross
            elif sign * cross < 0.0:
                return False
    return True


@dataclass(frozen=True)
class BevCalibration:
    """A fitted road-region homography plus the ego anchor column."""

    image_points: tuple[Pixel, Pixel, Pixel, Pixel]
    ground_rect: tuple[float, float]  # (width ft, length ft)
    ego_anchor_px: float
    h: np.ndarray

    @classmethod
    def fit(cls, image_points, ground_rect, ego_anchor_px: float) -> "BevCalibration":
        width, length = float(ground_rect[0]), float(ground_rect[1])
        # Rect corners in the homography's target frame: far edge is row 0.
        corners = [(0.0, length), (width, length), (width, 0.0), (0.0, 0.0)]
        h = fit_homography(image_points, corners)
        pts = tuple((float(u), float(v)) for u, v in image_points)
        return cls(image_points=pts, ground_rect=(width, length),
                   ego_anchor_px=float(ego_anchor_px), h=h)

    def ego_ground_x(self) -> float:
        """Lateral rect coordinate of the ego anchor on the near edge."""
        (u0, v0), (u1, v1) = self.image_points[0], self.image_points[1]
        t = 0.5 if u1 == u0 else (self.ego_anchor_px - u0) / (u1 - u0)
        anchor = (self.ego_anchor_px, v0 + t * (v1 - v0))
        gx, _ = apply_homography(self.h, anchor)
        return gx

    def project_pixel(self, point: Pixel, force: bool = False) -> GroundPoint:
        """Map an image pixel to ego-frame ground feet.

        Outside the calibrated quad this raises OutOfCalibratedRegion
        unless ``force`` is set, in which case the homography is simply
        extrapolated.
        """
        quad = np.asarray(self.image_points)
        if not force and not _point_in_convex_quad(point, quad):
            raise OutOfCalibratedRegion(
                f"pixel {point} lies outside the calibrated road region")
        gx, gy = apply_homography(self.h, point)
        return GroundPoint(x=gx - self.ego_ground_x(), y=self.ground_rect[1] - gy)


def project_detection(det: Detection, cal: BevCalibration, force: bool = False) -> GroundPoint:
    """Ground position of a detection via its bbox bottom-center pixel."""
    x0, _, x1, y1 = det.bbox
    return cal.project_pixel(((x0 + x1) / 2.0, y1), force=force)


def load_calibration(path: str | Path) -> BevCalibration:
    """Read calibration.json and fit the homography."""
    p = Path(path)
    if not p.exists():
        raise NotFound(f"calibration file not found: {p}")
    entry = json.loads(p.read_text(encoding="utf-8"))
    try:
        return BevCalibration.fit(
            image_points=[tuple(pt) for pt in entry["image_points"]],
            ground_rect=tuple(entry["ground_rect"]),
            ego_anchor_px=float(entry["ego_anchor_px"]),
        )
    except KeyError as exc:
        raise DegenerateCalibration(f"calibration file missing key {exc}") from exc


def save_calibration(cal: BevCalibration, path: str | Path) -> None:
    entry = {
        "image_points": [list(pt) for pt in cal.image_points],
        "ground_rect": list(cal.ground_rect),
        "ego_anchor_px": cal.ego_anchor_px,
    }
    Path(path).write_text(json.dumps(entry, indent=1, sort_keys=True), encoding="utf-8")
