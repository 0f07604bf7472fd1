"""Homography fitting and birds-eye-view projection."""

from __future__ import annotations

import json

import numpy as np
import pytest

from oracles import oracle_homography
from roadgraph.bev import (
    BevCalibration,
    apply_homography,
    fit_homography,
    load_calibration,
    project_detection,
    save_calibration,
)
from roadgraph.datasets import Detection
from roadgraph.errors import DegenerateCalibration, NotFound, OutOfCalibratedRegion

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]

# A camera-like trapezoid: near edge at the image bottom, far edge higher up.
TRAPEZOID = [(140.0, 300.0), (500.0, 300.0), (640.0, 100.0), (0.0, 100.0)]


def trapezoid_calibration(width=24.0, length=60.0, anchor=320.0) -> BevCalibration:
    return BevCalibration.fit(TRAPEZOID, (width, length), anchor)


class TestFitHomography:
    def test_identity(self):
        h = fit_homography(UNIT_SQUARE, UNIT_SQUARE)
        assert np.allclose(h, np.eye(3), atol=1e-12)

    def test_pure_scale(self):
        doubled = [(2 * u, 2 * v) for u, v in UNIT_SQUARE]
        h = fit_homography(UNIT_SQUARE, doubled)
        assert np.allclose(h, np.diag([2.0, 2.0, 1.0]), atol=1e-12)

    def test_matches_svd_oracle_on_trapezoid(self):
        image = [(0.0, 100.0), (640.0, 100.0), (500.0, 300.0), (140.0, 300.0)]
        ground = [(0.0, 60.0), (24.0, 60.0), (24.0, 0.0), (0.0, 0.0)]
        h = fit_homography(image, ground)
        reference = oracle_homography(image, ground)
        assert np.allclose(h, reference, rtol=1e-9, atol=1e-9)
        for (u, v), (x, y) in zip(image, ground):
            gx, gy = apply_homography(h, (u, v))
            assert abs(gx - x) < 1e-9
            assert abs(gy - y) < 1e-9

    def test_collinear_points_rejected(self):
        collinear = [(0, 0), (1, 1), (2, 2), (0, 5)]
        with pytest.raises(DegenerateCalibration):
            fit_homography(collinear, UNIT_SQUARE)

    def test_random_quads_against_oracle(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 50:
            image = rng.uniform(0, 640, size=(4, 2))
            ground = [(0.0, 60.0), (24.0, 60.0), (24.0, 0.0), (0.0, 0.0)]
            try:
                h = fit_homography(image, ground)
            except DegenerateCalibration:
                continue
            for (u, v), (x, y) in zip(image, ground):
                gx, gy = apply_homography(h, (u, v))
                assert abs(gx - x) < 1e-6
                assert abs(gy - y) < 1e-6
            checked += 1


class TestProjectDetection:
    def test_near_left_corner_maps_to_corner_minus_anchor(self):
        cal = trapezoid_calibration()
        u, v = TRAPEZOID[0]
        det = Detection(class_label="car", bbox=(u - 5, v - 10, u + 5, v))
        point = project_detection(det, cal)
        assert point.y == pytest.approx(0.0, abs=1e-9)
        assert point.x == pytest.approx(0.0 - cal.ego_ground_x(), abs=1e-9)

    def test_identity_homography_re_expression(self):
        # With H = identity the re-expression is a pure affine shift:
        # bottom-center (14, 7) with anchor column 10 lands at (4, L - 7).
        length = 30.0
        cal = BevCalibration.fit(
            [(0, length), (20, length), (20, 0), (0, 0)],
            (20.0, length), ego_anchor_px=10.0)
        assert np.allclose(cal.h, np.eye(3), atol=1e-9)
        det = Detection(class_label="car", bbox=(13.0, 5.0, 15.0, 7.0))
        point = project_detection(det, cal)
        assert point.x == pytest.approx(4.0, abs=1e-9)
        assert point.y == pytest.approx(length - 7.0, abs=1e-9)

    def test_outside_region_raises_unless_forced(self):
        cal = trapezoid_calibration()
        det = Detection(class_label="car", bbox=(900.0, 900.0, 950.0, 980.0))
        with pytest.raises(OutOfCalibratedRegion):
            project_detection(det, cal)
        forced = project_detection(det, cal, force=True)
        assert np.isfinite(forced.x) and np.isfinite(forced.y)

    def test_roundtrip_pixel_error(self):
        cal = trapezoid_calibration()
        h_inv = np.linalg.inv(cal.h)
        rng = np.random.default_rng(3)
        # Interior samples via convex combinations of the quad corners.
        quad = np.asarray(TRAPEZOID)
        for _ in range(100):
            w = rng.dirichlet(np.ones(4))
            u, v = w @ quad
            gx, gy = apply_homography(cal.h, (u, v))
            ru, rv = apply_homography(h_inv, (gx, gy))
            assert abs(ru - u) < 1e-6
            assert abs(rv - v) < 1e-6

    def test_monotonic_along_pixel_column(self):
        cal = trapezoid_calibration()
        column = 320.0
        lower = cal.project_pixel((column, 290.0))   # lower in image = closer
        higher = cal.project_pixel((column, 150.0))
        assert lower.y < higher.y

    def test_width_scaling_scales_lateral(self):
        base = trapezoid_calibration(width=24.0)
        wide = trapezoid_calibration(width=48.0)
        for pixel in [(320.0, 200.0), (250.0, 250.0), (400.0, 150.0)]:
            a = base.project_pixel(pixel)
            b = wide.project_pixel(pixel)
            assert b.x == pytest.approx(2.0 * a.x, rel=1e-9, abs=1e-9)
            assert b.y == pytest.approx(a.y, rel=1e-9, abs=1e-9)


class TestCalibrationFile:
    def test_load_save_roundtrip(self, tmp_path):
        cal = trapezoid_calibration()
        path = tmp_path / "calibration.json"
        save_calibration(cal, path)
        loaded = load_calibration(path)
        assert np.allclose(loaded.h, cal.h)
        assert loaded.ego_anchor_px == cal.ego_anchor_px

    def test_missing_file(self, tmp_path):
        with pytest.raises(NotFound):
            load_calibration(tmp_path / "absent.json")

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "calibration.json"
        path.write_text(json.dumps({"image_points": [[0, 0]]}))
        with pytest.raises(DegenerateCalibration):
            load_calibration(path)
