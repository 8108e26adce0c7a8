"""Shared fixtures and builders for the test suite."""

import math

import numpy as np
import pytest

from kpcurve.annotation import BoundingBox, FrameDetection, KeypointSet


def hinge_polyline(bend_deg: float, vertex: int = 2) -> np.ndarray:
    """A 5-point polyline straight along +x with one bend at an interior point.

    Unit-length segments; the direction turns by ``bend_deg`` at the
    given vertex and continues straight, so every angle except the one
    at the vertex (and the deviation) is zero.
    """
    turn = math.radians(bend_deg)
    direction = np.array([1.0, 0.0])
    bent = np.array([math.cos(turn), math.sin(turn)])
    pts = np.zeros((5, 2))
    for i in range(1, 5):
        step = direction if i <= vertex else bent
        pts[i] = pts[i - 1] + step
    return pts


def normalize_unit(points: np.ndarray, decimals: int | None = None) -> np.ndarray:
    """Fit points into the unit square with a 10% margin, optionally rounding."""
    pts = np.asarray(points, dtype=np.float64)
    mins = pts.min(axis=0)
    extent = (pts.max(axis=0) - mins).max()
    fitted = (pts - mins) / extent * 0.8 + 0.1
    return np.round(fitted, decimals) if decimals is not None else fitted


def detection_from_middle(middle: np.ndarray, offset: float = 0.02) -> FrameDetection:
    """Wrap a (5, 2) middle line into a full 15-point detection.

    Lateral rows are the middle line shifted by a small y offset, which
    never affects middle-line angle computations.
    """
    mid = np.asarray(middle, dtype=np.float64)
    rows = [mid + np.array([0.0, -offset]), mid, mid + np.array([0.0, offset])]
    pts = np.concatenate(rows)
    pts = np.clip(pts, 0.0, 1.0)
    xs, ys = pts[:, 0], pts[:, 1]
    bbox = BoundingBox(
        cx=float((xs.min() + xs.max()) / 2),
        cy=float((ys.min() + ys.max()) / 2),
        w=float(max(xs.max() - xs.min(), 1e-3)),
        h=float(max(ys.max() - ys.min(), 1e-3)),
    )
    return FrameDetection(
        class_id=0, bbox=bbox, keypoints=KeypointSet.from_points(pts)
    )


def detection_with_angle(bend_deg: float, vertex: int = 2) -> FrameDetection:
    """A detection whose middle line measures exactly-ish bend_deg."""
    return detection_from_middle(normalize_unit(hinge_polyline(bend_deg, vertex)))


CVAT_DOCUMENT = """<?xml version="1.0" encoding="utf-8"?>
<annotations>
  <version>1.1</version>
  <meta>
    <task><name>demo</name><size>2</size></task>
  </meta>
  <image id="0" name="case_a_0001.png" width="1280" height="720">
    <box label="shaft" xtl="100.5" ytl="50.25" xbr="900.75" ybr="600.5" occluded="0"/>
    <points label="grid" points="120,80;300,90;500,100;700,110;880,120;130,300;310,310;510,320;710,330;890,340;140,520;320,530;520,540;720,550;895,560"/>
  </image>
  <image id="1" name="case_b_0001.png" width="640" height="480">
    <box label="shaft" xtl="0" ytl="0" xbr="640" ybr="480"/>
    <points label="grid" points="10,20;110,30;210,40;310,50;410,60;15,200;115,210;215,220;315,230;415,240;20,380;120,390;220,400;320,410;420,420"/>
  </image>
</annotations>
"""


@pytest.fixture
def cvat_document() -> str:
    return CVAT_DOCUMENT
