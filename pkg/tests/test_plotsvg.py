import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from skypix import plotsvg
from skypix.errors import DomainError


def test_color_ramp_shape_and_endpoints():
    ramp = plotsvg.color_ramp(256)
    assert ramp.shape == (256, 3)
    assert tuple(ramp[0]) == (0, 0, 255)
    assert tuple(ramp[-1]) == (100, 0, 0)
    assert ramp.min() >= 0 and ramp.max() <= 255


def test_mollweide_known_points():
    # center of the projection
    x, y = plotsvg.mollweide_xy(np.array([math.pi / 2]), np.array([0.0]))
    assert_allclose([x[0], y[0]], [0.0, 0.0], atol=1e-12)
    # poles map to (0, +-sqrt(2))
    x, y = plotsvg.mollweide_xy(np.array([0.0]), np.array([0.0]))
    assert_allclose(y[0], math.sqrt(2), atol=1e-9)
    x, y = plotsvg.mollweide_xy(np.array([math.pi]), np.array([0.0]))
    assert_allclose(y[0], -math.sqrt(2), atol=1e-9)


def test_mollweide_is_equal_area():
    # Jacobian check by Monte Carlo: uniform sphere points fill the ellipse
    # uniformly, so quadrant counts agree
    rng = np.random.default_rng(3)
    z = rng.uniform(-1, 1, 40000)
    phi = rng.uniform(0, 2 * math.pi, 40000)
    x, y = plotsvg.mollweide_xy(np.arccos(z), phi)
    left = x < 0
    top = y > 0
    for quadrant in (left & top, left & ~top, ~left & top, ~left & ~top):
        assert abs(quadrant.mean() - 0.25) < 0.01


def test_line_chart_structure():
    x = np.linspace(0, 1, 20)
    svg = plotsvg.line_chart([(x, np.sin(x), "line"),
                              (x, np.cos(x), "dashed")],
                             xlabel="x", ylabel="y", title="demo")
    assert svg.startswith("<?xml")
    assert svg.count("<polyline") == 2
    assert "stroke-dasharray" in svg
    assert "demo" in svg and svg.rstrip().endswith("</svg>")


def test_line_chart_skips_nan():
    x = np.array([0.0, 0.5, 1.0])
    y = np.array([1.0, np.nan, 3.0])
    svg = plotsvg.line_chart([(x, y, "points")])
    assert svg.count("<circle") == 2


def test_bar_chart_structure():
    svg = plotsvg.bar_chart(np.array([0.5, 1.5, 2.5]),
                            np.array([1.0, -0.5, 2.0]))
    assert svg.count("<rect") >= 4   # background + frame + 3 bars


def test_sky_chart_colors_points():
    theta = np.array([0.3, 1.2, 2.8])
    phi = np.array([0.1, 3.0, 5.5])
    svg = plotsvg.sky_chart(theta, phi, values=np.array([-1.0, 0.0, 1.0]))
    assert svg.count("<circle") == 3
    assert "#0000ff" in svg     # coldest point takes the first ramp stop
    assert "<ellipse" in svg


def test_empty_chart_rejected():
    with pytest.raises(DomainError):
        plotsvg.line_chart([(np.array([]), np.array([]), "line")])
