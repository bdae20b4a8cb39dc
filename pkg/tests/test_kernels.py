"""Kernel backend equivalence and semantics.

The compiled and numpy backends must produce bit-identical positions:
they execute the same floating-point operations in the same order.
"""

import numpy as np
import pytest

from qtlab import _kernels
from qtlab._kernels import (
    STATUS_ALIVE,
    STATUS_LEFT_DOMAIN,
    STATUS_MASKED,
    advance_bundle_native,
    advance_bundle_numpy,
    interp_cubic,
)

needs_native = pytest.mark.skipif(advance_bundle_native is None,
                                  reason="compiled kernel not built")


def _random_problem(rng, n=128, npaths=64):
    x_min, dx = -10.0, 20.0 / n
    xs = x_min + dx * np.arange(n)
    v0 = np.sin(2 * np.pi * xs / 20.0) + 0.3 * rng.normal(size=n)
    v1 = v0 + 0.1 * rng.normal(size=n)
    valid = np.ones(n, dtype=np.uint8)
    # knock out a masked island
    lo = rng.integers(10, n - 20)
    valid[lo:lo + 5] = 0
    v0[valid == 0] = 0.0
    v1[valid == 0] = 0.0
    pos = rng.uniform(-8.0, 8.0, size=npaths)
    return pos, v0, v1, valid, x_min, dx, n


@needs_native
def test_backends_bitwise_identical():
    rng = np.random.default_rng(42)
    for trial in range(10):
        pos, v0, v1, valid, x_min, dx, n = _random_problem(rng)
        xa = pos.copy()
        sa = np.zeros(pos.size, dtype=np.int8)
        xb = pos.copy()
        sb = np.zeros(pos.size, dtype=np.int8)
        for interval in range(5):
            advance_bundle_native(xa, sa, v0, v1, valid, x_min, dx, n, 0.05, 4)
            advance_bundle_numpy(xb, sb, v0, v1, valid, x_min, dx, n, 0.05, 4)
        assert np.array_equal(xa, xb)
        assert np.array_equal(sa, sb)


def test_selected_backend_exposed():
    assert _kernels.get_backend() in ("native", "numpy")
    assert _kernels.advance_bundle is not None


@pytest.mark.parametrize("backend", ["native", "numpy"])
def test_constant_velocity_advection(backend):
    fn = advance_bundle_native if backend == "native" else advance_bundle_numpy
    if fn is None:
        pytest.skip("backend not built")
    n = 64
    x_min, dx = 0.0, 1.0 / 64
    v = np.full(n, 0.5)
    valid = np.ones(n, dtype=np.uint8)
    x = np.array([0.25, 0.5])
    status = np.zeros(2, dtype=np.int8)
    fn(x, status, v, v, valid, x_min, dx, n, 0.2, 8)
    assert np.allclose(x, [0.35, 0.6], atol=1e-12)
    assert np.all(status == STATUS_ALIVE)


@pytest.mark.parametrize("backend", ["native", "numpy"])
def test_masked_region_truncates(backend):
    fn = advance_bundle_native if backend == "native" else advance_bundle_numpy
    if fn is None:
        pytest.skip("backend not built")
    n = 64
    x_min, dx = 0.0, 1.0 / 64
    v = np.full(n, 1.0)
    valid = np.ones(n, dtype=np.uint8)
    valid[40:] = 0
    v[40:] = 0.0
    x = np.array([0.55])
    status = np.zeros(1, dtype=np.int8)
    fn(x, status, v, v, valid, x_min, dx, n, 0.5, 16)
    assert status[0] == STATUS_MASKED
    assert x[0] < 40 * dx  # frozen before the masked island


@pytest.mark.parametrize("backend", ["native", "numpy"])
def test_leaving_domain_flagged(backend):
    fn = advance_bundle_native if backend == "native" else advance_bundle_numpy
    if fn is None:
        pytest.skip("backend not built")
    n = 64
    x_min, dx = 0.0, 1.0 / 64
    v = np.full(n, 2.0)
    valid = np.ones(n, dtype=np.uint8)
    x = np.array([0.9])
    status = np.zeros(1, dtype=np.int8)
    fn(x, status, v, v, valid, x_min, dx, n, 0.5, 16)
    assert status[0] == STATUS_LEFT_DOMAIN


def test_interp_cubic_reproduces_cubics():
    # Catmull-Rom is exact on quadratics; check against a smooth field
    n = 256
    x_min, dx = -1.0, 2.0 / n
    xs = x_min + dx * np.arange(n)
    field = 1.0 + xs + xs**2
    valid = np.ones(n, dtype=np.uint8)
    pts = np.linspace(-0.8, 0.8, 37)
    vals, ok = interp_cubic(pts, field, valid, x_min, dx)
    assert np.all(ok)
    assert np.max(np.abs(vals - (1.0 + pts + pts**2))) < 1e-12
