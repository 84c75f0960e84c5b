import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatlab import _kernels, qc
from flatlab.numberfield import QuadExt


def svd_ratio(m) -> float:
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    return float(s[0] / s[1])


@pytest.mark.parametrize(
    "m, k",
    [
        (((4, 0), (0, QuadExt(1) / 4)), 16.0),
        (((2, 0), (0, 1)), 2.0),
        (((1, 0), (0, 1)), 1.0),
    ],
)
def test_linear_dilatation_exact_entries(m, k):
    assert qc.linear_dilatation(m) == pytest.approx(k, rel=1e-15)


def test_rotation_is_conformal():
    c, s = math.cos(0.7), math.sin(0.7)
    assert qc.linear_dilatation(((c, -s), (s, c))) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=4, max_size=4))
def test_linear_dilatation_matches_svd(entries):
    a, b, c, d = entries
    if abs(a * d - b * c) < 1e-3:
        return
    assert qc.linear_dilatation(((a, b), (c, d))) == pytest.approx(svd_ratio([[a, b], [c, d]]), rel=1e-9)


def test_singular_rejected():
    with pytest.raises(ValueError):
        qc.linear_dilatation(((1, 2), (2, 4)))


def test_identity_triangle():
    rep = qc.triangle_affine(qc.EQUILATERAL, qc.EQUILATERAL)
    assert rep.dilatation == pytest.approx(1.0, abs=1e-12)


def test_thirty_sixty_ninety():
    tri = np.array([[0.0, 0.0], [math.sqrt(3.0), 0.0], [0.0, 1.0]])
    rep = qc.triangle_affine(qc.EQUILATERAL, tri)
    assert rep.dilatation == pytest.approx(svd_ratio(rep.matrix), abs=1e-12)
    assert rep.within_bound


def test_orientation_reversal_rejected():
    with pytest.raises(ValueError):
        qc.triangle_affine(qc.EQUILATERAL, qc.EQUILATERAL[::-1])


def test_bound_constant_equilateral():
    assert qc.triangle_bound_constant() == pytest.approx(8 * math.sqrt(3), rel=1e-12)


def test_thinning_triangles_stay_bounded():
    ratios = []
    for eps in [0.5, 0.1, 0.01, 0.001]:
        tri = np.array([[0.0, 0.0], [eps, 0.0], [eps / 2, 1.0]])
        rep = qc.triangle_affine(qc.EQUILATERAL, tri)
        assert rep.within_bound
        ratios.append(rep.ratio)
    assert max(ratios) <= qc.triangle_bound_constant()


def test_hyperbolic_distance():
    assert qc.hyperbolic_distance_uhp((0, 1), (0, math.e)) == pytest.approx(1.0)
    assert qc.hyperbolic_distance_uhp(1j, 1j) == 0.0
    assert qc.hyperbolic_distance_uhp((0, 1), (1, 1)) == pytest.approx(math.acosh(1.5))
    with pytest.raises(ValueError):
        qc.hyperbolic_distance_uhp((0, 0), (0, 1))


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(0.1, 10), st.floats(-5, 5), st.floats(0.1, 10))
def test_hyperbolic_distance_log_form(x1, y1, x2, y2):
    # d = 2 artanh(|z1 - z2| / |z1 - conj z2|)
    z1, z2 = complex(x1, y1), complex(x2, y2)
    ref = 2 * math.atanh(abs(z1 - z2) / abs(z1 - z2.conjugate()))
    assert qc.hyperbolic_distance_uhp(z1, z2) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_close_map_identity():
    rep = qc.close_map_dilatation(10, 10, 0, 0)
    assert rep.max_dilatation == pytest.approx(1.0, abs=1e-12)
    assert rep.d0 == 0.0


def test_close_map_pure_stretch():
    rep = qc.close_map_dilatation(100, 400, 0, 0)
    assert rep.d0 == pytest.approx(math.log(2), rel=1e-12)
    assert rep.max_dilatation == pytest.approx(qc.linear_dilatation(((1, 0), (0, 4))), abs=1e-9)


def sine_map(eps):
    return (
        lambda x: x + eps / (2 * np.pi) * np.sin(2 * np.pi * x),
        lambda x: 1 + eps * np.cos(2 * np.pi * x),
    )


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
@pytest.mark.parametrize("r1", [10, 100])
def test_close_map_within_frozen_constant(eps, r1):
    f, fp = sine_map(eps)
    rep = qc.close_map_dilatation(r1, 1.3 * r1, 1, 0.25, f, fp)
    assert rep.passes(eps)


def test_grid_refinement_stable():
    f, fp = sine_map(0.1)
    coarse = qc.close_map_dilatation(20, 30, 1, 0.0, f, fp, grid=(256, 64))
    fine = qc.close_map_dilatation(20, 30, 1, 0.0, f, fp, grid=(512, 128))
    assert abs(fine.max_dilatation - coarse.max_dilatation) < 1e-6


def test_derivative_fallback_matches_explicit():
    f, fp = sine_map(0.2)
    a = qc.close_map_dilatation(10, 13, 1, 0.5, f, fp)
    b = qc.close_map_dilatation(10, 13, 1, 0.5, f)
    assert a.max_dilatation == pytest.approx(b.max_dilatation, rel=1e-8)


SCRIPT = """
import json, numpy as np
from flatlab import qc, _kernels
rng = np.random.default_rng(7)
ks, eps, rad, bound = qc.triangle_sweep(200, rng)
f = lambda x: x + 0.1 / (2 * np.pi) * np.sin(2 * np.pi * x)
rep = qc.close_map_dilatation(10, 13, 1, 0.25, f)
print(json.dumps({"numba": _kernels.USING_NUMBA, "ks": ks.tolist(), "sup": rep.max_dilatation}))
"""


def run_kernels(no_numba: bool) -> dict:
    env = dict(os.environ)
    env.pop("FLATLAB_NO_NUMBA", None)
    if no_numba:
        env["FLATLAB_NO_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_numpy_fallback_agrees_with_numba():
    plain = run_kernels(True)
    assert plain["numba"] is False
    fast = run_kernels(False)
    if not fast["numba"]:
        pytest.skip("numba not importable here")
    assert np.allclose(plain["ks"], fast["ks"], rtol=1e-12, atol=0)
    assert plain["sup"] == pytest.approx(fast["sup"], rel=1e-12)


def test_kernel_flag_is_boolean():
    assert isinstance(_kernels.USING_NUMBA, bool)
