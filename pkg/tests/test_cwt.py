import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samwave import cwt, wavelets
from samwave.cwt import ORIENTATIONS, SUPPORTED, complex_hf_combine, dtcwt2_level1, dtcwt_filters
from samwave.wavelets import ConfigurationError, ShapeError


@pytest.mark.parametrize("name", SUPPORTED)
def test_filter_invariants(name):
    f = dtcwt_filters(name)
    assert abs(np.linalg.norm(f.tree_a_lo) - np.linalg.norm(f.tree_b_lo)) <= 1e-10
    assert abs(f.tree_a_hi.sum()) <= 1e-10 and abs(f.tree_b_hi.sum()) <= 1e-10


def test_filter_lengths():
    a = dtcwt_filters("sy-a")
    assert len(a.tree_a_lo) == 5 and len(a.synth_lo) == 7
    b = dtcwt_filters("sy-b")
    assert len(b.tree_a_lo) == 13 and len(b.synth_lo) == 19


def test_unknown_filter_set():
    with pytest.raises(ConfigurationError):
        dtcwt_filters("qshift-only")


def test_odd_input():
    with pytest.raises(ShapeError):
        dtcwt2_level1(np.zeros((5, 6)), "sy-a")


@pytest.mark.parametrize("name", SUPPORTED)
def test_constant_image(name):
    sub = dtcwt2_level1(np.full((16, 12, 3), 0.3), name)
    assert sub.oriented.shape == (6, 8, 6, 3)
    assert np.max(np.abs(sub.oriented)) <= 1e-10
    assert np.max(np.abs(complex_hf_combine(sub).numpy())) <= 1e-10


def test_diagonal_grating_lands_in_45_pair():
    n = 48
    yy, xx = np.mgrid[0:n, 0:n]
    for sign in (1, -1):
        g = np.cos(2 * np.pi * (xx + sign * yy) * 3 / 8)
        e = np.sum(np.abs(dtcwt2_level1(g, "sy-a").oriented) ** 2, axis=(1, 2))
        pair = e[ORIENTATIONS.index(45)] + e[ORIENTATIONS.index(-45)]
        assert pair / e.sum() >= 0.6


def test_combine_equals_six_term_sum():
    sub = dtcwt2_level1(np.random.default_rng(0).random((8, 8, 2)), "sy-b")
    z = sub.oriented
    manual = z[0] + z[1] + z[2] + z[3] + z[4] + z[5]
    out = complex_hf_combine(sub)
    assert np.array_equal(out.numpy(), manual)
    assert out.shape == (4, 4, 2)


def test_subband_accessor_uses_orientation_order():
    sub = dtcwt2_level1(np.random.default_rng(1).random((8, 8)), "sy-a")
    for k, angle in enumerate(ORIENTATIONS):
        assert np.array_equal(sub.subband(angle).numpy(), sub.oriented[k])


@pytest.mark.parametrize("name", SUPPORTED)
def test_frame_energy(name):
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = rng.random((32, 32))
        sub = dtcwt2_level1(x, name)
        ratio = (sub.lowpass_energy() + sub.oriented_energy()) / np.sum(x ** 2)
        assert abs(ratio - 1) <= 5e-2


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 16), st.sampled_from(SUPPORTED))
def test_linearity(a, b, seed, name):
    rng = np.random.default_rng(seed)
    x, y = rng.random((8, 8, 2)), rng.random((8, 8, 2))
    lhs = dtcwt2_level1(a * x + b * y, name).oriented
    rhs = a * dtcwt2_level1(x, name).oriented + b * dtcwt2_level1(y, name).oriented
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@pytest.mark.parametrize("name", SUPPORTED)
def test_mirror_symmetric_pattern_pairs_orientations(name):
    # for a left-right symmetric image, z(+t) = j * conj(mirror(z(-t)))
    n = 32
    yy, xx = np.mgrid[0:n, 0:n]
    xs = np.minimum(xx, n - 1 - xx)
    g = np.cos(2 * np.pi * xs / 5.0) * np.cos(2 * np.pi * yy / 7.0) + np.cos(2 * np.pi * (xs + yy) / 3.0)
    assert np.array_equal(g, g[:, ::-1])
    z = dtcwt2_level1(g, name).oriented
    for k, angle in enumerate(ORIENTATIONS):
        partner = z[ORIENTATIONS.index(-angle)][:, ::-1]
        assert np.max(np.abs(z[k] - 1j * np.conj(partner))) <= 1e-8


def _relative_change(e0, e1):
    return abs(e1 - e0) / e0


def test_near_shift_invariance_beats_haar():
    ratios = []
    for seed in range(20):
        x = np.random.default_rng(seed).random((32, 32))
        xs = np.roll(x, 1, axis=1)
        c = _relative_change(dtcwt2_level1(x, "sy-a").oriented_energy(),
                             dtcwt2_level1(xs, "sy-a").oriented_energy())

        def haar_detail(img):
            s = wavelets.dwt2(img, "haar")
            return float(np.sum(s.lh ** 2) + np.sum(s.hl ** 2) + np.sum(s.hh ** 2))

        r = _relative_change(haar_detail(x), haar_detail(xs))
        ratios.append((c, r))
    c_med = np.median([c for c, _ in ratios])
    r_med = np.median([r for _, r in ratios])
    assert c_med * 4 <= r_med
