import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from samwave import wavelets
from samwave.freqfeat import (
    COMPLEX_WAVELETS, REAL_WAVELETS, WAVELET_NAMES, FreqMaskConfig, fourier_filter, hfreq, lfreq,
    resize_bilinear_2x, resolve_wavelet, whf_extract,
)
from samwave.wavelets import ConfigurationError


def _image(seed, shape=(16, 16, 3)):
    return np.random.default_rng(seed).random(shape)


# resize ---------------------------------------------------------------------


def test_resize_constant():
    out = resize_bilinear_2x(np.full((3, 5, 2), 0.25))
    assert out.shape == (6, 10, 2) and np.all(out == 0.25)


def test_resize_single_pixel():
    assert resize_bilinear_2x(np.array([[0.7]])).tolist() == [[0.7, 0.7], [0.7, 0.7]]


def test_resize_keeps_ramp_linear():
    ramp = np.tile(np.arange(8.0), (4, 1))
    out = resize_bilinear_2x(ramp)
    interior = out[:, 1:-1]
    # half-pixel centres: output column j samples input coordinate (j + 0.5) / 2 - 0.5
    expected = (np.arange(1, 15) + 0.5) / 2 - 0.5
    assert np.max(np.abs(interior - expected)) <= 1e-10


# whf ------------------------------------------------------------------------


@pytest.mark.parametrize("name", WAVELET_NAMES)
def test_whf_constant_is_zero_and_same_size(name):
    m = whf_extract(np.full((12, 10, 3), 0.6), name)
    assert m.values.shape == (12, 10, 3)
    assert np.max(np.abs(m.values)) <= 1e-10
    assert m.is_complex == (name in COMPLEX_WAVELETS)


@pytest.mark.parametrize("name", REAL_WAVELETS)
def test_whf_is_sum_of_detail_subbands(name):
    x = _image(0)
    sub = wavelets.dwt2(resize_bilinear_2x(x), name)
    assert np.array_equal(whf_extract(x, name).values, sub.lh + sub.hl + sub.hh)


@pytest.mark.parametrize("name", COMPLEX_WAVELETS)
def test_complex_whf_has_imaginary_energy(name):
    m = whf_extract(_image(1), name)
    assert m.values.dtype.kind == "c"
    assert np.sum(m.values.imag ** 2) > 1e-3
    assert np.array_equal(m.real_part(), m.values.real)
    t = m.as_tensor()
    assert np.array_equal(t.re.data, m.values.real) and np.array_equal(t.im.data, m.values.imag)


def test_band_selection():
    x = _image(2)
    sub = wavelets.dwt2(resize_bilinear_2x(x), "coif2")
    assert np.array_equal(whf_extract(x, "coif2", ("ll",)).values, np.zeros_like(sub.ll) + sub.ll)
    with pytest.raises(ConfigurationError):
        whf_extract(x, "coif2", ("xx",))


def test_unknown_wavelet():
    with pytest.raises(ConfigurationError):
        whf_extract(_image(3), "mexican-hat")


def test_resolve_aliases():
    assert resolve_wavelet("Symmetric-A") == ("sy-a", True)
    assert resolve_wavelet("cf") == ("coif2", False)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 2 ** 16), st.sampled_from(WAVELET_NAMES))
def test_whf_linearity(a, b, seed, name):
    x, y = _image(seed, (8, 6, 2)), _image(seed + 1, (8, 6, 2))
    lhs = whf_extract(a * x + b * y, name).values
    rhs = a * whf_extract(x, name).values + b * whf_extract(y, name).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


# fourier masks --------------------------------------------------------------


def test_mask_config_validation():
    for tau in (0.0, 1.0, -0.1):
        with pytest.raises(ConfigurationError):
            FreqMaskConfig(tau)
    with pytest.raises(ConfigurationError):
        FreqMaskConfig(0.3, "bandpass")
    with pytest.raises(ConfigurationError):
        FreqMaskConfig(0.3, shape="hexagon")


def test_constant_highpass_is_zero():
    assert np.max(np.abs(hfreq(np.full((16, 16, 3), 0.8)))) <= 1e-10


def test_imaginary_residue_small():
    _, residue = fourier_filter(_image(4, (15, 20, 3)), FreqMaskConfig(0.3, "highpass"), return_residue=True)
    assert residue <= 1e-9


def test_lowpass_keeps_only_low_frequencies():
    x = _image(5, (32, 32))
    spec = np.fft.fft2(lfreq(x, 0.25))
    k = np.abs(np.fft.fftfreq(32) * 32)
    outside = (k[:, None] > 4) | (k[None, :] > 4)
    assert np.max(np.abs(spec[outside])) <= 1e-9


def test_radial_mask():
    x = _image(6, (32, 32))
    spec = np.fft.fft2(fourier_filter(x, FreqMaskConfig(0.25, "lowpass", "radial")))
    k = np.fft.fftfreq(32) * 32
    outside = np.hypot(k[:, None], k[None, :]) > 4
    assert np.max(np.abs(spec[outside])) <= 1e-9
    assert np.max(np.abs(spec[~outside] - np.fft.fft2(x)[~outside])) <= 1e-9
    _, residue = fourier_filter(_image(7, (15, 20, 3)), FreqMaskConfig(0.3, "highpass", "radial"),
                                return_residue=True)
    assert residue <= 1e-9


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(2, 20), st.integers(1, 3)),
           elements=st.floats(-5, 5)),
    st.floats(0.01, 0.99),
)
def test_mask_complementarity(x, tau):
    assert np.max(np.abs(hfreq(x, tau) + lfreq(x, tau) - x)) <= 1e-9
