import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from samwave import ndtensor as nd
from samwave.ndtensor import (
    ComplexTensor, ContractError, DimensionError, NonFiniteError, Tape, Tensor, grad_check, wvt1,
)


def _leaf(a):
    return Tensor(np.asarray(a, dtype=np.float64), requires_grad=True)


# matmul / cmatmul ---------------------------------------------------------


def test_identity_matmul():
    x = np.random.default_rng(0).random((3, 3))
    assert np.array_equal(nd.matmul(Tensor(np.eye(3)), Tensor(x)).data, x)


def test_small_matmul_literal():
    out = nd.matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[1.0], [1.0]]))
    assert out.data.tolist() == [[3.0], [7.0]]


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        nd.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_matmul_gradient_matches_fd():
    rng = np.random.default_rng(1)
    a, b = _leaf(rng.standard_normal((3, 4))), Tensor(rng.standard_normal((4, 2)))
    assert grad_check(lambda: nd.sum_(nd.matmul(a, b)), [a]) <= 1e-6


def test_cmatmul_identity_and_j_squared():
    rng = np.random.default_rng(2)
    z = ComplexTensor.from_numpy(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    eye = ComplexTensor.from_numpy(np.eye(3) + 0j)
    assert np.array_equal(nd.cmatmul(eye, z).numpy(), z.numpy())
    j = ComplexTensor.from_numpy(np.array([[1j]]))
    assert nd.cmatmul(j, j).numpy().tolist() == [[-1 + 0j]]


def test_cmatmul_is_the_four_real_expansion():
    rng = np.random.default_rng(3)
    ar, ai, br, bi = (rng.standard_normal((4, 4)) for _ in range(4))
    out = nd.cmatmul(ComplexTensor(Tensor(ar), Tensor(ai)), ComplexTensor(Tensor(br), Tensor(bi)))
    assert np.array_equal(out.re.data, ar @ br - ai @ bi)
    assert np.array_equal(out.im.data, ar @ bi + ai @ br)
    ref = (ar + 1j * ai) @ (br + 1j * bi)
    assert np.max(np.abs(out.numpy() - ref)) <= 1e-12


def test_cmatmul_shape_mismatch():
    a = ComplexTensor.from_numpy(np.ones((2, 3)) + 0j)
    with pytest.raises(DimensionError):
        nd.cmatmul(a, a)


def test_complex_parts_must_match():
    with pytest.raises((DimensionError, ValueError)):
        ComplexTensor(Tensor(np.ones(3)), Tensor(np.ones(4)))


# gelu ---------------------------------------------------------------------


def test_gelu_values():
    x = Tensor([0.0, 1.0, -10.0])
    y = nd.gelu(x).data
    assert y[0] == 0.0
    assert abs(y[1] - 0.5 * (1 + math.erf(1 / math.sqrt(2)))) <= 1e-12
    assert abs(y[1] - 0.841345) <= 1e-6
    assert abs(y[2]) <= 1e-9


def test_split_gelu_examples():
    z = nd.split_gelu(ComplexTensor.from_numpy(np.array([0 + 0j, 1 + 1j])))
    assert z.numpy()[0] == 0
    assert abs(z.re.data[1] - 0.841345) <= 1e-6 and abs(z.im.data[1] - 0.841345) <= 1e-6


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=20))
def test_split_gelu_keeps_real_inputs_real(xs):
    z = nd.split_gelu(ComplexTensor.from_real(Tensor(np.array(xs))))
    assert np.all(z.im.data == 0.0)


def test_gelu_monotone_and_tails():
    grid = np.linspace(-0.7517, 20, 4001)  # gelu's minimum sits near -0.7518
    y = nd.gelu(Tensor(grid)).data
    assert np.all(np.diff(y) >= 0)
    tails = np.concatenate([np.linspace(-40, -10, 50), np.linspace(10, 40, 50)])
    assert np.max(np.abs(nd.gelu(Tensor(tails)).data - np.maximum(tails, 0))) <= 1e-8


def test_gelu_matches_scipy_erf():
    x = np.linspace(-6, 6, 101)
    ref = 0.5 * x * (1 + erf(x / np.sqrt(2)))
    assert np.max(np.abs(nd.gelu(Tensor(x)).data - ref)) <= 1e-15


# backward -----------------------------------------------------------------


def test_square_gradient():
    x = _leaf(3.0)
    with Tape() as tape:
        loss = nd.mul(x, x)
    tape.backward(loss)
    assert x.grad == 6.0


def test_gelu_linear_gradient():
    rng = np.random.default_rng(4)
    w, x = _leaf(rng.standard_normal((5, 3))), Tensor(rng.standard_normal((3, 2)))
    assert grad_check(lambda: nd.sum_(nd.gelu(nd.matmul(w, x))), [w]) <= 1e-5


def test_non_scalar_loss_is_contract_error():
    x = _leaf(np.ones(3))
    with Tape() as tape:
        y = nd.mul(x, x)
    with pytest.raises(ContractError):
        tape.backward(y)


def test_tapes_are_isolated():
    x = _leaf(2.0)
    with Tape() as t1:
        a = nd.mul(x, x)
    with Tape() as t2:
        b = nd.mul(x, Tensor(5.0))
    assert len(t1) == 1 and len(t2) == 1
    t2.backward(b, accumulate=False)
    assert x.grad == 5.0
    t1.backward(a, accumulate=False)
    assert x.grad == 4.0
    t2.backward(b)
    assert x.grad == 9.0


def test_ops_outside_tape_are_not_recorded():
    x = _leaf(2.0)
    y = nd.mul(x, x)
    with Tape() as tape:
        pass
    assert len(tape) == 0 and y.data == 4.0


def test_non_finite_is_error():
    with pytest.raises(NonFiniteError):
        nd.div(Tensor([1.0]), Tensor([0.0]))


def test_grad_check_quadratic():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4))
    q = Tensor(a @ a.T)
    x = _leaf(rng.standard_normal((4, 1)))
    assert grad_check(lambda: nd.sum_(nd.mul(x, nd.matmul(q, x))), [x]) <= 1e-9


def test_grad_dtype_matches_param():
    x = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
    with Tape() as tape:
        loss = nd.sum_(nd.gelu(nd.mul(x, Tensor(np.float32(2.0)))))
    tape.backward(loss)
    assert x.grad.dtype == np.float32 and x.grad.shape == x.shape


def test_layer_norm_softmax_gradients():
    rng = np.random.default_rng(6)
    x = _leaf(rng.standard_normal((3, 5)))
    g, b = _leaf(rng.standard_normal(5)), _leaf(rng.standard_normal(5))
    w = Tensor(rng.standard_normal((3, 5)))

    def f():
        return nd.sum_(nd.mul(nd.softmax(nd.layer_norm(x, g, b), -1), w))

    assert grad_check(f, [x, g, b]) <= 1e-6


_UNARY = {
    "gelu": nd.gelu,
    "sigmoid": nd.sigmoid,
    "exp": lambda t: nd.exp(nd.mul(t, Tensor(0.3))),
    "softmax": lambda t: nd.softmax(t, -1),
    "transpose": lambda t: nd.transpose(t),
    "reshape": lambda t: nd.reshape(t, (-1,)),
    "square": lambda t: nd.mul(t, t),
    "log": lambda t: nd.log(nd.add(nd.mul(t, t), Tensor(1.0))),
}


@settings(max_examples=40, deadline=None)
@given(
    rows=st.integers(1, 4), cols=st.integers(1, 4),
    names=st.lists(st.sampled_from(sorted(_UNARY)), min_size=1, max_size=4),
    seed=st.integers(0, 2 ** 16),
)
def test_random_compositions_match_fd(rows, cols, names, seed):
    rng = np.random.default_rng(seed)
    x = _leaf(rng.standard_normal((rows, cols)))
    w = Tensor(rng.standard_normal((rows * cols,)))

    def f():
        y = x
        for n in names:
            y = _UNARY[n](y)
        return nd.sum_(nd.mul(nd.reshape(y, (-1,)), w))

    err = grad_check(f, [x])
    with nd.Tape() as tape:
        loss = f()
    tape.backward(loss)
    scale = float(np.max(np.abs(x.grad)))
    if scale >= 1e-6:
        assert err <= 1e-4
    else:
        # gradients this small sit under central-difference round-off
        # (about eps * |f| / h); bound the absolute error instead
        assert err * max(scale, 1e-8) <= 1e-10


# WVT1 ---------------------------------------------------------------------


@given(st.lists(st.integers(1, 4), min_size=0, max_size=4), st.sampled_from([np.float32, np.float64]))
def test_wvt1_roundtrip(shape, dtype):
    arr = np.random.default_rng(len(shape)).standard_normal(shape).astype(dtype)
    out = wvt1.decode(wvt1.encode(arr))
    assert out.dtype == dtype and out.shape == arr.shape and np.array_equal(out, arr)


def test_wvt1_layout():
    buf = wvt1.encode(np.array([[1.0, 2.0, 3.0]], dtype=np.float32))
    assert buf[:4] == b"WVT1" and buf[4] == 1 and buf[5] == 2
    assert int.from_bytes(buf[6:10], "little") == 1 and int.from_bytes(buf[10:14], "little") == 3
    assert np.frombuffer(buf[14:], "<f4").tolist() == [1.0, 2.0, 3.0]


def test_wvt1_rejects_garbage():
    with pytest.raises(wvt1.WVT1FormatError):
        wvt1.decode(b"NOPE\x01\x00")
    with pytest.raises(wvt1.WVT1FormatError):
        wvt1.decode(wvt1.encode(np.ones(4))[:-1])


def test_tiny_gradient_matches_chain_rule():
    # regression: four nested log(1 + t^2) give a gradient near 6e-14
    x0 = np.random.default_rng(0).standard_normal((1, 1))
    x = _leaf(x0.copy())
    with nd.Tape() as tape:
        y = x
        for _ in range(4):
            y = _UNARY["log"](y)
        loss = nd.sum_(y)
    tape.backward(loss)
    u, ref = x0[0, 0], 1.0
    for _ in range(4):
        ref *= 2 * u / (1 + u * u)
        u = math.log(1 + u * u)  # same rounding as the op under test
    assert abs(x.grad[0, 0] - ref) <= 1e-12 * abs(ref)
