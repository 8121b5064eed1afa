from .complex import ComplexTensor, as_complex, cadd, cconcat, clinear, cmatmul, split_gelu
from .gradcheck import grad_check, numeric_grad
from .tensor import (
    ContractError,
    DimensionError,
    NonFiniteError,
    Tape,
    Tensor,
    add,
    backward,
    bilinear_matrix,
    clip,
    concat,
    div,
    exp,
    gelu,
    layer_norm,
    linear,
    log,
    matmul,
    mean,
    mul,
    parameters_of,
    reshape,
    resize_bilinear,
    sigmoid,
    softmax,
    sub,
    sum_,
    tensor,
    transpose,
)
from . import wvt1

__all__ = [
    "ComplexTensor", "ContractError", "DimensionError", "NonFiniteError", "Tape", "Tensor",
    "add", "as_complex", "backward", "bilinear_matrix", "cadd", "cconcat", "clinear", "clip",
    "cmatmul", "concat", "div", "exp", "gelu", "grad_check", "layer_norm", "linear", "log",
    "matmul", "mean", "mul", "numeric_grad", "parameters_of", "reshape", "resize_bilinear",
    "sigmoid", "softmax", "split_gelu", "sub", "sum_", "tensor", "transpose", "wvt1",
]
