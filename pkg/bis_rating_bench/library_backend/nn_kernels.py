import math as __math__
from typing import Tuple as __Tuple__

import numpy as __np__
from numpy.lib.stride_tricks import sliding_window_view as __sliding_window_view__


# ----------------------------------------------------
# Activations
# ----------------------------------------------------


def relu(z: __np__.ndarray) -> __np__.ndarray:
    return __np__.maximum(z, 0.0)


def relu_grad(z: __np__.ndarray) -> __np__.ndarray:
    return (z > 0.0).astype(__np__.float64)


def sigmoid(z: __np__.ndarray) -> __np__.ndarray:
    # split by sign so exp never overflows
    out: __np__.ndarray = __np__.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + __np__.exp(-z[positive]))
    exp_z = __np__.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


def log_softmax(logits: __np__.ndarray) -> __np__.ndarray:
    """
    Row-wise log-softmax with max subtraction.

    :param logits: (np.ndarray): Array of shape (batch, classes).
    :return: (np.ndarray): Log probabilities of the same shape.
    """
    shifted: __np__.ndarray = logits - __np__.max(logits, axis=-1, keepdims=True)
    return shifted - __np__.log(__np__.sum(__np__.exp(shifted), axis=-1, keepdims=True))


# ----------------------------------------------------
# Dense
# ----------------------------------------------------


def dense_backward(
    x: __np__.ndarray, weights: __np__.ndarray, grad_z: __np__.ndarray
) -> __Tuple__[__np__.ndarray, __np__.ndarray, __np__.ndarray]:
    """
    Gradients of z = x.W + b.

    :param x: (np.ndarray): Input of shape (..., in).
    :param weights: (np.ndarray): Weights of shape (in, out).
    :param grad_z: (np.ndarray): Gradient w.r.t. z, shape (..., out).
    :return: (tuple): (grad_x, grad_weights, grad_biases).
    """
    flat_x: __np__.ndarray = x.reshape(-1, weights.shape[0])
    flat_grad: __np__.ndarray = grad_z.reshape(-1, weights.shape[1])
    return grad_z @ weights.T, flat_x.T @ flat_grad, flat_grad.sum(axis=0)


# ----------------------------------------------------
# Convolutions (cross-correlation, one matmul per kernel offset)
# ----------------------------------------------------


def conv1d_output_length(length: int, kernel_size: int, stride: int) -> int:
    return (length - kernel_size) // stride + 1


def conv1d_kernel_forward(
    x: __np__.ndarray, weights: __np__.ndarray, biases: __np__.ndarray, stride: int
) -> __np__.ndarray:
    """
    Valid 1-D cross-correlation.

    :param x: (np.ndarray): Input of shape (batch, length, channels).
    :param weights: (np.ndarray): Kernel of shape (kernel, channels, filters).
    :param biases: (np.ndarray): Biases of shape (filters,).
    :param stride: (int): Step between windows.
    :return: (np.ndarray): Output of shape (batch, out_length, filters).
    """
    kernel_size: int = weights.shape[0]
    out_length: int = conv1d_output_length(x.shape[1], kernel_size, stride)
    span: int = stride * (out_length - 1) + 1
    z: __np__.ndarray = __np__.zeros((x.shape[0], out_length, weights.shape[2])) + biases
    for k in range(kernel_size):
        z += x[:, k : k + span : stride, :] @ weights[k]
    return z


def conv1d_kernel_backward(
    x: __np__.ndarray, weights: __np__.ndarray, grad_z: __np__.ndarray, stride: int
) -> __Tuple__[__np__.ndarray, __np__.ndarray, __np__.ndarray]:
    kernel_size: int = weights.shape[0]
    out_length: int = grad_z.shape[1]
    span: int = stride * (out_length - 1) + 1
    grad_x: __np__.ndarray = __np__.zeros_like(x)
    grad_w: __np__.ndarray = __np__.zeros_like(weights)
    for k in range(kernel_size):
        x_k = x[:, k : k + span : stride, :]
        grad_w[k] = __np__.tensordot(x_k, grad_z, axes=([0, 1], [0, 1]))
        grad_x[:, k : k + span : stride, :] += grad_z @ weights[k].T
    return grad_x, grad_w, grad_z.sum(axis=(0, 1))


def conv2d_padding(
    size: int, kernel_size: int, stride: int, padding: str
) -> __Tuple__[int, int, int]:
    """
    Output extent and (before, after) padding along one spatial axis.

    "same" pads so the output extent is ceil(size / stride), putting the odd
    extra row or column after; "valid" never pads.

    :return: (tuple): (output size, pad before, pad after).
    """
    if padding == "same":
        out_size: int = int(__math__.ceil(size / stride))
        total: int = max((out_size - 1) * stride + kernel_size - size, 0)
        return out_size, total // 2, total - total // 2
    return (size - kernel_size) // stride + 1, 0, 0


def conv2d_kernel_forward(
    x: __np__.ndarray,
    weights: __np__.ndarray,
    biases: __np__.ndarray,
    stride: int,
    padding: str,
) -> __np__.ndarray:
    """
    2-D cross-correlation.

    :param x: (np.ndarray): Input of shape (batch, rows, cols, channels).
    :param weights: (np.ndarray): Kernel of shape (k_rows, k_cols, channels, filters).
    :param biases: (np.ndarray): Biases of shape (filters,).
    :param stride: (int): Step in both directions.
    :param padding: (str): "same" or "valid".
    :return: (np.ndarray): Output of shape (batch, out_rows, out_cols, filters).
    """
    k_rows, k_cols = weights.shape[0], weights.shape[1]
    out_rows, top, bottom = conv2d_padding(x.shape[1], k_rows, stride, padding)
    out_cols, left, right = conv2d_padding(x.shape[2], k_cols, stride, padding)
    padded: __np__.ndarray = __np__.pad(x, ((0, 0), (top, bottom), (left, right), (0, 0)))
    row_span: int = stride * (out_rows - 1) + 1
    col_span: int = stride * (out_cols - 1) + 1
    z: __np__.ndarray = (
        __np__.zeros((x.shape[0], out_rows, out_cols, weights.shape[3])) + biases
    )
    for i in range(k_rows):
        for j in range(k_cols):
            z += padded[:, i : i + row_span : stride, j : j + col_span : stride, :] @ weights[i, j]
    return z


def conv2d_kernel_backward(
    x: __np__.ndarray,
    weights: __np__.ndarray,
    grad_z: __np__.ndarray,
    stride: int,
    padding: str,
) -> __Tuple__[__np__.ndarray, __np__.ndarray, __np__.ndarray]:
    k_rows, k_cols = weights.shape[0], weights.shape[1]
    out_rows, top, bottom = conv2d_padding(x.shape[1], k_rows, stride, padding)
    out_cols, left, right = conv2d_padding(x.shape[2], k_cols, stride, padding)
    padded: __np__.ndarray = __np__.pad(x, ((0, 0), (top, bottom), (left, right), (0, 0)))
    grad_padded: __np__.ndarray = __np__.zeros_like(padded)
    grad_w: __np__.ndarray = __np__.zeros_like(weights)
    row_span: int = stride * (out_rows - 1) + 1
    col_span: int = stride * (out_cols - 1) + 1
    for i in range(k_rows):
        for j in range(k_cols):
            window = (slice(None), slice(i, i + row_span, stride), slice(j, j + col_span, stride))
            grad_w[i, j] = __np__.tensordot(padded[window], grad_z, axes=([0, 1, 2], [0, 1, 2]))
            grad_padded[window] += grad_z @ weights[i, j].T
    grad_x: __np__.ndarray = grad_padded[
        :, top : top + x.shape[1], left : left + x.shape[2], :
    ]
    return grad_x, grad_w, grad_z.sum(axis=(0, 1, 2))


# ----------------------------------------------------
# Max pooling (first index wins ties)
# ----------------------------------------------------


def maxpool1d_kernel_forward(
    x: __np__.ndarray, window: int, stride: int
) -> __Tuple__[__np__.ndarray, __np__.ndarray]:
    """
    :param x: (np.ndarray): Input of shape (batch, length, channels).
    :return: (tuple): (pooled output, argmax offset inside each window).
    """
    out_length: int = (x.shape[1] - window) // stride + 1
    windows = __sliding_window_view__(x, window, axis=1)[:, ::stride][:, :out_length]
    argmax: __np__.ndarray = __np__.argmax(windows, axis=-1)
    pooled: __np__.ndarray = __np__.take_along_axis(windows, argmax[..., None], axis=-1)[..., 0]
    return pooled, argmax


def maxpool1d_kernel_backward(
    input_shape: tuple, argmax: __np__.ndarray, grad_out: __np__.ndarray, window: int, stride: int
) -> __np__.ndarray:
    grad_x: __np__.ndarray = __np__.zeros(input_shape)
    span: int = stride * (grad_out.shape[1] - 1) + 1
    for k in range(window):
        grad_x[:, k : k + span : stride, :] += grad_out * (argmax == k)
    return grad_x


def maxpool2d_kernel_forward(
    x: __np__.ndarray, window: int, stride: int
) -> __Tuple__[__np__.ndarray, __np__.ndarray]:
    """
    :param x: (np.ndarray): Input of shape (batch, rows, cols, channels).
    :return: (tuple): (pooled output, row-major argmax offset inside each window).
    """
    out_rows: int = (x.shape[1] - window) // stride + 1
    out_cols: int = (x.shape[2] - window) // stride + 1
    windows = __sliding_window_view__(x, (window, window), axis=(1, 2))
    windows = windows[:, ::stride, ::stride][:, :out_rows, :out_cols]
    flat = windows.reshape(windows.shape[:4] + (window * window,))
    argmax: __np__.ndarray = __np__.argmax(flat, axis=-1)
    pooled: __np__.ndarray = __np__.take_along_axis(flat, argmax[..., None], axis=-1)[..., 0]
    return pooled, argmax


def maxpool2d_kernel_backward(
    input_shape: tuple, argmax: __np__.ndarray, grad_out: __np__.ndarray, window: int, stride: int
) -> __np__.ndarray:
    grad_x: __np__.ndarray = __np__.zeros(input_shape)
    row_span: int = stride * (grad_out.shape[1] - 1) + 1
    col_span: int = stride * (grad_out.shape[2] - 1) + 1
    for i in range(window):
        for j in range(window):
            grad_x[:, i : i + row_span : stride, j : j + col_span : stride, :] += grad_out * (
                argmax == i * window + j
            )
    return grad_x


# ----------------------------------------------------
# LSTM cell, gate blocks ordered input, forget, output, candidate
# ----------------------------------------------------


def lstm_kernel_step(
    x_t: __np__.ndarray,
    h_prev: __np__.ndarray,
    c_prev: __np__.ndarray,
    weights: __np__.ndarray,
    biases: __np__.ndarray,
) -> __Tuple__[__np__.ndarray, __np__.ndarray, tuple]:
    """
    One LSTM recurrence step.

    :param x_t: (np.ndarray): Input of shape (batch, features).
    :param h_prev: (np.ndarray): Hidden state of shape (batch, units).
    :param c_prev: (np.ndarray): Cell state of shape (batch, units).
    :param weights: (np.ndarray): Stacked input and recurrent weights, shape (features + units, 4 * units).
    :param biases: (np.ndarray): Gate biases of shape (4 * units,).
    :return: (tuple): (h_t, c_t, cache for the backward step).
    """
    units: int = h_prev.shape[-1]
    xh: __np__.ndarray = __np__.concatenate([x_t, h_prev], axis=-1)
    z: __np__.ndarray = xh @ weights + biases
    i = sigmoid(z[:, :units])
    f = sigmoid(z[:, units : 2 * units])
    o = sigmoid(z[:, 2 * units : 3 * units])
    g = __np__.tanh(z[:, 3 * units :])
    c_t = f * c_prev + i * g
    tanh_c = __np__.tanh(c_t)
    h_t = o * tanh_c
    return h_t, c_t, (xh, c_prev, i, f, o, g, tanh_c)


def lstm_kernel_step_backward(
    grad_h: __np__.ndarray,
    grad_c: __np__.ndarray,
    cache: tuple,
    weights: __np__.ndarray,
    n_features: int,
) -> __Tuple__[__np__.ndarray, __np__.ndarray, __np__.ndarray, __np__.ndarray, __np__.ndarray]:
    """
    Reverse of lstm_kernel_step.

    :return: (tuple): (grad_x_t, grad_h_prev, grad_c_prev, grad_weights, grad_biases).
    """
    xh, c_prev, i, f, o, g, tanh_c = cache
    grad_o = grad_h * tanh_c
    grad_c_total = grad_c + grad_h * o * (1.0 - tanh_c ** 2)
    grad_z = __np__.concatenate(
        [
            grad_c_total * g * i * (1.0 - i),
            grad_c_total * c_prev * f * (1.0 - f),
            grad_o * o * (1.0 - o),
            grad_c_total * i * (1.0 - g ** 2),
        ],
        axis=-1,
    )
    grad_xh = grad_z @ weights.T
    return (
        grad_xh[:, :n_features],
        grad_xh[:, n_features:],
        grad_c_total * f,
        xh.T @ grad_z,
        grad_z.sum(axis=0),
    )
