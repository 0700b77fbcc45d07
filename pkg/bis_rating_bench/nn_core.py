"""
Minimal neural-network engine on numpy.

Every layer works on float64 arrays with a leading batch axis, caches what its
backward pass needs and accumulates parameter gradients into its
:class:`LayerParams`. :func:`train` runs seeded mini-batch SGD with inverted
dropout and early stopping on a monitor split carved from the training data.
"""

from dataclasses import dataclass, field
from logging import Logger as __Logger__
from typing import Callable as __Callable__
from typing import Dict as __Dict__
from typing import List as __List__
from typing import Optional as __Optional__
from typing import Sequence as __Sequence__
from typing import Protocol as __Protocol__
from typing import Tuple as __Tuple__

import numpy as __np__
import pandas as __pd__

import bis_rating_bench
from bis_rating_bench.library_backend import nn_kernels as __kernels__

Tensor = __np__.ndarray

ACTIVATIONS: tuple = ("relu", "linear")


def __logger_or_mock__(logger: __Optional__[__Logger__]):
    if logger is None:
        return bis_rating_bench.library_backend.MockLogger()
    return logger


def __as_tensor__(values) -> Tensor:
    return __np__.asarray(values, dtype=__np__.float64)


# ----------------------------------------------------
# Parameters and configuration
# ----------------------------------------------------


@dataclass
class LayerParams:
    """
    Trainable parameters of one layer and their gradient accumulators.

    :param weights: (np.ndarray): Weight tensor.
    :param biases: (np.ndarray): Bias tensor.
    :param weights_grad: (np.ndarray): Accumulated gradient of the weights, zeros when omitted.
    :param biases_grad: (np.ndarray): Accumulated gradient of the biases, zeros when omitted.
    """

    weights: Tensor
    biases: Tensor
    weights_grad: __Optional__[Tensor] = None
    biases_grad: __Optional__[Tensor] = None

    def __post_init__(self):
        self.weights = __as_tensor__(self.weights)
        self.biases = __as_tensor__(self.biases)
        if self.weights_grad is None:
            self.weights_grad = __np__.zeros_like(self.weights)
        if self.biases_grad is None:
            self.biases_grad = __np__.zeros_like(self.biases)
        self.check_shapes()

    def check_shapes(self, logger: __Logger__ = None):
        if (
            self.weights_grad.shape != self.weights.shape
            or self.biases_grad.shape != self.biases.shape
        ):
            raise bis_rating_bench.LoggedDimensionError(
                logger,
                "Gradient shapes {wg}/{bg} do not mirror parameter shapes {w}/{b}.".format(
                    wg=self.weights_grad.shape,
                    bg=self.biases_grad.shape,
                    w=self.weights.shape,
                    b=self.biases.shape,
                ),
            )

    def zero_grad(self):
        self.weights_grad[...] = 0.0
        self.biases_grad[...] = 0.0

    @property
    def size(self) -> int:
        return int(self.weights.size + self.biases.size)


@dataclass(frozen=True)
class TrainConfig:
    """
    Training hyperparameters. Bounds are enforced at construction.

    :param learning_rate: (float): SGD step size, positive.
    :param max_epochs: (int): Epoch budget, 0 returns the initialised model.
    :param batch_size: (int): Mini-batch size, positive.
    :param dropout_rate: (float): Dropout on fully connected hidden layers, in [0, 1).
    :param early_stop_patience: (int): Epochs without monitor improvement before halting, 0 disables halting.
    :param early_stop_fraction: (float): Share of the training data held out as monitor split, in (0, 1).
    :param rng_seed: (int): Seed of every random stream used by training.
    """

    learning_rate: float = 0.05
    max_epochs: int = 50
    batch_size: int = 32
    dropout_rate: float = 0.5
    early_stop_patience: int = 5
    early_stop_fraction: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        problems: list = []
        if not self.learning_rate > 0:
            problems.append("train.learning_rate must be positive")
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 0:
            problems.append("train.max_epochs must be a non-negative integer")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            problems.append("train.batch_size must be a positive integer")
        if not 0.0 <= self.dropout_rate < 1.0:
            problems.append("train.dropout_rate must lie in [0, 1)")
        if int(self.early_stop_patience) != self.early_stop_patience or self.early_stop_patience < 0:
            problems.append("train.early_stop_patience must be a non-negative integer")
        if not 0.0 < self.early_stop_fraction < 1.0:
            problems.append("train.early_stop_fraction must lie in (0, 1)")
        if problems:
            raise bis_rating_bench.LoggedValueError(None, "; ".join(problems) + ".")


@dataclass
class LossValue:
    """
    Mean categorical cross-entropy of a batch.

    :param value: (float): Loss value, non-negative.
    :param probabilities: (np.ndarray): Softmax rows, each summing to 1.
    :param gradient: (np.ndarray): Gradient of the loss w.r.t. the logits.
    """

    value: float
    probabilities: Tensor
    gradient: Tensor


# ----------------------------------------------------
# Functional forward operations
# ----------------------------------------------------


def dense_forward(
    params: LayerParams, input: Tensor, activation: str = "relu", logger: __Logger__ = None
) -> Tensor:
    """
    Fully connected layer: input.W + b followed by the activation.

    :param params: (LayerParams): Weights of shape (in, out) and biases of shape (out,).
    :param input: (np.ndarray): Array whose last axis has size ``in``.
    :param activation: (str): "relu" or "linear".
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (np.ndarray): Activated output.
    """
    x: Tensor = __as_tensor__(input)
    if x.shape[-1] != params.weights.shape[0]:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Dense input of shape {x} does not match weights of shape {w}.".format(
                x=x.shape, w=params.weights.shape
            ),
        )
    z: Tensor = x @ params.weights + params.biases
    return __kernels__.relu(z) if activation == "relu" else z


def conv1d_forward(
    params: LayerParams, input: Tensor, stride: int = 1, logger: __Logger__ = None
) -> Tensor:
    """
    Valid (unpadded) 1-D cross-correlation, one output channel per filter.

    :param params: (LayerParams): Kernel of shape (kernel, channels, filters), biases of shape (filters,).
    :param input: (np.ndarray): (length, channels) or (batch, length, channels).
    :param stride: (int): Step between windows.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (np.ndarray): (out_length, filters), batched like the input.
    """
    x: Tensor = __as_tensor__(input)
    single: bool = x.ndim == 2
    if single:
        x = x[None]
    __check_stride__(stride, logger)
    kernel_size, channels = params.weights.shape[0], params.weights.shape[1]
    if x.ndim != 3 or x.shape[2] != channels or kernel_size > x.shape[1]:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Conv1d input of shape {x} does not fit kernel of shape {w}.".format(
                x=x.shape, w=params.weights.shape
            ),
        )
    z: Tensor = __kernels__.conv1d_kernel_forward(x, params.weights, params.biases, stride)
    return z[0] if single else z


def conv2d_forward(
    params: LayerParams,
    input: Tensor,
    stride: int = 1,
    padding: str = "same",
    logger: __Logger__ = None,
) -> Tensor:
    """
    2-D cross-correlation. With "same" padding the output spatial extent is
    ceil(dim / stride).

    :param params: (LayerParams): Kernel of shape (k, k, channels, filters), biases of shape (filters,).
    :param input: (np.ndarray): (rows, cols, channels) or (batch, rows, cols, channels).
    :param stride: (int): Step in both directions.
    :param padding: (str): "same" or "valid".
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (np.ndarray): Output feature maps, batched like the input.
    """
    x: Tensor = __as_tensor__(input)
    single: bool = x.ndim == 3
    if single:
        x = x[None]
    __check_stride__(stride, logger)
    if padding not in ("same", "valid"):
        raise bis_rating_bench.LoggedValueError(
            logger, "Padding must be 'same' or 'valid', got '{p}'.".format(p=padding)
        )
    k_rows, k_cols, channels = params.weights.shape[:3]
    too_small: bool = padding == "valid" and (k_rows > x.shape[1] or k_cols > x.shape[2])
    if x.ndim != 4 or x.shape[3] != channels or too_small:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Conv2d input of shape {x} does not fit kernel of shape {w}.".format(
                x=x.shape, w=params.weights.shape
            ),
        )
    z: Tensor = __kernels__.conv2d_kernel_forward(
        x, params.weights, params.biases, stride, padding
    )
    return z[0] if single else z


def maxpool_forward(
    input: Tensor, window: int, stride: int, logger: __Logger__ = None
) -> Tensor:
    """
    1-D max pooling; the channel depth is unchanged.

    :param input: (np.ndarray): (length,), (length, channels) or (batch, length, channels).
    :param window: (int): Pooling window.
    :param stride: (int): Step between windows.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (np.ndarray): Pooled array with the input's rank.
    """
    x: Tensor = __as_tensor__(input)
    original_ndim: int = x.ndim
    if original_ndim == 1:
        x = x[None, :, None]
    elif original_ndim == 2:
        x = x[None]
    __check_pool__(x.shape[1:2], window, stride, logger)
    pooled, _ = __kernels__.maxpool1d_kernel_forward(x, window, stride)
    if original_ndim == 1:
        return pooled[0, :, 0]
    return pooled[0] if original_ndim == 2 else pooled


def maxpool2d_forward(
    input: Tensor, window: int, stride: int, logger: __Logger__ = None
) -> Tensor:
    """
    2-D max pooling over square windows.

    :param input: (np.ndarray): (rows, cols, channels) or (batch, rows, cols, channels).
    :param window: (int): Side of the pooling window.
    :param stride: (int): Step in both directions.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (np.ndarray): Pooled array with the input's rank.
    """
    x: Tensor = __as_tensor__(input)
    single: bool = x.ndim == 3
    if single:
        x = x[None]
    __check_pool__(x.shape[1:3], window, stride, logger)
    pooled, _ = __kernels__.maxpool2d_kernel_forward(x, window, stride)
    return pooled[0] if single else pooled


def lstm_step(
    params: LayerParams,
    x_t: Tensor,
    h_prev: Tensor,
    c_prev: Tensor,
    logger: __Logger__ = None,
) -> __Tuple__[Tensor, Tensor]:
    """
    One LSTM step: c_t = f*c_prev + i*g, h_t = o*tanh(c_t). Gate blocks of the
    stacked weights and biases are ordered i, f, o, g.

    :param params: (LayerParams): Weights of shape (features + units, 4 * units), biases of shape (4 * units,).
    :param x_t: (np.ndarray): Input of shape (features,) or (batch, features).
    :param h_prev: (np.ndarray): Previous hidden state.
    :param c_prev: (np.ndarray): Previous cell state.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (tuple): (h_t, c_t).
    """
    x, h, c = __as_tensor__(x_t), __as_tensor__(h_prev), __as_tensor__(c_prev)
    single: bool = x.ndim == 1
    if single:
        x, h, c = x[None], h[None], c[None]
    units: int = params.biases.shape[0] // 4
    if h.shape != c.shape or h.shape[-1] != units:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Hidden state {h} and cell state {c} must both have {u} units.".format(
                h=h.shape, c=c.shape, u=units
            ),
        )
    if x.shape[-1] + units != params.weights.shape[0]:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "LSTM input of shape {x} does not match weights of shape {w}.".format(
                x=x.shape, w=params.weights.shape
            ),
        )
    h_t, c_t, _ = __kernels__.lstm_kernel_step(x, h, c, params.weights, params.biases)
    return (h_t[0], c_t[0]) if single else (h_t, c_t)


def softmax_cross_entropy(
    logits: Tensor, labels: __Sequence__[int], logger: __Logger__ = None
) -> LossValue:
    """
    Numerically stabilised softmax with mean categorical cross-entropy.

    :param logits: (np.ndarray): Array of shape (batch, classes).
    :param labels: (Sequence[int]): Class index per row.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (LossValue): Loss, probabilities and gradient (p - onehot) / batch.
    """
    z: Tensor = __np__.atleast_2d(__as_tensor__(logits))
    y: __np__.ndarray = __np__.asarray(labels, dtype=__np__.int64).reshape(-1)
    n_classes: int = z.shape[1]
    if y.shape[0] != z.shape[0]:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Got {n} labels for {b} rows of logits.".format(n=y.shape[0], b=z.shape[0]),
        )
    bad: __np__.ndarray = __np__.flatnonzero((y < 0) | (y >= n_classes))
    if bad.size:
        raise bis_rating_bench.LoggedLabelError(
            logger,
            "Label {label} at index {index} is outside [0, {k}).".format(
                label=int(y[bad[0]]), index=int(bad[0]), k=n_classes
            ),
        )
    log_p: Tensor = __kernels__.log_softmax(z)
    batch: int = z.shape[0]
    value: float = float(-log_p[__np__.arange(batch), y].mean())
    probabilities: Tensor = __np__.exp(log_p)
    probabilities /= probabilities.sum(axis=1, keepdims=True)
    probabilities = __np__.maximum(probabilities, __np__.finfo(__np__.float64).tiny)
    gradient: Tensor = probabilities.copy()
    gradient[__np__.arange(batch), y] -= 1.0
    return LossValue(value=value, probabilities=probabilities, gradient=gradient / batch)


def dropout_apply(
    input: Tensor,
    rate: float,
    training: bool,
    rng: __np__.random.Generator = None,
    logger: __Logger__ = None,
) -> Tensor:
    """
    Inverted dropout. Identity at inference or at rate 0.

    :param input: (np.ndarray): Activations.
    :param rate: (float): Probability of zeroing a unit, in [0, 1).
    :param training: (bool): Apply the random mask.
    :param rng: (np.random.Generator): Source of the mask.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (np.ndarray): Masked and rescaled activations.
    """
    x: Tensor = __as_tensor__(input)
    mask: __Optional__[Tensor] = __dropout_mask__(x.shape, rate, training, rng, logger)
    return x if mask is None else x * mask


def __dropout_mask__(
    shape: tuple, rate: float, training: bool, rng, logger: __Logger__
) -> __Optional__[Tensor]:
    if not 0.0 <= rate < 1.0:
        raise bis_rating_bench.LoggedValueError(
            logger, "Dropout rate must lie in [0, 1), got {r}.".format(r=rate)
        )
    if not training or rate == 0.0:
        return None
    if rng is None:
        rng = __np__.random.default_rng()
    keep: Tensor = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def __check_stride__(stride: int, logger: __Logger__):
    if int(stride) != stride or stride < 1:
        raise bis_rating_bench.LoggedValueError(
            logger, "Stride must be a positive integer, got {s}.".format(s=stride)
        )


def __check_pool__(extent: tuple, window: int, stride: int, logger: __Logger__):
    __check_stride__(stride, logger)
    if window < 1 or any(window > size for size in extent):
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Pooling window {w} exceeds input extent {e}.".format(w=window, e=tuple(extent)),
        )


# ----------------------------------------------------
# Layers
# ----------------------------------------------------


class Layer:
    """
    Base class. Subclasses implement forward/backward on batched arrays.
    """

    params: __Optional__[LayerParams] = None

    def __init__(self, logger: __Logger__ = None):
        self.logger = logger
        self.cache = None

    def forward(self, x: Tensor, training: bool = False, rng=None, store: bool = True) -> Tensor:
        raise NotImplementedError

    def backward(self, grad_out: Tensor) -> Tensor:
        raise NotImplementedError

    def __require_cache__(self):
        if self.cache is None:
            raise bis_rating_bench.LoggedStateError(
                self.logger,
                "{layer}.backward called before forward.".format(layer=type(self).__name__),
            )
        return self.cache

    def __repr__(self) -> str:
        return "{name}()".format(name=type(self).__name__)


def __he_uniform__(rng: __np__.random.Generator, shape: tuple, fan_in: int) -> Tensor:
    limit: float = __np__.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def __initial_params__(
    params: __Optional__[LayerParams], rng, weight_shape: tuple, bias_shape: tuple, fan_in: int
) -> LayerParams:
    if params is not None:
        return params
    if rng is None:
        return LayerParams(__np__.zeros(weight_shape), __np__.zeros(bias_shape))
    return LayerParams(__he_uniform__(rng, weight_shape, fan_in), __np__.zeros(bias_shape))


class Dense(Layer):
    """
    Fully connected layer on the last axis.

    :param in_features: (int): Input width.
    :param units: (int): Output width.
    :param activation: (str): "relu" for hidden layers, "linear" for the logits layer.
    :param rng: (np.random.Generator): He-uniform initialisation source; zeros when None.
    :param params: (LayerParams): Explicit parameters, overrides initialisation.
    """

    def __init__(
        self,
        in_features: int,
        units: int,
        activation: str = "relu",
        rng=None,
        params: LayerParams = None,
        logger: __Logger__ = None,
    ):
        super().__init__(logger)
        if activation not in ACTIVATIONS:
            raise bis_rating_bench.LoggedValueError(
                logger, "Unknown activation '{a}'.".format(a=activation)
            )
        self.activation: str = activation
        self.params = __initial_params__(params, rng, (in_features, units), (units,), in_features)

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        z: Tensor = dense_forward(self.params, x, "linear", self.logger)
        if store:
            self.cache = (x, z)
        return __kernels__.relu(z) if self.activation == "relu" else z

    def backward(self, grad_out):
        x, z = self.__require_cache__()
        grad_z: Tensor = grad_out * __kernels__.relu_grad(z) if self.activation == "relu" else grad_out
        grad_x, grad_w, grad_b = __kernels__.dense_backward(x, self.params.weights, grad_z)
        self.params.weights_grad += grad_w
        self.params.biases_grad += grad_b
        return grad_x

    def __repr__(self):
        return "Dense({i}->{o}, {a})".format(
            i=self.params.weights.shape[0], o=self.params.weights.shape[1], a=self.activation
        )


class Conv1D(Layer):
    """
    Valid 1-D convolution over (batch, length, channels) followed by the activation.
    """

    def __init__(
        self,
        in_channels: int,
        filters: int,
        kernel_size: int,
        stride: int = 1,
        activation: str = "relu",
        rng=None,
        params: LayerParams = None,
        logger: __Logger__ = None,
    ):
        super().__init__(logger)
        __check_stride__(stride, logger)
        self.stride: int = stride
        self.activation: str = activation
        self.params = __initial_params__(
            params, rng, (kernel_size, in_channels, filters), (filters,), kernel_size * in_channels
        )

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        z: Tensor = conv1d_forward(self.params, x, self.stride, self.logger)
        if store:
            self.cache = (x, z)
        return __kernels__.relu(z) if self.activation == "relu" else z

    def backward(self, grad_out):
        x, z = self.__require_cache__()
        grad_z: Tensor = grad_out * __kernels__.relu_grad(z) if self.activation == "relu" else grad_out
        grad_x, grad_w, grad_b = __kernels__.conv1d_kernel_backward(
            x, self.params.weights, grad_z, self.stride
        )
        self.params.weights_grad += grad_w
        self.params.biases_grad += grad_b
        return grad_x

    def __repr__(self):
        k, c, f = self.params.weights.shape
        return "Conv1D({c}->{f}, kernel={k}, stride={s})".format(c=c, f=f, k=k, s=self.stride)


class Conv2D(Layer):
    """
    2-D convolution over (batch, rows, cols, channels) followed by the activation.
    """

    def __init__(
        self,
        in_channels: int,
        filters: int,
        kernel_size: int,
        stride: int = 1,
        padding: str = "same",
        activation: str = "relu",
        rng=None,
        params: LayerParams = None,
        logger: __Logger__ = None,
    ):
        super().__init__(logger)
        __check_stride__(stride, logger)
        self.stride: int = stride
        self.padding: str = padding
        self.activation: str = activation
        self.params = __initial_params__(
            params,
            rng,
            (kernel_size, kernel_size, in_channels, filters),
            (filters,),
            kernel_size * kernel_size * in_channels,
        )

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        z: Tensor = conv2d_forward(self.params, x, self.stride, self.padding, self.logger)
        if store:
            self.cache = (x, z)
        return __kernels__.relu(z) if self.activation == "relu" else z

    def backward(self, grad_out):
        x, z = self.__require_cache__()
        grad_z: Tensor = grad_out * __kernels__.relu_grad(z) if self.activation == "relu" else grad_out
        grad_x, grad_w, grad_b = __kernels__.conv2d_kernel_backward(
            x, self.params.weights, grad_z, self.stride, self.padding
        )
        self.params.weights_grad += grad_w
        self.params.biases_grad += grad_b
        return grad_x

    def __repr__(self):
        k, _, c, f = self.params.weights.shape
        return "Conv2D({c}->{f}, kernel={k}x{k}, stride={s}, {p})".format(
            c=c, f=f, k=k, s=self.stride, p=self.padding
        )


class MaxPool1D(Layer):
    """
    Max pooling along the length axis of (batch, length, channels).
    """

    def __init__(self, window: int, stride: int = None, logger: __Logger__ = None):
        super().__init__(logger)
        self.window: int = window
        self.stride: int = window if stride is None else stride

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        __check_pool__(x.shape[1:2], self.window, self.stride, self.logger)
        pooled, argmax = __kernels__.maxpool1d_kernel_forward(x, self.window, self.stride)
        if store:
            self.cache = (x.shape, argmax)
        return pooled

    def backward(self, grad_out):
        shape, argmax = self.__require_cache__()
        return __kernels__.maxpool1d_kernel_backward(
            shape, argmax, grad_out, self.window, self.stride
        )


class MaxPool2D(Layer):
    """
    Max pooling over square windows of (batch, rows, cols, channels).
    """

    def __init__(self, window: int, stride: int = None, logger: __Logger__ = None):
        super().__init__(logger)
        self.window: int = window
        self.stride: int = window if stride is None else stride

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        __check_pool__(x.shape[1:3], self.window, self.stride, self.logger)
        pooled, argmax = __kernels__.maxpool2d_kernel_forward(x, self.window, self.stride)
        if store:
            self.cache = (x.shape, argmax)
        return pooled

    def backward(self, grad_out):
        shape, argmax = self.__require_cache__()
        return __kernels__.maxpool2d_kernel_backward(
            shape, argmax, grad_out, self.window, self.stride
        )


class LSTM(Layer):
    """
    LSTM over (batch, steps, features); outputs the final hidden state (batch, units).
    """

    def __init__(
        self,
        input_features: int,
        units: int,
        rng=None,
        params: LayerParams = None,
        logger: __Logger__ = None,
    ):
        super().__init__(logger)
        self.input_features: int = input_features
        self.units: int = units
        self.params = __initial_params__(
            params, rng, (input_features + units, 4 * units), (4 * units,), input_features + units
        )

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        if x.ndim != 3 or x.shape[2] != self.input_features:
            raise bis_rating_bench.LoggedDimensionError(
                self.logger,
                "LSTM expects (batch, steps, {f}), got {s}.".format(f=self.input_features, s=x.shape),
            )
        h: Tensor = __np__.zeros((x.shape[0], self.units))
        c: Tensor = __np__.zeros((x.shape[0], self.units))
        step_caches: list = []
        for t in range(x.shape[1]):
            h, c, step_cache = __kernels__.lstm_kernel_step(
                x[:, t, :], h, c, self.params.weights, self.params.biases
            )
            step_caches.append(step_cache)
        if store:
            self.cache = (x.shape, step_caches)
        return h

    def backward(self, grad_out):
        shape, step_caches = self.__require_cache__()
        grad_x: Tensor = __np__.zeros(shape)
        grad_h: Tensor = __as_tensor__(grad_out)
        grad_c: Tensor = __np__.zeros_like(grad_h)
        for t in reversed(range(shape[1])):
            grad_x_t, grad_h, grad_c, grad_w, grad_b = __kernels__.lstm_kernel_step_backward(
                grad_h, grad_c, step_caches[t], self.params.weights, self.input_features
            )
            grad_x[:, t, :] = grad_x_t
            self.params.weights_grad += grad_w
            self.params.biases_grad += grad_b
        return grad_x

    def __repr__(self):
        return "LSTM({f}->{u})".format(f=self.input_features, u=self.units)


class Dropout(Layer):
    """
    Inverted dropout. With ``freeze_mask`` set, training passes reuse the last mask,
    which makes the layer deterministic for gradient checks.
    """

    def __init__(self, rate: float, logger: __Logger__ = None):
        super().__init__(logger)
        __dropout_mask__((1,), rate, False, None, logger)
        self.rate: float = rate
        self.freeze_mask: bool = False
        self.mask: __Optional__[Tensor] = None

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        if training and self.freeze_mask and self.mask is not None:
            mask = self.mask
        else:
            mask = __dropout_mask__(x.shape, self.rate, training, rng, self.logger)
        if store:
            self.mask = mask
            self.cache = (mask,)
        return x if mask is None else x * mask

    def backward(self, grad_out):
        (mask,) = self.__require_cache__()
        return grad_out if mask is None else grad_out * mask

    def __repr__(self):
        return "Dropout({r})".format(r=self.rate)


class Flatten(Layer):
    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        if store:
            self.cache = (x.shape,)
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        (shape,) = self.__require_cache__()
        return grad_out.reshape(shape)


class Reshape(Layer):
    """
    Reshape every sample to ``target_shape`` (batch axis kept).
    """

    def __init__(self, target_shape: tuple, logger: __Logger__ = None):
        super().__init__(logger)
        self.target_shape: tuple = tuple(target_shape)

    def forward(self, x, training=False, rng=None, store=True):
        x = __as_tensor__(x)
        if int(__np__.prod(x.shape[1:])) != int(__np__.prod(self.target_shape)):
            raise bis_rating_bench.LoggedDimensionError(
                self.logger,
                "Cannot reshape samples of shape {s} to {t}.".format(
                    s=x.shape[1:], t=self.target_shape
                ),
            )
        if store:
            self.cache = (x.shape,)
        return x.reshape((x.shape[0],) + self.target_shape)

    def backward(self, grad_out):
        (shape,) = self.__require_cache__()
        return grad_out.reshape(shape)

    def __repr__(self):
        return "Reshape({t})".format(t=self.target_shape)


# ----------------------------------------------------
# Network
# ----------------------------------------------------


class Network:
    """
    A stack of layers applied in order; the last layer emits logits.

    :param layers: (Sequence[Layer]): Layers in forward order.
    :param input_shape: (tuple): Shape of one sample, without the batch axis.
    :param logger: (logging.Logger): Logger for logging.
    """

    def __init__(self, layers: __Sequence__[Layer], input_shape: tuple, logger: __Logger__ = None):
        self.layers: __List__[Layer] = list(layers)
        self.input_shape: tuple = tuple(input_shape)
        self.logger = logger
        self.__forward_done__: bool = False

    def forward(self, x: Tensor, training: bool = False, rng=None) -> Tensor:
        out: Tensor = __as_tensor__(x)
        for layer in self.layers:
            out = layer.forward(out, training=training, rng=rng)
        self.__forward_done__ = True
        return out

    def backward(self, loss_gradient: Tensor, accumulate: bool = False) -> Tensor:
        """
        Propagate the gradient of the loss w.r.t. the logits back to the input.

        :param loss_gradient: (np.ndarray): Gradient w.r.t. the last forward output.
        :param accumulate: (bool): Add to existing gradients instead of resetting them.
        :return: (np.ndarray): Gradient w.r.t. the network input.
        """
        if not self.__forward_done__:
            raise bis_rating_bench.LoggedStateError(
                self.logger, "Network.backward called before forward."
            )
        if not accumulate:
            self.zero_grad()
        grad: Tensor = __as_tensor__(loss_gradient)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> __List__[LayerParams]:
        return [layer.params for layer in self.layers if layer.params is not None]

    def zero_grad(self):
        for params in self.parameters():
            params.zero_grad()

    def parameter_count(self) -> int:
        return sum(params.size for params in self.parameters())

    def state(self) -> __List__[__Tuple__[Tensor, Tensor]]:
        return [(p.weights.copy(), p.biases.copy()) for p in self.parameters()]

    def load_state(self, state: __List__[__Tuple__[Tensor, Tensor]]):
        for params, (weights, biases) in zip(self.parameters(), state):
            params.weights[...] = weights
            params.biases[...] = biases

    def predict_proba(self, x: Tensor, batch_size: int = 256) -> Tensor:
        """
        Class probabilities in inference mode. Does not touch layer caches.
        """
        x = __as_tensor__(x)
        chunks: list = []
        for start in range(0, x.shape[0], batch_size):
            out: Tensor = x[start : start + batch_size]
            for layer in self.layers:
                out = layer.forward(out, training=False, store=False)
            chunks.append(__np__.exp(__kernels__.log_softmax(out)))
        if not chunks:
            return __np__.zeros((0, 0))
        return __np__.concatenate(chunks, axis=0)

    def predict(self, x: Tensor, batch_size: int = 256) -> __np__.ndarray:
        # np.argmax keeps the lowest index on ties
        return __np__.argmax(self.predict_proba(x, batch_size), axis=1)

    def __repr__(self):
        return "Network([{layers}])".format(layers=", ".join(repr(layer) for layer in self.layers))


def backward(network: Network, loss_gradient: Tensor) -> __List__[LayerParams]:
    """
    Exact reverse-mode gradients of every parameter for the last forward pass.

    :param network: (Network): Network on which forward was run.
    :param loss_gradient: (np.ndarray): Gradient of the loss w.r.t. the network output.
    :return: (List[LayerParams]): Parameters with freshly computed gradients.
    """
    network.backward(loss_gradient)
    return network.parameters()


def sgd_update(params: LayerParams, learning_rate: float, logger: __Logger__ = None) -> LayerParams:
    """
    Plain gradient step p <- p - lr * g using the accumulated gradients.

    :param params: (LayerParams): Parameters to update in place.
    :param learning_rate: (float): Step size.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (LayerParams): The updated parameters.
    """
    params.check_shapes(logger)
    params.weights -= learning_rate * params.weights_grad
    params.biases -= learning_rate * params.biases_grad
    return params


# ----------------------------------------------------
# Training
# ----------------------------------------------------


class NetworkBuilder(__Protocol__):
    """
    Anything that can build a fresh network, e.g. a model_zoo.ModelSpec.
    """

    n_classes: int

    def build(self, rng: __np__.random.Generator, dropout_rate: float, logger: __Logger__ = None) -> Network:
        ...


@dataclass
class TrainingHistory:
    """
    Per-epoch record of one training run.
    """

    train_loss: __List__[float] = field(default_factory=list)
    monitor_loss: __List__[float] = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0
    stopped_early: bool = False
    fit_accuracy: float = float("nan")
    monitor_accuracy: float = float("nan")
    monitor_indices: __np__.ndarray = field(default_factory=lambda: __np__.zeros(0, dtype=int))


def carve_monitor_split(
    n_samples: int, fraction: float, rng: __np__.random.Generator
) -> __Tuple__[__np__.ndarray, __np__.ndarray]:
    """
    Split training indices into a fitting part and an early-stop monitor part.

    :param n_samples: (int): Number of training samples.
    :param fraction: (float): Monitor share.
    :param rng: (np.random.Generator): Source of the permutation.
    :return: (tuple): (sorted fit indices, sorted monitor indices); monitor is empty below 2 samples.
    """
    if n_samples < 2:
        return __np__.arange(n_samples), __np__.zeros(0, dtype=int)
    n_monitor: int = min(max(1, int(__np__.floor(n_samples * fraction + 0.5))), n_samples - 1)
    order: __np__.ndarray = rng.permutation(n_samples)
    return __np__.sort(order[n_monitor:]), __np__.sort(order[:n_monitor])


def __accuracy__(network: Network, x: Tensor, y: __np__.ndarray) -> float:
    if len(y) == 0:
        return float("nan")
    return float(__np__.mean(network.predict(x) == y))


def __loss_of__(network: Network, x: Tensor, y: __np__.ndarray, logger) -> float:
    logits: list = []
    for start in range(0, x.shape[0], 256):
        out: Tensor = x[start : start + 256]
        for layer in network.layers:
            out = layer.forward(out, training=False, store=False)
        logits.append(out)
    return softmax_cross_entropy(__np__.concatenate(logits), y, logger).value


def train(
    spec: NetworkBuilder,
    features: Tensor,
    labels: __Sequence__[int],
    config: TrainConfig,
    logger: __Logger__ = None,
) -> __Tuple__[Network, TrainingHistory]:
    """
    Mini-batch SGD with dropout and early stopping.

    A monitor split of ``config.early_stop_fraction`` is carved from the training
    data; training halts after ``early_stop_patience`` epochs without monitor-loss
    improvement and the parameters of the best monitor epoch are returned. Every
    random choice derives from ``config.rng_seed``.

    :param spec: (NetworkBuilder): Architecture to build, e.g. a ModelSpec.
    :param features: (np.ndarray): Training inputs, first axis is the sample axis.
    :param labels: (Sequence[int]): Class index per sample.
    :param config: (TrainConfig): Hyperparameters.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (tuple): (trained network, training history).
    """
    logger = __logger_or_mock__(logger)
    x: Tensor = __as_tensor__(features)
    y: __np__.ndarray = __np__.asarray(labels, dtype=__np__.int64).reshape(-1)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise bis_rating_bench.LoggedDataError(logger, "Cannot train on an empty data set.")
    if x.shape[0] != y.shape[0]:
        raise bis_rating_bench.LoggedDimensionError(
            logger, "Got {n} labels for {m} samples.".format(n=y.shape[0], m=x.shape[0])
        )
    bad: __np__.ndarray = __np__.flatnonzero((y < 0) | (y >= spec.n_classes))
    if bad.size:
        raise bis_rating_bench.LoggedLabelError(
            logger,
            "Label {label} at index {index} is outside [0, {k}).".format(
                label=int(y[bad[0]]), index=int(bad[0]), k=spec.n_classes
            ),
        )

    init_rng, split_rng, shuffle_rng, dropout_rng = [
        __np__.random.default_rng(s)
        for s in __np__.random.SeedSequence(int(config.rng_seed)).spawn(4)
    ]
    network: Network = spec.build(init_rng, config.dropout_rate, logger)
    fit_idx, monitor_idx = carve_monitor_split(x.shape[0], config.early_stop_fraction, split_rng)
    watch_x, watch_y = (x[monitor_idx], y[monitor_idx]) if monitor_idx.size else (x[fit_idx], y[fit_idx])

    history = TrainingHistory(monitor_indices=monitor_idx)
    best_loss: float = __loss_of__(network, watch_x, watch_y, logger)
    best_state = network.state()
    epochs_since_best: int = 0

    for epoch in range(1, int(config.max_epochs) + 1):
        order: __np__.ndarray = shuffle_rng.permutation(fit_idx)
        epoch_loss: float = 0.0
        for start in range(0, order.size, config.batch_size):
            batch: __np__.ndarray = order[start : start + config.batch_size]
            logits: Tensor = network.forward(x[batch], training=True, rng=dropout_rng)
            loss: LossValue = softmax_cross_entropy(logits, y[batch], logger)
            if not __np__.isfinite(loss.value):
                raise bis_rating_bench.LoggedNumericError(
                    logger, "Training loss became non-finite in epoch {e}.".format(e=epoch)
                )
            network.backward(loss.gradient)
            for params in network.parameters():
                sgd_update(params, config.learning_rate, logger)
            epoch_loss += loss.value * batch.size

        monitor_loss: float = __loss_of__(network, watch_x, watch_y, logger)
        if not __np__.isfinite(monitor_loss):
            raise bis_rating_bench.LoggedNumericError(
                logger, "Monitor loss became non-finite in epoch {e}.".format(e=epoch)
            )
        history.train_loss.append(epoch_loss / max(order.size, 1))
        history.monitor_loss.append(monitor_loss)
        history.epochs_run = epoch
        logger.debug(
            "epoch {e}: train loss {t:.6f}, monitor loss {m:.6f}".format(
                e=epoch, t=history.train_loss[-1], m=monitor_loss
            )
        )

        if monitor_loss < best_loss:
            best_loss = monitor_loss
            best_state = network.state()
            history.best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if config.early_stop_patience and epochs_since_best >= config.early_stop_patience:
                history.stopped_early = True
                logger.info(
                    "Early stop after epoch {e}; best monitor epoch {b}.".format(
                        e=epoch, b=history.best_epoch
                    )
                )
                break

    network.load_state(best_state)
    history.fit_accuracy = __accuracy__(network, x[fit_idx], y[fit_idx])
    history.monitor_accuracy = __accuracy__(network, watch_x, watch_y)
    return network, history


@dataclass
class GridSearchResult:
    """
    Outcome of :func:`grid_search`.

    :param best_spec: Selected candidate.
    :param best_index: (int): Position of the selected candidate in the grid.
    :param scores: (pd.DataFrame): One row per candidate, in grid order.
    :param models: (list): Trained network per candidate.
    """

    best_spec: object
    best_index: int
    scores: __pd__.DataFrame
    models: list


def grid_search(
    spec_grid: __Sequence__[NetworkBuilder],
    features: Tensor,
    labels: __Sequence__[int],
    config: TrainConfig,
    labels_of_candidates: __Sequence__[str] = None,
    logger: __Logger__ = None,
) -> GridSearchResult:
    """
    Train every candidate with the same config and pick the best monitor accuracy.
    Ties go to the candidate listed first.

    :param spec_grid: (Sequence[NetworkBuilder]): Candidates in grid order.
    :param features: (np.ndarray): Training inputs.
    :param labels: (Sequence[int]): Training labels.
    :param config: (TrainConfig): Hyperparameters shared by all candidates.
    :param labels_of_candidates: (Sequence[str]): Display label per candidate.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (GridSearchResult): Selected candidate and the full score table.
    """
    logger = __logger_or_mock__(logger)
    candidates: list = list(spec_grid)
    if not candidates:
        raise bis_rating_bench.LoggedValueError(logger, "Grid search needs at least one candidate.")
    names: list = (
        [str(name) for name in labels_of_candidates]
        if labels_of_candidates is not None
        else [str(i) for i in range(len(candidates))]
    )

    rows: list = []
    models: list = []
    for name, candidate in zip(names, candidates):
        network, history = train(candidate, features, labels, config, logger)
        models.append(network)
        rows.append(
            {
                "candidate": name,
                "monitor_accuracy": history.monitor_accuracy,
                "train_accuracy": history.fit_accuracy,
                "epochs": history.epochs_run,
            }
        )
        logger.info(
            "Grid candidate {n}: monitor accuracy {a:.4f}".format(n=name, a=history.monitor_accuracy)
        )

    scores: __pd__.DataFrame = __pd__.DataFrame(rows)
    best_index: int = int(__np__.argmax(scores["monitor_accuracy"].to_numpy()))
    return GridSearchResult(
        best_spec=candidates[best_index], best_index=best_index, scores=scores, models=models
    )


# ----------------------------------------------------
# Finite-difference verification
# ----------------------------------------------------


def numerical_gradient(
    function: __Callable__[[], float], array: Tensor, step: float = 1e-5
) -> Tensor:
    """
    Central finite differences of a scalar function w.r.t. every entry of ``array``.
    The array is perturbed in place and restored.

    :param function: (Callable): Evaluates the scalar, reading ``array``.
    :param array: (np.ndarray): Array to perturb.
    :param step: (float): Perturbation size.
    :return: (np.ndarray): Gradient estimate of the array's shape.
    """
    gradient: Tensor = __np__.zeros_like(array)
    flat = array.reshape(-1)
    flat_gradient = gradient.reshape(-1)
    for index in range(flat.size):
        original: float = flat[index]
        flat[index] = original + step
        upper: float = function()
        flat[index] = original - step
        lower: float = function()
        flat[index] = original
        flat_gradient[index] = (upper - lower) / (2.0 * step)
    return gradient


def relative_error(analytic: Tensor, numeric: Tensor, floor: float = 1e-4) -> float:
    """
    Largest elementwise |a - n| / max(|a|, |n|, floor).
    """
    denominator = __np__.maximum(__np__.maximum(__np__.abs(analytic), __np__.abs(numeric)), floor)
    if analytic.size == 0:
        return 0.0
    return float(__np__.max(__np__.abs(analytic - numeric) / denominator))


def check_layer_gradients(
    layer: Layer, x: Tensor, rng: __np__.random.Generator, step: float = 1e-5
) -> __Dict__[str, float]:
    """
    Compare a layer's backward pass with central finite differences of the
    random projection loss sum(forward(x) * R).

    Dropout layers should have ``freeze_mask`` set so repeated forwards agree.

    :param layer: (Layer): Layer under test.
    :param x: (np.ndarray): Batched input.
    :param rng: (np.random.Generator): Source of the projection R.
    :param step: (float): Finite-difference step.
    :return: (Dict[str, float]): Relative error for "input" and, when present, "weights" and "biases".
    """
    x = __as_tensor__(x).copy()
    out: Tensor = layer.forward(x, training=True, rng=rng)
    projection: Tensor = rng.standard_normal(out.shape)
    if layer.params is not None:
        layer.params.zero_grad()
    analytic_x: Tensor = layer.backward(projection)

    def loss() -> float:
        return float(__np__.sum(layer.forward(x, training=True, rng=rng, store=False) * projection))

    errors: __Dict__[str, float] = {
        "input": relative_error(analytic_x, numerical_gradient(loss, x, step))
    }
    if layer.params is not None:
        errors["weights"] = relative_error(
            layer.params.weights_grad, numerical_gradient(loss, layer.params.weights, step)
        )
        errors["biases"] = relative_error(
            layer.params.biases_grad, numerical_gradient(loss, layer.params.biases, step)
        )
    return errors
