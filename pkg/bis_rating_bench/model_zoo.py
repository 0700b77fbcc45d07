"""
Declarative specs for the four network architectures of the bench.

A :class:`ModelSpec` is an immutable description; :meth:`ModelSpec.build`
turns it into an :class:`bis_rating_bench.nn_core.Network` whose first layer
reshapes the (window, features) sample into the architecture's input layout.
"""

import enum as __enum__
from dataclasses import dataclass
from logging import Logger as __Logger__
from typing import Optional as __Optional__
from typing import Tuple as __Tuple__

import numpy as __np__

import bis_rating_bench
from bis_rating_bench import nn_core as __nn__

KERNEL_SIZE: int = 3
CONV_FILTERS: __Tuple__[int, int] = (64, 32)
DENSE_UNITS: __Tuple__[int, int] = (128, 128)
LSTM_UNITS: int = 32
TEMPORAL_WINDOW: int = 4


class ArchitectureName(__enum__.Enum):
    """
    The four network architectures. The value is the display name used in reports.
    """

    MLP = "mlp"
    CNN = "cnn"
    CNN2D = "cnn2d"
    LSTM = "lstm"

    @property
    def window(self) -> int:
        """
        Quarters consumed per sample: the current one for MLP/CNN, four for CNN2D/LSTM.
        """
        return TEMPORAL_WINDOW if self in (ArchitectureName.CNN2D, ArchitectureName.LSTM) else 1

    @classmethod
    def parse(cls, name, logger: __Logger__ = None) -> "ArchitectureName":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise bis_rating_bench.LoggedValueError(
                logger,
                "Unknown architecture '{n}', expected one of {opts}.".format(
                    n=name, opts=[a.value for a in cls]
                ),
            )


@dataclass(frozen=True)
class ModelSpec:
    """
    Immutable description of one network plus its training hyperparameters.

    :param architecture: (ArchitectureName): Which of the four architectures.
    :param input_features: (int): Features per quarter.
    :param window: (int): Quarters per sample.
    :param n_classes: (int): Number of rating classes.
    :param hidden_units: (tuple): MLP hidden widths.
    :param conv_filters: (tuple): Filters of the two convolution layers.
    :param kernel_size: (int): Convolution kernel size (both directions for CNN2D).
    :param conv_stride: (int): Convolution stride.
    :param dense_units: (tuple): Widths of the fully connected head of CNN/CNN2D/LSTM.
    :param lstm_units: (int): LSTM hidden size.
    :param pool_window: (int): Optional max-pooling window after each convolution, 0 for none.
    :param train_config: (TrainConfig): Training hyperparameters attached to the spec.
    """

    architecture: ArchitectureName
    input_features: int
    window: int
    n_classes: int
    hidden_units: __Tuple__[int, ...] = ()
    conv_filters: __Tuple__[int, ...] = ()
    kernel_size: int = KERNEL_SIZE
    conv_stride: int = 1
    dense_units: __Tuple__[int, ...] = ()
    lstm_units: int = 0
    pool_window: int = 0
    train_config: __Optional__[__nn__.TrainConfig] = None

    def __post_init__(self):
        expected_window: int = self.architecture.window
        if self.window != expected_window:
            raise bis_rating_bench.LoggedValueError(
                None,
                "{a} consumes {w} quarter(s) per sample, got window {g}.".format(
                    a=self.architecture.value, w=expected_window, g=self.window
                ),
            )
        widths: tuple = (self.input_features, self.n_classes) + tuple(self.hidden_units) + tuple(
            self.conv_filters
        ) + tuple(self.dense_units)
        if any(int(w) != w or w < 1 for w in widths):
            raise bis_rating_bench.LoggedValueError(
                None, "All layer widths must be positive integers, got {w}.".format(w=widths)
            )

    # ------------------------------------------------
    # Introspection
    # ------------------------------------------------

    def layer_widths(self) -> __Tuple__[int, ...]:
        """
        Widths of the fully connected stack from input to output.
        """
        if self.architecture is ArchitectureName.MLP:
            return (self.input_features,) + tuple(self.hidden_units) + (self.n_classes,)
        return (self.flatten_width(),) + tuple(self.dense_units) + (self.n_classes,)

    def conv_output_lengths(self) -> __Tuple__[int, ...]:
        """
        Output length after each valid 1-D convolution (and pooling, when enabled).
        """
        lengths: list = []
        length: int = self.input_features
        for _ in self.conv_filters:
            length = (length - self.kernel_size) // self.conv_stride + 1
            if self.pool_window:
                length = (length - self.pool_window) // self.pool_window + 1
            lengths.append(length)
        return tuple(lengths)

    def conv2d_output_shape(self) -> __Tuple__[int, int]:
        rows, cols = self.window, self.input_features
        for _ in self.conv_filters:
            rows = -(-rows // self.conv_stride)
            cols = -(-cols // self.conv_stride)
            if self.pool_window:
                rows = (rows - self.pool_window) // self.pool_window + 1
                cols = (cols - self.pool_window) // self.pool_window + 1
        return rows, cols

    def flatten_width(self) -> int:
        if self.architecture is ArchitectureName.CNN:
            return self.conv_output_lengths()[-1] * self.conv_filters[-1]
        if self.architecture is ArchitectureName.CNN2D:
            rows, cols = self.conv2d_output_shape()
            return rows * cols * self.conv_filters[-1]
        if self.architecture is ArchitectureName.LSTM:
            return self.lstm_units
        return self.input_features

    def parameter_count(self) -> int:
        """
        Closed-form number of trainable parameters.
        """
        count: int = 0
        if self.architecture is ArchitectureName.CNN:
            channels: int = 1
            for filters in self.conv_filters:
                count += self.kernel_size * channels * filters + filters
                channels = filters
        elif self.architecture is ArchitectureName.CNN2D:
            channels = 1
            for filters in self.conv_filters:
                count += self.kernel_size * self.kernel_size * channels * filters + filters
                channels = filters
        elif self.architecture is ArchitectureName.LSTM:
            units: int = self.lstm_units
            count += 4 * (units * (self.input_features + units) + units)
        widths: tuple = self.layer_widths()
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            count += fan_in * fan_out + fan_out
        return count

    # ------------------------------------------------
    # Construction
    # ------------------------------------------------

    def build(
        self, rng: __np__.random.Generator = None, dropout_rate: float = None, logger: __Logger__ = None
    ) -> __nn__.Network:
        """
        Build a freshly initialised network for (batch, window, input_features) inputs.

        :param rng: (np.random.Generator): Initialisation source; zero weights when None.
        :param dropout_rate: (float): Dropout after every hidden dense layer; the attached
            train config's rate when None.
        :param logger: (logging.Logger): Logger handed to the layers.
        :return: (Network): The network.
        """
        if dropout_rate is None:
            dropout_rate = self.train_config.dropout_rate if self.train_config else 0.0
        layers: list = []
        arch: ArchitectureName = self.architecture

        if arch is ArchitectureName.MLP:
            layers.append(__nn__.Reshape((self.input_features,), logger))
        elif arch is ArchitectureName.CNN:
            layers.append(__nn__.Reshape((self.input_features, 1), logger))
            channels: int = 1
            for filters in self.conv_filters:
                layers.append(
                    __nn__.Conv1D(channels, filters, self.kernel_size, self.conv_stride, rng=rng, logger=logger)
                )
                if self.pool_window:
                    layers.append(__nn__.MaxPool1D(self.pool_window, logger=logger))
                channels = filters
            layers.append(__nn__.Flatten(logger))
        elif arch is ArchitectureName.CNN2D:
            layers.append(__nn__.Reshape((self.window, self.input_features, 1), logger))
            channels = 1
            for filters in self.conv_filters:
                layers.append(
                    __nn__.Conv2D(
                        channels, filters, self.kernel_size, self.conv_stride, "same", rng=rng, logger=logger
                    )
                )
                if self.pool_window:
                    layers.append(__nn__.MaxPool2D(self.pool_window, logger=logger))
                channels = filters
            layers.append(__nn__.Flatten(logger))
        else:
            layers.append(__nn__.Reshape((self.window, self.input_features), logger))
            layers.append(__nn__.LSTM(self.input_features, self.lstm_units, rng=rng, logger=logger))

        widths: tuple = self.layer_widths()
        for fan_in, fan_out in zip(widths[:-2], widths[1:-1]):
            layers.append(__nn__.Dense(fan_in, fan_out, "relu", rng=rng, logger=logger))
            if dropout_rate:
                layers.append(__nn__.Dropout(dropout_rate, logger))
        layers.append(__nn__.Dense(widths[-2], widths[-1], "linear", rng=rng, logger=logger))
        return __nn__.Network(layers, (self.window, self.input_features), logger)

    def dry_run(self, logger: __Logger__ = None) -> __Tuple__[int, ...]:
        """
        Push one zero sample through a zero-initialised network.

        :return: (tuple): Output shape, (1, n_classes) for a consistent spec.
        """
        network: __nn__.Network = self.build(None, 0.0, logger)
        return network.forward(__np__.zeros((1, self.window, self.input_features))).shape

    def describe(self) -> str:
        if self.architecture is ArchitectureName.MLP:
            return "{a} {h}".format(a=self.architecture.value, h="-".join(str(w) for w in self.layer_widths()))
        return self.architecture.value


# ----------------------------------------------------
# Constructors
# ----------------------------------------------------


def make_mlp(
    input_features: int,
    n_classes: int,
    hidden_units: int = 41,
    hidden_layers: int = 3,
    train_config: __nn__.TrainConfig = None,
    logger: __Logger__ = None,
) -> ModelSpec:
    """
    Dense stack input -> hidden_layers x hidden_units (ReLU, dropout) -> softmax.

    :param input_features: (int): Features per quarter.
    :param n_classes: (int): Number of rating classes.
    :param hidden_units: (int): Width of each hidden layer.
    :param hidden_layers: (int): Number of hidden layers.
    :param train_config: (TrainConfig): Attached hyperparameters.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (ModelSpec): MLP spec.
    """
    if hidden_units < 1 or hidden_layers < 1:
        raise bis_rating_bench.LoggedValueError(
            logger,
            "MLP needs positive hidden_units and hidden_layers, got {u} and {l}.".format(
                u=hidden_units, l=hidden_layers
            ),
        )
    return ModelSpec(
        architecture=ArchitectureName.MLP,
        input_features=input_features,
        window=1,
        n_classes=n_classes,
        hidden_units=(hidden_units,) * hidden_layers,
        train_config=train_config,
    )


def make_cnn(
    input_features: int,
    n_classes: int,
    pool_window: int = 0,
    train_config: __nn__.TrainConfig = None,
    logger: __Logger__ = None,
) -> ModelSpec:
    """
    conv1d(64, 3) -> conv1d(32, 3) -> flatten -> dense 128 -> dense 128 -> softmax
    on one quarter treated as a length-``input_features`` single-channel signal.
    """
    spec = ModelSpec(
        architecture=ArchitectureName.CNN,
        input_features=input_features,
        window=1,
        n_classes=n_classes,
        conv_filters=CONV_FILTERS,
        dense_units=DENSE_UNITS,
        pool_window=pool_window,
        train_config=train_config,
    )
    if min(spec.conv_output_lengths()) < 1:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "CNN needs at least 5 input features for two size-3 convolutions, got {f}.".format(
                f=input_features
            ),
        )
    return spec


def make_cnn2d(
    input_features: int,
    n_classes: int,
    pool_window: int = 0,
    train_config: __nn__.TrainConfig = None,
    logger: __Logger__ = None,
) -> ModelSpec:
    """
    Two same-padded 3x3 convolutions (64, 32 filters) over the 4 x features grid
    of the most recent quarters, then dense 128 -> dense 128 -> softmax.
    """
    if input_features < KERNEL_SIZE:
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "CNN2D needs at least {k} input features, got {f}.".format(k=KERNEL_SIZE, f=input_features),
        )
    spec = ModelSpec(
        architecture=ArchitectureName.CNN2D,
        input_features=input_features,
        window=TEMPORAL_WINDOW,
        n_classes=n_classes,
        conv_filters=CONV_FILTERS,
        dense_units=DENSE_UNITS,
        pool_window=pool_window,
        train_config=train_config,
    )
    if min(spec.conv2d_output_shape()) < 1:
        raise bis_rating_bench.LoggedDimensionError(
            logger, "Pooling window {p} is too large for CNN2D input.".format(p=pool_window)
        )
    return spec


def make_lstm(
    input_features: int,
    n_classes: int,
    train_config: __nn__.TrainConfig = None,
    logger: __Logger__ = None,
) -> ModelSpec:
    """
    LSTM(32) over 4 quarters, final hidden state -> dense 128 -> dense 128 -> softmax.
    """
    return ModelSpec(
        architecture=ArchitectureName.LSTM,
        input_features=input_features,
        window=TEMPORAL_WINDOW,
        n_classes=n_classes,
        dense_units=DENSE_UNITS,
        lstm_units=LSTM_UNITS,
        train_config=train_config,
    )


def make_model(
    architecture,
    input_features: int,
    n_classes: int,
    hidden_units: int = 41,
    hidden_layers: int = 3,
    train_config: __nn__.TrainConfig = None,
    logger: __Logger__ = None,
) -> ModelSpec:
    """
    Dispatch to the constructor of ``architecture``.
    """
    arch: ArchitectureName = ArchitectureName.parse(architecture, logger)
    if arch is ArchitectureName.MLP:
        return make_mlp(input_features, n_classes, hidden_units, hidden_layers, train_config, logger)
    if arch is ArchitectureName.CNN:
        return make_cnn(input_features, n_classes, train_config=train_config, logger=logger)
    if arch is ArchitectureName.CNN2D:
        return make_cnn2d(input_features, n_classes, train_config=train_config, logger=logger)
    return make_lstm(input_features, n_classes, train_config, logger)
