import numpy as np
import pytest

import bis_rating_bench
from bis_rating_bench import model_zoo
from bis_rating_bench.model_zoo import ArchitectureName


def test_architecture_windows_and_parsing():
    assert ArchitectureName.MLP.window == 1
    assert ArchitectureName.CNN.window == 1
    assert ArchitectureName.CNN2D.window == 4
    assert ArchitectureName.LSTM.window == 4
    assert ArchitectureName.parse(" LSTM ") is ArchitectureName.LSTM
    with pytest.raises(bis_rating_bench.LoggedValueError):
        ArchitectureName.parse("transformer")


def test_mlp_published_widths():
    spec = model_zoo.make_mlp(332, 8)
    assert spec.layer_widths() == (332, 41, 41, 41, 8)
    assert model_zoo.make_mlp(20, 8, hidden_units=82).layer_widths() == (20, 82, 82, 82, 8)


def test_mlp_rejects_empty_hidden_stack():
    with pytest.raises(bis_rating_bench.LoggedValueError):
        model_zoo.make_mlp(10, 3, hidden_units=0)


def test_cnn_shapes():
    spec = model_zoo.make_cnn(332, 8)
    assert spec.conv_output_lengths() == (330, 328)
    assert spec.flatten_width() == 328 * 32
    assert spec.layer_widths() == (328 * 32, 128, 128, 8)
    with pytest.raises(bis_rating_bench.LoggedDimensionError):
        model_zoo.make_cnn(4, 3)


def test_cnn2d_same_padding_keeps_grid():
    spec = model_zoo.make_cnn2d(20, 5)
    assert spec.conv2d_output_shape() == (4, 20)
    assert spec.flatten_width() == 4 * 20 * 32
    with pytest.raises(bis_rating_bench.LoggedDimensionError):
        model_zoo.make_cnn2d(2, 5)


def test_lstm_head():
    spec = model_zoo.make_lstm(20, 5)
    assert spec.window == 4
    assert spec.layer_widths() == (32, 128, 128, 5)


@pytest.mark.parametrize("architecture", ["mlp", "cnn", "cnn2d", "lstm"])
def test_dry_run_with_full_feature_set(architecture):
    spec = model_zoo.make_model(architecture, 332, 8)
    assert spec.dry_run() == (1, 8)


@pytest.mark.parametrize("architecture", ["mlp", "cnn", "cnn2d", "lstm"])
def test_parameter_count_matches_built_network(architecture, rng):
    spec = model_zoo.make_model(architecture, 12, 3, hidden_units=7)
    assert spec.build(rng, 0.5).parameter_count() == spec.parameter_count()


def test_window_must_match_architecture():
    with pytest.raises(bis_rating_bench.LoggedValueError):
        model_zoo.ModelSpec(ArchitectureName.LSTM, input_features=5, window=1, n_classes=3, lstm_units=4)


def test_dropout_follows_each_hidden_dense_layer(rng):
    network = model_zoo.make_mlp(6, 3, hidden_units=4, hidden_layers=2).build(rng, 0.5)
    kinds = [type(layer).__name__ for layer in network.layers]
    assert kinds == ["Reshape", "Dense", "Dropout", "Dense", "Dropout", "Dense"]
    assert "Dropout" not in [type(layer).__name__ for layer in model_zoo.make_mlp(6, 3).build(rng, 0.0).layers]


def test_built_networks_predict_probabilities(rng):
    spec = model_zoo.make_cnn2d(6, 4)
    network = spec.build(rng, 0.5)
    probabilities = network.predict_proba(rng.standard_normal((3, 4, 6)))
    assert probabilities.shape == (3, 4)
    np.testing.assert_allclose(probabilities.sum(axis=1), 1.0, atol=1e-12)
