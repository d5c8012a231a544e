"""Smoke tests for the recap Python bindings."""

import numpy as np
import pytest

import recap


@pytest.fixture(scope="module")
def small_spec():
    return recap.ReservoirSpec(n_units=32, sparsity=0.5, steps=12, seed=11)


@pytest.fixture(scope="module")
def toy_data():
    rng = np.random.default_rng(5)
    archetypes = rng.uniform(0.0, 1.0, size=(10, 28, 28))
    images, labels = [], []
    for i in range(30):
        c = i % 10
        noisy = np.clip(archetypes[c] + rng.normal(0.0, 0.05, size=(28, 28)), 0.0, 1.0)
        images.append(noisy)
        labels.append(c)
    return np.stack(images), np.array(labels, dtype=np.int64)


def test_reservoir_rollout_is_deterministic_and_bounded(small_spec):
    reservoir = recap.Reservoir(small_spec)
    image = np.full(784, 0.5)
    a = reservoir.run_to_average(image)
    b = reservoir.run_to_average(image)
    assert np.array_equal(a, b)
    assert a.shape == (32,)
    assert np.all(np.abs(a) < 1.0)


def test_quantize_and_mask_match_numpy_reference(small_spec):
    reservoir = recap.Reservoir(small_spec)
    rng = np.random.default_rng(1)
    state = reservoir.run_to_average(rng.uniform(0.0, 1.0, size=784))
    levels = recap.quantize(state, recap.QuantizerSpec(levels=8))
    assert levels.dtype == np.uint16
    assert np.all(levels < 8)

    mask = recap.build_mask(levels, 8)
    dense = mask.to_dense()
    expected = (levels[:, None] == levels[None, :]) & ~np.eye(32, dtype=bool)
    assert np.array_equal(dense, expected)
    assert mask.popcount == int(expected.sum())
    assert mask.overlap(mask) == mask.popcount


def test_train_predict_save_load_roundtrip(tmp_path, toy_data, small_spec):
    images, labels = toy_data
    model = recap.train_recap(
        images,
        labels,
        reservoir_spec=small_spec,
        quantizer_spec=recap.QuantizerSpec(levels=8),
        hebb_spec=recap.HebbSpec(),
        threads=2,
    )
    predictions = model.predict_batch(images, threads=2)
    assert predictions.shape == (30,)
    accuracy = float(np.mean(predictions == labels))
    assert accuracy > 0.5  # far above 10% chance on separable toy data

    path = tmp_path / "model.rcap"
    model.save(str(path))
    restored = recap.load(str(path))
    again = restored.predict_batch(images, threads=2)
    assert np.array_equal(predictions, again)
    assert np.array_equal(model.scores(images[0].ravel()), restored.scores(images[0].ravel()))

    density = model.template_density(0)
    assert 0.0 <= density <= 1.0


def test_ridge_baseline_trains_and_roundtrips(tmp_path, toy_data, small_spec):
    images, labels = toy_data
    model = recap.train_ridge(images, labels, reservoir_spec=small_spec, threads=2)
    predictions = model.predict_batch(images, threads=2)
    assert float(np.mean(predictions == labels)) > 0.5
    path = tmp_path / "ridge.rcap"
    model.save(str(path))
    restored = recap.load(str(path))
    assert np.array_equal(predictions, restored.predict_batch(images, threads=2))


def test_corruptions_are_deterministic_and_in_range(toy_data):
    images, _ = toy_data
    assert len(recap.corruption_kinds()) == 15
    native = [k for k in recap.corruption_kinds() if recap.is_native_corruption(k)]
    assert len(native) == 11

    out1 = recap.corrupt(images, "gaussian_noise", 3, seed=9)
    out2 = recap.corrupt(images, "gaussian_noise", 3, seed=9)
    assert np.array_equal(out1, out2)
    assert out1.shape == images.shape
    assert out1.min() >= 0.0 and out1.max() <= 1.0
    assert not np.array_equal(out1, images)

    strengths = [recap.severity_strength("gaussian_noise", s) for s in range(1, 6)]
    assert strengths == sorted(strengths)
    with pytest.raises(ValueError):
        recap.corrupt(images, "fog", 1)


def test_metrics_self_normalize_to_exactly_one():
    table = recap.ErrorTable("model")
    table.set_clean(0.1)
    rng = np.random.default_rng(3)
    for kind in recap.corruption_kinds():
        for severity in range(1, 6):
            table.set_error(kind, severity, float(rng.uniform(0.0, 0.9)))
    value, excluded = recap.relative_mce(table, table)
    assert value == 1.0
    assert excluded == []
    assert recap.corruption_error(table, table, "snow") == 1.0
    assert recap.relative_ce(table, table, "snow") == 1.0
