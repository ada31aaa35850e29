import numpy as np
import pytest

from schedlab.datasets import BlobSpec, Dataset, SpiralSpec, blob_centers, make_blobs, make_spirals


def test_blob_shapes_and_labels():
    ds = make_blobs(BlobSpec(classes=4, per_class=50, seed=1))
    assert ds.inputs.shape == (200, 2)
    assert ds.labels.shape == (200,)
    assert ds.inputs.dtype == np.float64
    assert ds.labels.dtype == np.int64
    assert ds.n == 200
    counts = np.bincount(ds.labels, minlength=4)
    assert list(counts) == [50, 50, 50, 50]


def test_blob_splits_share_centers_but_not_points():
    spec = BlobSpec(classes=3, per_class=2000, center_spread=5.0, noise=0.5, seed=11)
    train = make_blobs(spec, "train")
    test = make_blobs(spec, "test")
    assert not np.array_equal(train.inputs, test.inputs)
    centers = blob_centers(spec)
    for split in (train, test):
        for k in range(3):
            mean = split.inputs[split.labels == k].mean(axis=0)
            # noise 0.5 over 2000 points: standard error ~ 0.011
            assert np.allclose(mean, centers[k], atol=0.08)


def test_blob_determinism():
    spec = BlobSpec(classes=3, per_class=10, seed=5)
    a = make_blobs(spec)
    b = make_blobs(spec)
    assert np.array_equal(a.inputs, b.inputs)
    assert np.array_equal(a.labels, b.labels)


def test_blob_seed_changes_centers():
    c1 = blob_centers(BlobSpec(seed=1))
    c2 = blob_centers(BlobSpec(seed=2))
    assert not np.array_equal(c1, c2)


def test_zero_noise_blobs_sit_on_centers():
    spec = BlobSpec(classes=2, per_class=5, noise=0.0, seed=3)
    ds = make_blobs(spec)
    centers = blob_centers(spec)
    assert np.array_equal(ds.inputs, centers[ds.labels])


@pytest.mark.parametrize("kwargs", [
    dict(classes=1), dict(per_class=0), dict(center_spread=0.0), dict(noise=-0.1),
])
def test_blob_spec_validation(kwargs):
    with pytest.raises(ValueError):
        BlobSpec(**kwargs)


def test_spiral_shapes():
    ds = make_spirals(SpiralSpec(per_class=40, seed=2))
    assert ds.inputs.shape == (80, 2)
    assert set(ds.labels.tolist()) == {0, 1}
    assert list(np.bincount(ds.labels)) == [40, 40]


def test_noiseless_spirals_lie_on_parametric_arcs():
    spec = SpiralSpec(per_class=200, noise=0.0, turns=1.75, seed=9)
    ds = make_spirals(spec)
    radii = np.hypot(ds.inputs[:, 0], ds.inputs[:, 1])
    assert np.all((radii >= 0.2 - 1e-12) & (radii <= 1.0 + 1e-12))
    u = (radii - 0.2) / 0.8
    theta = 2.0 * np.pi * spec.turns * u + ds.labels * np.pi
    rebuilt = np.stack([radii * np.cos(theta), radii * np.sin(theta)], axis=1)
    assert np.allclose(rebuilt, ds.inputs, rtol=0.0, atol=1e-12)


def test_spiral_classes_are_half_turn_apart():
    spec = SpiralSpec(per_class=500, noise=0.0, seed=4)
    ds = make_spirals(spec)
    b = ds.inputs[ds.labels == 1]
    # rotating class 1 by pi must land it on class 0's arc
    rotated = -b
    radii = np.hypot(rotated[:, 0], rotated[:, 1])
    u = (radii - 0.2) / 0.8
    theta = 2.0 * np.pi * spec.turns * u
    rebuilt = np.stack([radii * np.cos(theta), radii * np.sin(theta)], axis=1)
    assert np.allclose(rebuilt, rotated, atol=1e-12)


def test_spiral_splits_differ():
    spec = SpiralSpec(per_class=30, seed=8)
    assert not np.array_equal(make_spirals(spec, "train").inputs,
                              make_spirals(spec, "test").inputs)


def test_split_name_is_validated():
    with pytest.raises(ValueError):
        make_blobs(BlobSpec(), "validation")


@pytest.mark.parametrize("kwargs", [
    dict(per_class=0), dict(noise=-1.0), dict(turns=0.0),
])
def test_spiral_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SpiralSpec(**kwargs)


def test_dataset_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2, dtype=np.int64), "train", None)
    with pytest.raises(ValueError):
        Dataset(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), "train", None)
