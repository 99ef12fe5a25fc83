"""Tests for datasets, the synthetic generator and the IDX loader."""

import csv
import struct

import numpy as np
import pytest

from reduce_sim.dataio.dataset import Dataset, Split, dataset_to_csv
from reduce_sim.dataio.idx import IMAGES_MAGIC, LABELS_MAGIC, load_idx
from reduce_sim.dataio.synthetic import synth_clusters
from reduce_sim.errors import (
    IdxCountMismatchError,
    IdxFormatError,
    IdxMagicError,
    IdxTruncatedError,
    LabelRangeError,
    ShapeMismatchError,
)


def write_images(path, images):
    images = np.asarray(images, dtype=np.uint8)
    header = struct.pack(">IIII", IMAGES_MAGIC, *images.shape)
    path.write_bytes(header + images.tobytes())
    return path


def write_labels(path, labels, magic=LABELS_MAGIC):
    labels = np.asarray(labels, dtype=np.uint8)
    path.write_bytes(struct.pack(">II", magic, labels.shape[0]) + labels.tobytes())
    return path


class TestDataset:
    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            Dataset(np.zeros((3, 2)), [0, 1], 2)

    def test_label_out_of_range(self):
        with pytest.raises(LabelRangeError):
            Dataset(np.zeros((2, 2)), [0, 2], 2)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[0.0, np.nan]]), [0], 2)

    def test_read_only(self):
        data = Dataset(np.zeros((2, 2)), [0, 1], 2)
        with pytest.raises(ValueError):
            data.inputs[0, 0] = 1.0

    def test_copies_caller_arrays(self):
        inputs = np.zeros((2, 2))
        data = Dataset(inputs, [0, 1], 2)
        inputs[0, 0] = 5.0
        assert data.inputs[0, 0] == 0.0

    def test_csv_dump(self, tmp_path):
        data = Dataset(np.array([[0.5, 1.0], [2.0, -1.0]]), [1, 0], 2, Split.TEST)
        path = tmp_path / "out" / "data.csv"
        dataset_to_csv(data, path)
        with path.open() as fh:
            rows = list(csv.reader(fh))
        assert rows == [["x0", "x1", "label"], ["0.5", "1.0", "1"], ["2.0", "-1.0", "0"]]


class TestSynthClusters:
    def test_split_sizes(self):
        train, test = synth_clusters(2, 4, 50, 1.0, seed=0)
        assert (len(train), len(test)) == (80, 20)
        assert train.split is Split.TRAIN and test.split is Split.TEST
        assert train.num_features == 4

    def test_test_split_balanced(self, cluster_data):
        _, test = cluster_data
        assert np.bincount(test.labels).tolist() == [8, 8, 8]

    def test_deterministic(self):
        a_train, a_test = synth_clusters(3, 5, 20, 0.5, seed=4)
        b_train, b_test = synth_clusters(3, 5, 20, 0.5, seed=4)
        np.testing.assert_array_equal(a_train.inputs, b_train.inputs)
        np.testing.assert_array_equal(a_test.labels, b_test.labels)

    def test_seed_sensitivity(self):
        a, _ = synth_clusters(3, 5, 20, 0.5, seed=4)
        b, _ = synth_clusters(3, 5, 20, 0.5, seed=5)
        assert not np.array_equal(a.inputs, b.inputs)

    def test_zero_spread_is_separable(self):
        train, test = synth_clusters(4, 3, 25, 0.0, seed=8)
        # with no spread every training sample sits on its class centre
        centers = np.stack([train.inputs[train.labels == k][0] for k in range(4)])
        assert np.ptp(train.inputs[train.labels == 0], axis=0).max() == 0.0
        distances = ((test.inputs[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assert (distances.argmin(axis=1) == test.labels).mean() == 1.0

    @pytest.mark.parametrize("args", [(0, 4, 10, 1.0), (2, 0, 10, 1.0), (2, 4, 0, 1.0), (2, 4, 10, -0.1)])
    def test_invalid_arguments(self, args):
        with pytest.raises(ValueError):
            synth_clusters(*args, seed=0)


class TestLoadIdx:
    def test_small_pair(self, tmp_path):
        images = np.arange(3 * 2 * 2, dtype=np.uint8).reshape(3, 2, 2)
        data = load_idx(
            write_images(tmp_path / "img.idx", images),
            write_labels(tmp_path / "lbl.idx", [2, 0, 1]),
            normalize=False,
        )
        assert len(data) == 3
        np.testing.assert_array_equal(data.inputs, images.reshape(3, 4).astype(float))
        assert data.labels.tolist() == [2, 0, 1]
        assert data.num_classes == 3

    def test_header_arithmetic(self, tmp_path):
        images = np.random.default_rng(0).integers(0, 256, size=(10, 28, 28))
        data = load_idx(
            write_images(tmp_path / "img.idx", images),
            write_labels(tmp_path / "lbl.idx", list(range(10))),
            split=Split.TEST,
        )
        assert len(data) == 10
        assert data.num_features == 784
        assert data.split is Split.TEST

    def test_normalize(self, tmp_path):
        images = np.array([[[0, 255], [51, 255]]])
        data = load_idx(write_images(tmp_path / "img.idx", images), write_labels(tmp_path / "lbl.idx", [0]))
        assert data.inputs[0, 1] == 1.0
        assert data.inputs[0, 2] == pytest.approx(0.2)
        assert data.inputs.min() >= 0.0 and data.inputs.max() <= 1.0

    def test_labels_with_image_magic(self, tmp_path):
        images = write_images(tmp_path / "img.idx", np.zeros((2, 2, 2)))
        labels = write_labels(tmp_path / "lbl.idx", [0, 1], magic=IMAGES_MAGIC)
        with pytest.raises(IdxMagicError):
            load_idx(images, labels)

    def test_truncated_payload(self, tmp_path):
        path = write_images(tmp_path / "img.idx", np.zeros((4, 3, 3)))
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(IdxTruncatedError):
            load_idx(path, write_labels(tmp_path / "lbl.idx", [0, 0, 0, 0]))

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "img.idx"
        path.write_bytes(struct.pack(">II", IMAGES_MAGIC, 4))
        with pytest.raises(IdxTruncatedError):
            load_idx(path, write_labels(tmp_path / "lbl.idx", [0]))

    def test_count_mismatch(self, tmp_path):
        images = write_images(tmp_path / "img.idx", np.zeros((3, 2, 2)))
        labels = write_labels(tmp_path / "lbl.idx", [0, 1])
        with pytest.raises(IdxCountMismatchError):
            load_idx(images, labels)

    def test_errors_share_a_base(self):
        assert issubclass(IdxMagicError, IdxFormatError)
        assert issubclass(IdxTruncatedError, IdxFormatError)
        assert not issubclass(IdxMagicError, IdxTruncatedError)
