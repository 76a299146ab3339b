import numpy as np
import pytest

from freqhide.classifier import (downsample_features, run_utility,
                                 score_predictions, train_probe)
from freqhide.errors import ValidationError
from freqhide.toydata import make_class_image


class TestFeatures:
    def test_block_average_known_values(self):
        img = np.arange(16.0).reshape(1, 4, 4)
        feats = downsample_features(img, grid=2)
        assert feats.shape == (4,)
        assert feats[0] == pytest.approx((0 + 1 + 4 + 5) / 4.0)
        assert feats[3] == pytest.approx((10 + 11 + 14 + 15) / 4.0)

    def test_non_divisible_sizes(self):
        img = np.random.default_rng(0).random((3, 13, 9))
        feats = downsample_features(img, grid=4)
        assert feats.shape == (3 * 16,)
        assert np.all(np.isfinite(feats))

    def test_too_small_rejected(self):
        with pytest.raises(ValidationError):
            downsample_features(np.zeros((1, 4, 4)), grid=8)


class TestScore:
    def test_perfect_predictions(self):
        y = np.array([0, 1, 0, 1])
        m = score_predictions(y, y, 2)
        assert m.accuracy == 1.0
        assert m.precision == 1.0
        assert m.recall == 1.0
        assert m.f1 == 1.0

    def test_hand_computed_confusion(self):
        y_true = np.array([0, 0, 0, 1, 1])
        y_pred = np.array([0, 0, 1, 1, 0])
        m = score_predictions(y_true, y_pred, 2)
        assert m.accuracy == pytest.approx(3 / 5)
        # class 0: P=2/3, R=2/3; class 1: P=1/2, R=1/2
        assert m.precision == pytest.approx((2 / 3 + 1 / 2) / 2)
        assert m.recall == pytest.approx((2 / 3 + 1 / 2) / 2)
        f1_0 = 2 * (2 / 3) * (2 / 3) / (2 / 3 + 2 / 3)
        f1_1 = 2 * (1 / 2) * (1 / 2) / (1 / 2 + 1 / 2)
        assert m.f1 == pytest.approx((f1_0 + f1_1) / 2)

    def test_f1_is_per_class_harmonic_mean(self):
        # degenerate predictor: everything class 0
        y_true = np.array([0, 0, 1, 1])
        y_pred = np.array([0, 0, 0, 0])
        m = score_predictions(y_true, y_pred, 2)
        # class 0: P=0.5, R=1 -> F1=2/3; class 1: P=R=F1=0
        assert m.f1 == pytest.approx((2 / 3) / 2)
        assert 0.0 <= m.precision <= 1.0
        assert 0.0 <= m.recall <= 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            score_predictions(np.array([]), np.array([]), 2)


class TestProbe:
    def test_separates_linear_classes(self):
        rng = np.random.default_rng(0)
        x0 = rng.normal(0.0, 0.3, (20, 4))
        x1 = rng.normal(2.0, 0.3, (20, 4))
        x = np.vstack([x0, x1])
        labels = ["lo"] * 20 + ["hi"] * 20
        probe = train_probe(x, labels)
        pred = probe.predict(x)
        want = np.array([probe.classes.index(l) for l in labels])
        assert (pred == want).mean() == 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        x = rng.random((10, 3))
        labels = ["a", "b"] * 5
        a = train_probe(x, labels)
        b = train_probe(x, labels)
        assert np.array_equal(a.weights, b.weights)

    def test_single_class_rejected(self):
        with pytest.raises(ValidationError):
            train_probe(np.zeros((4, 2)), ["same"] * 4)

    def test_constant_feature_does_not_blow_up(self):
        x = np.hstack([np.random.default_rng(2).random((8, 2)),
                       np.full((8, 1), 3.0)])
        probe = train_probe(x, ["a", "b"] * 4)
        assert np.all(np.isfinite(probe.weights))


class TestRunUtility:
    @staticmethod
    def toy_images(n_per_class=8, size=(32, 32)):
        images, labels = [], []
        for label in ("a", "b"):
            for i in range(n_per_class):
                images.append(make_class_image(label, i, size=size, seed=0))
                labels.append(label)
        return images, labels

    def test_learns_toy_classes(self):
        images, labels = self.toy_images()
        result = run_utility(images[::2] + images[1::2], labels[::2] + labels[1::2],
                             images, labels, trained_on="secret")
        assert result.trained_on == "secret"
        assert result.splits["test"].accuracy > 0.9
        for split in ("train", "test"):
            m = result.splits[split]
            for v in (m.accuracy, m.precision, m.recall, m.f1):
                assert 0.0 <= v <= 1.0

    def test_empty_split_rejected(self):
        images, labels = self.toy_images(2)
        with pytest.raises(ValidationError):
            run_utility([], [], images, labels)

    def test_unknown_test_label_rejected(self):
        images, labels = self.toy_images(2)
        with pytest.raises(ValidationError):
            run_utility(images, labels, images[:1], ["zzz"])
