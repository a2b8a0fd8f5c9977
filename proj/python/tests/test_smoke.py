import json
import math

import numpy as np
import pytest

import regionlift as rl


def test_scalar_laws():
    assert rl.alpha(0.0) == 0.5
    assert abs(rl.alpha(1.3) + rl.alpha(-1.3) - 1.0) < 1e-12
    assert rl.rescore_feature_dim(20) == 46
    assert rl.spm_dimension(2, 10240) == 184320
    assert abs(rl.interpolated_ap([(0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3)]) - 28 / 33) < 1e-12


def test_support_set():
    boxes = [(0, 0, 10, 10, 0.9, 0), (5, 0, 15, 10, 0.5, 1)]
    higher = rl.support_set(boxes, 20, 20)
    assert higher["background_area"] == 400 - 150
    assert [b["support_area"] for b in higher["boxes"]] == [250 + 100, 250 + 50]
    lower = rl.support_set(boxes, 20, 20, orientation="lower")
    assert [b["support_area"] for b in lower["boxes"]] == [250 + 50, 250 + 100]
    with pytest.raises(ValueError):
        rl.support_set(boxes, 20, 20, orientation="sideways")


def test_llc():
    rng = np.random.default_rng(0)
    centers = rng.normal(size=(8, 4))
    code = rl.llc_encode(rng.normal(size=4), centers, neighbors=3)
    assert code.shape == (8,)
    assert np.count_nonzero(code) <= 3
    assert abs(code.sum() - 1.0) < 1e-9
    assert np.allclose(rl.llc_encode(centers[2], centers, 3, 0.0), np.eye(8)[2])


def test_svm_xor():
    x = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=float)
    y = [-1, -1, 1, 1]
    model = rl.train_svm(x, y, kernel="rbf", C=10.0, gamma=1.0)
    assert all(model.score(list(p)) * t > 0 for p, t in zip(x, y))


def test_pipeline(tmp_path):
    train, test = tmp_path / "train", tmp_path / "test"
    rl.simulate(3, str(train), images=30, prefix="tr")
    rl.simulate(4, str(test), images=30, prefix="te")
    model = tmp_path / "m.rlm"
    rl.train_model(str(train / "annotations.jsonl"), str(model), seed=1, config={"codebook_size": 32})

    ann, dets = str(test / "annotations.jsonl"), str(test / "detections.jsonl")
    flat = rl.run(ann, dets, str(model), str(tmp_path / "flat"), config={"fusion_weight": 0.0})
    assert flat["output"]["mean_ap"] == flat["baseline"]["mean_ap"]
    assert flat["baseline"]["mean_ap"] == rl.evaluate(ann, dets)["mean_ap"]

    a = rl.run(ann, dets, str(model), str(tmp_path / "a"))
    b = rl.run(ann, dets, str(model), str(tmp_path / "b"))
    assert a == b
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert json.loads((tmp_path / "a" / "config.json").read_text())["seed"] == 1
    assert math.isfinite(a["output"]["mean_ap"])


def test_errors(tmp_path):
    with pytest.raises(RuntimeError):
        rl.evaluate(str(tmp_path / "missing.jsonl"), str(tmp_path / "d.jsonl"))
    with pytest.raises(ValueError):
        rl.train_svm(np.zeros((2, 2)), [1, 1])
    with pytest.raises(ValueError):
        rl.train_model("a", str(tmp_path / "m.rlm"), seed=1, config={"no_such_key": 1})
