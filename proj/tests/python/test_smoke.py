"""Smoke tests for the python bindings and (when available) the CLI."""

import math
import os
import subprocess

import numpy as np
import pytest

import supreme


def small_synth(seed=3, shift=1.0):
    return supreme.SynthesisConfig(
        dim=8,
        k_source=3,
        k_target=3,
        per_class=40,
        separation=8.0,
        within_std=1.0,
        domain_shift=shift,
        seed=seed,
    )


def test_dataset_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    features = rng.normal(size=(12, 5)).astype(np.float32).astype(np.float64)
    ds = supreme.EmbeddingDataset(features, labels=[i % 3 for i in range(12)], k=3,
                                  domain=supreme.Domain.source)
    path = tmp_path / "ds.emb"
    supreme.write_dataset(ds, path)
    back = supreme.read_dataset(path)
    assert np.array_equal(back.features, features)
    assert back.labels == [i % 3 for i in range(12)]
    assert back.k == 3


def test_bad_magic_raises(tmp_path):
    path = tmp_path / "junk.emb"
    path.write_bytes(b"XXXX")
    with pytest.raises(ValueError, match="bad magic"):
        supreme.read_dataset(path)


def test_synthesis_is_deterministic():
    pair_a = supreme.synthesize_transfer_pair(small_synth())
    pair_b = supreme.synthesize_transfer_pair(small_synth())
    assert np.array_equal(pair_a.source.features, pair_b.source.features)
    assert pair_a.target_labels == pair_b.target_labels
    assert not pair_a.target.labelled


def test_kmeans_recovers_separated_clusters():
    pair = supreme.synthesize_transfer_pair(small_synth())
    _, assignment, inertia = supreme.kmeans(pair.target.features, 3, seed=7)
    assert inertia > 0
    assert supreme.clustering_accuracy(assignment, pair.target_labels) >= 0.99


def test_loss_closed_forms():
    p = np.array([[1.0, 0.0], [0.5, 0.5]])
    assert supreme.balance_loss(p) == pytest.approx(
        math.log(2) + 0.75 * math.log(0.75) + 0.25 * math.log(0.25), abs=1e-9
    )
    assert supreme.binary_loss(np.full((3, 4), 0.5)) == pytest.approx(math.log(2), abs=1e-12)
    assert supreme.source_xent(np.full((2, 5), 0.2), [0, 4]) == pytest.approx(
        math.log(5), abs=1e-12
    )


def test_pairwise_constraints_and_confidence():
    p = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    r = supreme.pair_constraints(p)
    assert r[0, 1] == pytest.approx(1.0)
    assert r[0, 2] == pytest.approx(0.0)
    entropy, entropy_max, weights = supreme.confidence_weights(p, tau=0.5)
    assert entropy_max == pytest.approx(math.log(4))
    off_diag = weights.sum() - np.trace(weights)
    assert off_diag == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diag(weights) == 1.0)


def test_hungarian_and_nmi():
    perm, cost = supreme.hungarian(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert perm == [0, 1]
    assert cost == 0.0
    assert supreme.nmi([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)
    assert supreme.nmi([0, 1, 0, 1], [0, 0, 1, 1]) == pytest.approx(0.0)


def test_perturb_identity_and_flip():
    batch = np.array([[1.0, 2.0, 3.0]])
    assert np.array_equal(supreme.perturb("none", batch), batch)
    flipped = supreme.perturb("flip:3:1", batch)
    assert np.array_equal(flipped, np.array([[3.0, 2.0, 1.0]]))


def test_model_forward_shapes():
    cfg = supreme.ModelConfig(input_dim=8, encoder_widths=[12, 6], factor_dim=8, k_source=3,
                              k_target=3, seed=1)
    model = supreme.HeadModel(cfg)
    batch = np.zeros((5, 8))
    x_v, x_a, p = model.forward_target(batch)
    assert x_v.shape == (5, 6)
    assert x_a.shape == (5, 8)
    assert p.shape == (5, 3)
    assert np.allclose(p.sum(axis=1), 1.0)


def test_pipeline_end_to_end(tmp_path):
    cfg = supreme.RunConfig()
    cfg.set(
        {
            "out_dir": str(tmp_path),
            "synth_dim": "8",
            "synth_k_source": "3",
            "synth_k_target": "3",
            "synth_per_class": "100",
            "synth_separation": "8",
            "synth_within_std": "1",
            "synth_shift": "1",
            "synth_seed": "5",
            "seed": "5",
            "epochs": "30",
            "batch_size": "16",
            "encoder_widths": "12,8",
        }
    )
    source, target, target_labelled = supreme.run_synth(cfg)
    cfg.set({"source": str(source), "target": str(target)})
    _, accuracy = supreme.run_pretrain(cfg)
    assert accuracy > 0.9

    init = supreme.run_init(cfg)
    assert init["inertia"] > 0

    cfg.set({"epochs": "10"})
    train = supreme.run_train(cfg)
    assert train["checkpoint"].exists()

    cfg.set({"target": str(target_labelled), "checkpoint": str(train["checkpoint"])})
    acc, nmi_value = supreme.run_eval(cfg)
    assert 0.0 <= acc <= 1.0
    assert 0.0 <= nmi_value <= 1.0
    assert acc >= 0.9  # easy, well-separated configuration


def test_labelled_target_is_quarantined(tmp_path):
    cfg = supreme.RunConfig()
    cfg.set(
        {
            "out_dir": str(tmp_path),
            "synth_dim": "8",
            "synth_k_source": "3",
            "synth_k_target": "3",
            "synth_per_class": "20",
            "synth_separation": "8",
            "synth_seed": "9",
            "seed": "9",
            "epochs": "2",
            "batch_size": "16",
        }
    )
    source, _, target_labelled = supreme.run_synth(cfg)
    cfg.set({"source": str(source), "target": str(target_labelled)})
    supreme.run_pretrain(cfg)
    supreme.run_init(cfg)
    with pytest.raises(ValueError, match="eval-labels"):
        supreme.run_train(cfg)
    cfg.set({"eval_labels": "true"})
    out = supreme.run_train(cfg)
    assert "acc" in out


CLI = os.environ.get("SUPREME_CLI")


@pytest.mark.skipif(not CLI or not os.path.exists(CLI), reason="CLI binary not available")
class TestCli:
    def test_missing_dataset_exits_2(self, tmp_path):
        proc = subprocess.run(
            [CLI, "pretrain", "--source", "/nonexistent.emb", "--target", "/nonexistent.emb",
             "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "/nonexistent.emb" in proc.stderr

    def test_unknown_flag_exits_2(self):
        proc = subprocess.run([CLI, "synth", "--no-such-flag"], capture_output=True, text=True)
        assert proc.returncode == 2

    def test_full_run_and_eval_output(self, tmp_path):
        def run(*args):
            proc = subprocess.run([CLI, *args], capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            return proc.stdout

        run("synth", "--out", str(tmp_path), "--dim", "8", "--k-source", "3", "--k-target", "3",
            "--per-class", "30", "--separation", "8", "--within-std", "1", "--shift", "1",
            "--seed", "3", "--csv")
        assert (tmp_path / "source.csv").exists()
        run("pretrain", "--source", str(tmp_path / "source.emb"), "--target",
            str(tmp_path / "target.emb"), "--out", str(tmp_path), "--epochs", "30",
            "--batch-size", "16", "--seed", "3")
        run("init", "--target", str(tmp_path / "target.emb"), "--out", str(tmp_path),
            "--seed", "3")
        run("train", "--source", str(tmp_path / "source.emb"), "--target",
            str(tmp_path / "target.emb"), "--out", str(tmp_path), "--epochs", "5",
            "--batch-size", "16", "--seed", "3")
        out = run("eval", "--target", str(tmp_path / "target_labelled.emb"), "--checkpoint",
                  str(tmp_path / "final.sup1"), "--out", str(tmp_path))
        first_line = out.strip().splitlines()[0]
        acc, nmi_value = (float(x) for x in first_line.split(","))
        assert 0.0 <= acc <= 1.0
        assert 0.0 <= nmi_value <= 1.0

    def test_oracle_spot_checks(self):
        proc = subprocess.run([CLI, "--oracle"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "hungarian" in proc.stdout
