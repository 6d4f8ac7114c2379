import gzip
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from alc import model
from alc.cli import main, read_config_file
from alc.data import load_dataset, write_idx_images, write_idx_labels
from alc.errors import ConfigError, IntegrityError, ParameterError
from alc.fetch import RemoteFile, dataset_available, fetch_dataset, sha256_of


def run_cli(*argv):
    return main(list(argv))


# ---------------------------------------------------------------------------
# config file parsing


def test_read_config_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# comment\n"
        "dataset = iris\n"
        "lobules = 8\n"
        "epochs = 40   # inline comment\n"
        "standardize = false\n"
        "seed = 5\n"
    )
    values = read_config_file(path)
    assert values == {
        "dataset": "iris",
        "lobules": 8,
        "epochs": 40,
        "standardize": False,
        "seed": 5,
    }


def test_read_config_file_rejects_unknown_key(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("learning_rate = 0.1\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        read_config_file(path)


def test_read_config_file_rejects_bad_value(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("epochs = soon\n")
    with pytest.raises(ConfigError):
        read_config_file(path)


def test_read_config_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "none.cfg")


# ---------------------------------------------------------------------------
# subcommands


def test_crossval_command_writes_reports(tmp_path, capsys):
    code = run_cli(
        "crossval", "--dataset", "iris", "--epochs", "15", "--agents", "3",
        "--folds", "3", "--out-dir", str(tmp_path),
    )
    assert code == 0
    out_dir = tmp_path / "crossval_iris"
    assert (out_dir / "mean.csv").exists()
    assert "accuracy=" in capsys.readouterr().out


def test_crossval_with_config_file_and_override(tmp_path, capsys):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("dataset = iris\nepochs = 12\nagents = 3\nk_folds = 3\n")
    code = run_cli(
        "crossval", "--config", str(cfg_file), "--epochs", "8",
        "--out-dir", str(tmp_path),
    )
    assert code == 0
    history = (tmp_path / "crossval_iris" / "history.csv").read_text().splitlines()
    # 3 folds x 8 epochs of history rows plus the header: the flag override won
    assert len(history) == 1 + 3 * 8


def test_crossval_lobule_grid(tmp_path, capsys):
    code = run_cli(
        "crossval", "--dataset", "iris", "--epochs", "10", "--agents", "3",
        "--folds", "3", "--lobule-grid", "4,6", "--out-dir", str(tmp_path),
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "lobules=4" in out and "selected lobules=" in out


def test_config_error_exit_code(tmp_path, capsys):
    code = run_cli(
        "crossval", "--dataset", "iris", "--folds", "1", "--out-dir", str(tmp_path)
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_missing_dataset_exit_code(capsys):
    assert run_cli("crossval") == 2


def test_unknown_dataset_ingest_path(tmp_path, capsys):
    code = run_cli("crossval", "--dataset", "unknown", "--out-dir", str(tmp_path))
    assert code == 2  # rejected while building the config, before ingestion


def test_ablate_command(tmp_path, capsys):
    code = run_cli(
        "ablate", "--dataset", "iris", "--epochs", "8", "--agents", "3",
        "--folds", "3", "--out-dir", str(tmp_path),
    )
    assert code == 0
    lines = (tmp_path / "ablation_iris" / "ablation.csv").read_text().splitlines()
    assert len(lines) == 6  # header plus five variants
    out = capsys.readouterr().out
    assert "identity-vitamin needs lobules == classes" in out


def test_optbench_command(tmp_path, capsys):
    code = run_cli(
        "optbench", "--functions", "F4,F10", "--optimizers", "ifox,fox",
        "--runs", "2", "--epochs", "10", "--agents", "3",
        "--out-dir", str(tmp_path),
    )
    assert code == 0
    out_dir = tmp_path / "optbench"
    assert (out_dir / "stats.csv").exists()
    assert (out_dir / "ranks.csv").exists()
    assert (out_dir / "history_F4_fox.csv").exists()
    text = capsys.readouterr().out
    assert "total rank" in text


def test_predict_round_trip(tmp_path):
    ds = load_dataset("iris")
    rng = np.random.default_rng(0)
    params = model.AlcParams(
        4, 6, 3, rng.uniform(-1, 1, (4, 6)), rng.uniform(-1, 1, (6, 3))
    )
    model_path = tmp_path / "model.json"
    model.save_model(
        params, {"seed": 1, "epochs": 1, "agents": 2, "dataset_id": "iris"}, model_path
    )
    csv_path = tmp_path / "features.csv"
    header = ",".join(ds.feature_names)
    rows = [",".join(repr(float(v)) for v in row) for row in ds.x[:12]]
    csv_path.write_text(header + "\n" + "\n".join(rows) + "\n")
    out_path = tmp_path / "labels.txt"
    code = run_cli(
        "predict", "--model", str(model_path), "--data", str(csv_path),
        "--out", str(out_path),
    )
    assert code == 0
    predicted = [int(v) for v in out_path.read_text().split()]
    expected = model.predict(ds.x[:12], params).tolist()
    assert predicted == expected


def test_predict_feature_count_mismatch(tmp_path, capsys):
    params = model.AlcParams(2, 3, 2, np.zeros((2, 3)), np.zeros((3, 2)))
    model_path = tmp_path / "m.json"
    model.save_model(params, {"seed": 0, "epochs": 1, "agents": 2, "dataset_id": "x"}, model_path)
    csv_path = tmp_path / "f.csv"
    csv_path.write_text("a,b,c\n1,2,3\n")
    assert run_cli("predict", "--model", str(model_path), "--data", str(csv_path)) == 3


def test_predict_bad_model_file(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    csv_path = tmp_path / "f.csv"
    csv_path.write_text("a\n1\n")
    assert run_cli("predict", "--model", str(bad), "--data", str(csv_path)) == 1


# ---------------------------------------------------------------------------
# fetch


def test_fetch_bundled_is_noop(capsys):
    assert run_cli("fetch", "iris") == 0
    assert "ships with the package" in capsys.readouterr().out


def test_fetch_unknown_dataset(capsys):
    assert run_cli("fetch", "imagenet") == 2


def _file_registry(tmp_path, payload, sha=None, gzipped=False):
    source = tmp_path / ("src.gz" if gzipped else "src.bin")
    if gzipped:
        source.write_bytes(gzip.compress(payload))
    else:
        source.write_bytes(payload)
    digest = sha if sha is not None else hashlib.sha256(source.read_bytes()).hexdigest()
    return {
        "testset": [
            RemoteFile(
                url=source.as_uri(),
                filename=source.name,
                sha256=digest,
                gzipped=gzipped,
            )
        ]
    }


def test_fetch_verifies_checksum_and_decompresses(tmp_path):
    registry = _file_registry(tmp_path, b"hello idx world", gzipped=True)
    dest = tmp_path / "cache"
    paths = fetch_dataset("testset", dest_dir=dest, registry=registry, log=lambda *_: None)
    assert paths[0].name == "src"
    assert paths[0].read_bytes() == b"hello idx world"


def test_fetch_checksum_mismatch_removes_file(tmp_path):
    registry = _file_registry(tmp_path, b"payload", sha="0" * 64)
    dest = tmp_path / "cache"
    with pytest.raises(IntegrityError):
        fetch_dataset("testset", dest_dir=dest, registry=registry, log=lambda *_: None)
    assert not (dest / "testset" / "src.bin").exists()


def test_fetch_skips_existing(tmp_path, capsys):
    registry = _file_registry(tmp_path, b"payload")
    dest = tmp_path / "cache"
    messages = []
    fetch_dataset("testset", dest_dir=dest, registry=registry, log=messages.append)
    fetch_dataset("testset", dest_dir=dest, registry=registry, log=messages.append)
    assert any("already present" in m for m in messages)


def test_fetch_unpinned_checksum_warns(tmp_path):
    source = tmp_path / "voice.csv"
    source.write_bytes(b"label\nx\n")
    registry = {
        "testset": [RemoteFile(url=source.as_uri(), filename="voice.csv", sha256=None)]
    }
    messages = []
    fetch_dataset("testset", dest_dir=tmp_path / "c", registry=registry, log=messages.append)
    assert any("no pinned checksum" in m for m in messages)


def test_sha256_of(tmp_path):
    path = tmp_path / "f.bin"
    path.write_bytes(b"abc")
    assert sha256_of(path) == hashlib.sha256(b"abc").hexdigest()


def test_dataset_available_for_synthetic_mnist(tmp_path, monkeypatch):
    monkeypatch.setenv("ALC_DATA_DIR", str(tmp_path))
    assert not dataset_available("mnist")
    root = tmp_path / "mnist"
    root.mkdir()
    rng = np.random.default_rng(1)
    write_idx_images(root / "train-images-idx3-ubyte", rng.integers(0, 255, (40, 4, 4), dtype=np.uint8))
    write_idx_labels(root / "train-labels-idx1-ubyte", np.arange(40) % 10)
    write_idx_images(root / "t10k-images-idx3-ubyte", rng.integers(0, 255, (20, 4, 4), dtype=np.uint8))
    write_idx_labels(root / "t10k-labels-idx1-ubyte", np.arange(20) % 10)
    assert dataset_available("mnist")
    ds = load_dataset("mnist")
    assert ds.n_samples == 60
    assert ds.n_features == 16
    assert ds.n_classes == 10


def test_mnist_pipeline_end_to_end_on_synthetic_digits(tmp_path, monkeypatch):
    """Subsample + discriminant projection + crossval, as the image config runs it."""
    from alc.experiments import default_config, run_crossval

    monkeypatch.setenv("ALC_DATA_DIR", str(tmp_path))
    root = tmp_path / "mnist"
    root.mkdir()
    rng = np.random.default_rng(2)
    labels_train = np.arange(400) % 10
    labels_test = np.arange(100) % 10
    # class-dependent mean pixels so the projection has signal to find
    imgs_train = (rng.integers(0, 100, (400, 6, 6)) + labels_train[:, None, None] * 12).astype(np.uint8)
    imgs_test = (rng.integers(0, 100, (100, 6, 6)) + labels_test[:, None, None] * 12).astype(np.uint8)
    write_idx_images(root / "train-images-idx3-ubyte", imgs_train)
    write_idx_labels(root / "train-labels-idx1-ubyte", labels_train)
    write_idx_images(root / "t10k-images-idx3-ubyte", imgs_test)
    write_idx_labels(root / "t10k-labels-idx1-ubyte", labels_test)

    cfg = default_config("mnist", epochs=20, agents=3, k_folds=3, subsample=200, lobules=12)
    result = run_crossval(cfg, dataset=load_dataset("mnist"))
    assert cfg.lda_dims == 9
    assert result.models[0].n_features == 9
    assert len(result.folds) == 3
