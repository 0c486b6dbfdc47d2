"""End-to-end checks of the command-line surface via dispatch()."""

import json

import numpy as np
import pytest

from razorkit.cli import dispatch
from razorkit.model import load_checkpoint, read_transactions
from razorkit.sgns import load_embeddings


@pytest.fixture(scope="module")
def market_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "market.tsv"
    code = dispatch([
        "synth", "--out", str(path), "--entities", "5", "--products", "2",
        "--transactions", "600", "--seed", "3",
    ])
    assert code == 0
    return path


def test_help_exits_zero(capsys):
    assert dispatch(["--help"]) == 0
    assert "synth" in capsys.readouterr().out


def test_unknown_subcommand_is_usage_error(capsys):
    assert dispatch(["frobnicate"]) == 1
    assert dispatch([]) == 1


def test_unknown_flag_is_usage_error(capsys):
    assert dispatch(["razor", "--no-such-flag", "1"]) == 1


def test_missing_input_file_is_data_error(tmp_path, capsys):
    code = dispatch(["razor", "--pairs", str(tmp_path / "absent.tsv")])
    assert code == 2
    assert "razorkit: error:" in capsys.readouterr().err


def test_razor_prints_entropy(tmp_path, capsys):
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("0 1 1.0\n")
    assert dispatch(["razor", "--pairs", str(pairs)]) == 0
    assert float(capsys.readouterr().out.strip()) == 0.0


def test_razor_uniform_pair_value(tmp_path, capsys):
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("# two equally likely disjoint pairs\n"
                     "0 1 0.5\n2 3 0.5\n")
    assert dispatch(["razor", "--pairs", str(pairs)]) == 0
    value = float(capsys.readouterr().out.strip())
    assert value == pytest.approx(np.log(2.0), abs=1e-12)


def test_synth_is_deterministic(tmp_path, market_path):
    again = tmp_path / "again.tsv"
    code = dispatch([
        "synth", "--out", str(again), "--entities", "5", "--products", "2",
        "--transactions", "600", "--seed", "3",
    ])
    assert code == 0
    assert again.read_bytes() == market_path.read_bytes()

    other = tmp_path / "other.tsv"
    dispatch([
        "synth", "--out", str(other), "--entities", "5", "--products", "2",
        "--transactions", "600", "--seed", "4",
    ])
    assert other.read_bytes() != market_path.read_bytes()

    records = read_transactions(market_path)
    assert len(records) == 600


def test_synth_rejects_unknown_scheme(tmp_path, capsys):
    code = dispatch(["synth", "--out", str(tmp_path / "x.tsv"),
                     "--affinity", "banana"])
    assert code == 2
    assert "banana" in capsys.readouterr().err


@pytest.fixture(scope="module")
def graph_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("graph") / "graph.tsv"
    lines = ["# tiny barbell"]
    clique_a = [0, 1, 2, 3]
    clique_b = [4, 5, 6, 7]
    for group in (clique_a, clique_b):
        for i, u in enumerate(group):
            for v in group[i + 1:]:
                lines.append(f"{u} {v}")
    lines.append("3 4")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_walks_stream_shape(graph_path, capsys):
    code = dispatch([
        "walks", "--graph", str(graph_path), "--length", "10",
        "--walks-per-node", "2", "--seed", "1",
    ])
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 8 * 2
    starts = [int(line.split()[0]) for line in out]
    assert sorted(set(starts)) == list(range(8))
    for line in out:
        walk = [int(tok) for tok in line.split()]
        assert len(walk) == 10
        assert all(0 <= v < 8 for v in walk)


def test_embed_writes_loadable_vectors(graph_path, tmp_path):
    out = tmp_path / "emb.txt"
    code = dispatch([
        "embed", "--graph", str(graph_path), "--out", str(out),
        "--dim", "8", "--length", "20", "--walks-per-node", "4",
        "--epochs", "2", "--seed", "1",
    ])
    assert code == 0
    emb = load_embeddings(out)
    assert emb.shape == (8, 8)
    assert np.all(np.isfinite(emb))


def test_train_report_and_checkpoint(market_path, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    ckpt_path = tmp_path / "model.npz"
    code = dispatch([
        "train", "--data", str(market_path),
        "--out", str(report_path), "--checkpoint", str(ckpt_path),
        "--entity-dim", "4", "--product-dim", "2", "--day-dim", "1",
        "--hidden", "8", "--dropout", "0", "--batch-size", "256",
        "--patience", "10", "--max-epochs", "30", "--seed", "0",
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["schema"] == "razorkit-report-v1"
    assert report["command"] == "train"
    assert report["config"]["n_entities"] == 5
    assert report["config"]["n_products"] == 2
    assert report["epochs"] <= 30
    assert 0.0 < report["test_loss"] < np.log(5)
    assert report["marginal_baseline"] > 0.0

    params, config, features, stats = load_checkpoint(ckpt_path)
    assert config.n_entities == 5
    assert set(features) == set(report["features"])


def test_shapley_glove_game(tmp_path, capsys):
    game = tmp_path / "game.tsv"
    game.write_text("0 0.0\n1 0.0\n2 0.0\n3 1.0\n")
    assert dispatch(["shapley", "--game", str(game), "--exact"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["n"] == 2
    assert report["total"] == pytest.approx(1.0, abs=1e-12)
    assert report["exact_phi"] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_reliance_report_fields(market_path, tmp_path):
    report_path = tmp_path / "reliance.json"
    code = dispatch([
        "reliance", "--data", str(market_path), "--out", str(report_path),
        "--features", "entity,product", "--runs", "1", "--workers", "2",
        "--entity-dim", "4", "--product-dim", "2", "--day-dim", "1",
        "--hidden", "8", "--dropout", "0", "--batch-size", "256",
        "--patience", "8", "--max-epochs", "20", "--seed", "0",
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["command"] == "reliance"
    assert sorted(report["universe"]) == ["entity", "product"]
    assert sorted(report["sigma"]) == ["entity", "product"]
    assert len(report["phi"]) == 2
    assert report["evaluations"] <= 2 * 3 // 2 + 1
    assert "0" in report["subset_losses"]
    assert sum(report["phi"]) == pytest.approx(report["total_value"], abs=1e-9)


def test_tune_runs_trials(market_path, tmp_path):
    report_path = tmp_path / "tune.json"
    history_path = tmp_path / "history.tsv"
    code = dispatch([
        "tune", "--data", str(market_path), "--trials", "2",
        "--out", str(report_path), "--history", str(history_path),
        "--features", "entity", "--batch-size", "256",
        "--patience", "3", "--max-epochs", "5", "--seed", "0",
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["trials"] == 2
    assert np.isfinite(report["best_value"])
    assert "learning_rate" in report["best_assignment"]
    lines = history_path.read_text().strip().splitlines()
    assert lines[0].startswith("trial\t")
    assert len(lines) == 3


def test_ini_config_supplies_defaults_and_flags_override(tmp_path, capsys):
    ini = tmp_path / "razorkit.ini"
    ini.write_text(
        "[synth]\n"
        "entities = 4\n"
        "products = 2\n"
        "transactions = 50\n"
        "seed = 9\n"
    )
    from_ini = tmp_path / "from_ini.tsv"
    code = dispatch(["synth", "--config", str(ini), "--out", str(from_ini)])
    assert code == 0
    records = read_transactions(from_ini)
    assert len(records) == 50
    assert max(max(r.buyer, r.seller) for r in records) <= 3

    overridden = tmp_path / "overridden.tsv"
    code = dispatch(["synth", "--config", str(ini), "--out", str(overridden),
                     "--transactions", "20"])
    assert code == 0
    assert len(read_transactions(overridden)) == 20


def test_ini_config_rejects_unknown_key(tmp_path, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text("[synth]\nwibble = 3\n")
    code = dispatch(["synth", "--config", str(ini),
                     "--out", str(tmp_path / "x.tsv")])
    assert code == 2
    assert "wibble" in capsys.readouterr().err
