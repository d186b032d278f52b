import csv
import json

import numpy as np
import pytest

from audio.infrastructure.wav_codec import write_wav_pcm16
from audio.models import AudioClip
from cli.config import PipelineConfig, load_pipeline_config
from cli.manifest import read_manifest, write_manifest
from core.exceptions import ConfigError, EmptyManifestError, ManifestError
from embeddings.infrastructure.storage import load_embeddings
from embeddings.models import ManifestEntry
from main import main

MANIFEST_HEADER = "path,speaker_id,utterance_id,emotion,sentence_id,split\n"


def run(tmp_path, *argv: str) -> int:
    return main(
        [*argv, "--ledger-url", f"sqlite:///{tmp_path}/runs.db", "--log-dir", str(tmp_path / "logs")]
    )


def tone(seconds: float, freq: float = 220.0, rate: int = 22050) -> AudioClip:
    t = np.arange(int(seconds * rate)) / rate
    return AudioClip(samples=0.5 * np.sin(2 * np.pi * freq * t), sample_rate=rate)


@pytest.fixture
def wav_manifest(tmp_path):
    """Three WAV files, one of them shorter than an analysis frame."""
    audio = tmp_path / "audio"
    audio.mkdir()
    write_wav_pcm16(tone(1.2), audio / "a.wav")
    write_wav_pcm16(tone(1.1, 330.0), audio / "b.wav")
    write_wav_pcm16(tone(0.5), audio / "c.wav")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(
        MANIFEST_HEADER
        + "audio/a.wav,s1,u1,ANG,IEO,\n"
        + "audio/b.wav,s1,u2,Neutral,IEO,\n"
        + "audio/c.wav,s2,u3,sad,,\n",
        encoding="utf-8",
    )
    return manifest


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Default synthetic corpus written through the synth command, as CSV."""
    root = tmp_path_factory.mktemp("corpus")
    path = root / "corpus.csv"
    assert run(root, "synth", "-o", str(path), "--manifest", str(root / "synth_manifest.csv")) == 0
    return path


def test_config_precedence(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"gamma": 0.5, "seed": 3, "first_class": "neu"}), encoding="utf-8")

    config = load_pipeline_config(path, {"seed": 9, "C": None})

    assert config.gamma == 0.5
    assert config.seed == 9
    assert config.C == 1000.0
    assert config.first_class == "Neutral"
    assert config.train_params().seed == 9


def test_config_errors(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"gama": 0.5}), encoding="utf-8")

    with pytest.raises(ConfigError):
        load_pipeline_config(path)
    with pytest.raises(ConfigError):
        load_pipeline_config(overrides={"first_class": "Bored"})
    with pytest.raises(ConfigError):
        load_pipeline_config(overrides={"C": -1.0})


def test_config_hash_tracks_values():
    assert PipelineConfig().config_hash == PipelineConfig().config_hash
    assert PipelineConfig().config_hash != PipelineConfig(gamma=0.2).config_hash
    assert PipelineConfig(n_jobs=1).config_hash == PipelineConfig(n_jobs=4).config_hash


def test_manifest_parsing(wav_manifest):
    entries = read_manifest(wav_manifest)

    assert [e.emotion for e in entries] == ["Angry", "Neutral", "Sad"]
    assert entries[0].path == str(wav_manifest.parent / "audio" / "a.wav")
    assert entries[2].sentence_id is None


@pytest.mark.parametrize(
    "body",
    [
        "audio/a.wav,s1,u1,ANG,,\naudio/b.wav,s1,u1,SAD,,\n",
        "audio/a.wav,s1,u1,Bored,,\n",
        "audio/a.wav,s1,u1,ANG,,validation\n",
        "audio/a.wav,s1,,ANG,,\n",
    ],
)
def test_manifest_errors(tmp_path, body):
    path = tmp_path / "manifest.csv"
    path.write_text(MANIFEST_HEADER + body, encoding="utf-8")

    with pytest.raises(ManifestError):
        read_manifest(path)


def test_manifest_empty_and_missing_columns(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(MANIFEST_HEADER, encoding="utf-8")
    no_emotion = tmp_path / "no_emotion.csv"
    no_emotion.write_text("path,speaker_id,utterance_id\nx,s,u\n", encoding="utf-8")

    with pytest.raises(EmptyManifestError):
        read_manifest(empty)
    with pytest.raises(ManifestError):
        read_manifest(no_emotion)


def test_write_manifest_round_trip(tmp_path):
    entries = [ManifestEntry("/data/a.wav", "s1", "u1", "Angry", "IEO", "train")]

    assert read_manifest(write_manifest(entries, tmp_path / "m.csv")) == entries


def test_extract_skips_short_utterances(tmp_path, wav_manifest):
    output = tmp_path / "out.emb"

    assert run(tmp_path, "extract", str(wav_manifest), "-o", str(output)) == 0

    rows = load_embeddings(output)
    assert [row.utterance_id for row in rows] == ["u1", "u2"]
    assert rows[0].dim == 256
    skipped = json.loads(output.with_suffix(".skipped.json").read_text())
    assert skipped["n_discarded"] == 1
    assert skipped["skipped"][0]["utterance_id"] == "u3"
    assert skipped["skipped"][0]["reason"] == "TooShort"

    first = output.read_bytes()
    assert run(tmp_path, "extract", str(wav_manifest), "-o", str(output)) == 0
    assert output.read_bytes() == first


def test_extract_empty_manifest_fails(tmp_path, capsys):
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(MANIFEST_HEADER, encoding="utf-8")

    assert run(tmp_path, "extract", str(manifest), "-o", str(tmp_path / "out.emb")) == 1

    assert not (tmp_path / "out.emb").exists()
    assert run(tmp_path, "history") == 0
    assert "failed" in capsys.readouterr().out


def test_synth_writes_corpus_and_manifest(corpus):
    rows = load_embeddings(corpus)
    manifest = read_manifest(corpus.parent / "synth_manifest.csv")

    assert len(rows) == 300
    assert len(manifest) == 300
    assert manifest[0].path == str(corpus.resolve())


def test_train_hierarchical_bundle(tmp_path, corpus):
    bundle = tmp_path / "bundle"

    assert run(tmp_path, "train", str(corpus), "--head", "hierarchical", "-o", str(bundle)) == 0

    assert (bundle / "stage1.svm").exists() and (bundle / "stage2.svm").exists()
    manifest = json.loads((bundle / "manifest.json").read_text())
    assert manifest["first_class"] == "Sad"
    report = json.loads((bundle / "train_report.json").read_text())
    assert report["params"]["C"] == 1000.0
    assert report["params"]["gamma"] == 0.1
    assert report["class_counts"] == {"Angry": 40, "Sad": 40, "Happy": 40, "Neutral": 40, "Fear": 40, "Disgust": 40}
    assert len(report["train_speakers"]) == 8


def test_train_evaluate_and_predict(tmp_path, corpus):
    bundle = tmp_path / "flat"
    report_path = tmp_path / "eval" / "report.json"
    predictions = tmp_path / "predictions.csv"

    assert run(tmp_path, "train", str(corpus), "-o", str(bundle), "--seed", "0") == 0
    assert run(tmp_path, "evaluate", str(bundle), str(corpus), "-o", str(report_path)) == 0
    assert run(tmp_path, "predict", str(bundle), str(corpus), "-o", str(predictions)) == 0

    report = json.loads(report_path.read_text())
    assert report["accuracy"] >= 0.9
    assert report["n_evaluated"] == 2 * 4 * 5
    assert "detection_accuracy" in report["extra"]
    assert report_path.with_suffix(".confusion.csv").exists()
    with predictions.open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 300
    assert {row["predicted"] for row in rows} <= {"Angry", "Sad", "Happy", "Neutral"}


def test_detector_evaluation(tmp_path, corpus):
    bundle = tmp_path / "detector"
    report_path = tmp_path / "detector.json"

    assert run(tmp_path, "train", str(corpus), "--head", "detector", "-o", str(bundle)) == 0
    assert run(tmp_path, "evaluate", str(bundle), str(corpus), "-o", str(report_path), "--all") == 0

    report = json.loads(report_path.read_text())
    assert report["confusion"]["classes"] == ["Neutral", "EmotionPresent"]
    assert report["n_evaluated"] == 200


def test_matchscore_command(tmp_path, corpus):
    out = tmp_path / "matchscore"

    assert run(tmp_path, "matchscore", str(corpus), "-o", str(out)) == 0

    stats = json.loads((out / "box_stats.json").read_text())
    assert len(stats["kinds"]) == 17
    assert stats["no_eligible_pairs"] == []
    assert (out / "scores.csv").exists()


def test_benchmark_command(tmp_path, corpus, capsys):
    out = tmp_path / "bench"

    assert run(tmp_path, "benchmark", str(corpus), "-o", str(out)) == 0

    text = (out / "results.txt").read_text()
    for name in ("Nearest centroid", "SVM", "HC (Sad-First)", "Detector"):
        assert name in text
    payload = json.loads((out / "benchmark.json").read_text())
    assert payload["params"]["C"] == 1000.0
    assert "HC (Sad-First)" in capsys.readouterr().out


def test_failed_command_is_recorded(tmp_path, corpus, capsys):
    assert run(tmp_path, "train", str(corpus), "--head", "hierarchical", "-o", str(tmp_path / "b"), "--first-class", "Fear") == 1
    assert run(tmp_path, "history", "--limit", "1") == 0

    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert "train" in line and "failed" in line


def test_same_seed_reproduces_every_artifact(tmp_path):
    """Two synth, train and evaluate runs with one seed write identical bytes."""
    outputs = []
    for name, n_jobs in (("first", "1"), ("second", "2")):
        root = tmp_path / name
        root.mkdir()
        corpus = root / "corpus.emb"
        bundle = root / "bundle"
        report = root / "report.json"
        seed = ("--seed", "11", "--n-jobs", n_jobs)

        assert run(root, "synth", "-o", str(corpus), *seed) == 0
        assert run(root, "train", str(corpus), "--head", "hierarchical", "-o", str(bundle), *seed) == 0
        assert run(root, "evaluate", str(bundle), str(corpus), "-o", str(report), *seed) == 0

        files = [corpus, report, report.with_suffix(".confusion.csv"), *sorted(bundle.iterdir())]
        outputs.append({path.relative_to(root).as_posix(): path.read_bytes() for path in files})

    first, second = outputs
    assert {"bundle/manifest.json", "bundle/stage1.svm", "bundle/stage2.svm"} <= set(first)
    assert first == second


def test_unopenable_ledger_keeps_the_artifact(tmp_path):
    output = tmp_path / "corpus.emb"
    ledger = f"sqlite:///{tmp_path}/missing/runs.db"

    status = main(["synth", "-o", str(output), "--ledger-url", ledger, "--log-dir", str(tmp_path / "logs")])

    assert status == 0
    assert output.exists()
    assert not (tmp_path / "missing").exists()
