import json
import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from sqlalchemy.exc import SQLAlchemyError

from cli.config import PipelineConfig
from cli.manifest import is_manifest, read_manifest, write_manifest
from core.config import settings
from core.database import get_session_factory
from core.exceptions import DimMismatchError, EmptyEvalError, EmptyInputError
from embeddings.infrastructure.backends import build_embedder
from embeddings.infrastructure.storage import load_embeddings, save_embeddings, save_embeddings_csv
from embeddings.models import ManifestEntry
from embeddings.service import EmbeddingService, ExtractionResult
from emotions.infrastructure.bundle import load_bundle, save_bundle
from emotions.models import FOUR_CLASS, SIX_CLASS, ClassifierHead, LabeledEmbedding
from emotions.service import EmotionClassifier, embedding_matrix, train_head
from evaluation.infrastructure.reports import (
    ResultsRow,
    format_class_f1_table,
    format_confusion,
    format_results_table,
    write_confusion_csv,
    write_report_json,
)
from evaluation.models import EvalReport, SplitSpec
from evaluation.service import (
    NearestCentroidClassifier,
    detection_report,
    evaluate,
    evaluate_classifier,
    make_split,
)
from matchscore.infrastructure.export import write_box_stats_json, write_scores_csv
from matchscore.service import run_matchscore_experiment, summarize
from runs.infrastructure.repository import RunsRepository
from runs.models import RunRecord
from synthlab.service import gen_synthetic_corpus

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    """
    Attributes:
        artifact (Path): Main output written by the command.
        summary (dict): Headline figures, recorded in the run ledger.
        text (str): Human-readable output printed by the front end.
    """

    artifact: Path
    summary: dict[str, Any] = field(default_factory=dict)
    text: str = ""


def write_rows(rows: Sequence[LabeledEmbedding], path: str | Path, dim: int | None = None) -> Path:
    """EMB1, or the CSV export when the suffix is `.csv`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".csv":
        save_embeddings_csv(rows, path)
    else:
        save_embeddings(rows, path, dim=dim)
    return path


def _write_json(payload: dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _class_counts(rows: Sequence[LabeledEmbedding]) -> dict[str, int]:
    counts = Counter(row.emotion for row in rows)
    return {label.value: counts[label] for label in SIX_CLASS if counts[label]}


class PipelineService:
    """
    Implements the pipeline commands on top of the domain packages. Every command
    is deterministic given its inputs and the configuration.
    """

    def __init__(self, config: PipelineConfig, sample_rate: int | None = None):
        self.config = config
        self.sample_rate = sample_rate or settings.NOMINAL_SAMPLE_RATE

    def _provenance(self) -> dict[str, Any]:
        return {"config_hash": self.config.config_hash, "seed": self.config.seed}

    def _extract(self, entries: Sequence[ManifestEntry]) -> ExtractionResult:
        embedder = build_embedder(self.config.embedder_config(), self.sample_rate)
        return EmbeddingService(embedder, n_jobs=self.config.n_jobs).extract(entries)

    def _split(
        self, rows: Sequence[LabeledEmbedding], spec: SplitSpec | None = None
    ) -> tuple[list[LabeledEmbedding], list[LabeledEmbedding]]:
        return make_split(rows, spec or self.config.split_spec())

    def extract(
        self, manifest_path: str | Path, output: str | Path, skip_report: str | Path | None = None
    ) -> CommandResult:
        """
        Embeds every manifest row and writes the surviving rows plus a skip report.

        :raises EmptyInputError: Every row failed; the skip report is still written.
        """
        entries = read_manifest(manifest_path)
        result = self._extract(entries)

        output = Path(output)
        skip_path = Path(skip_report) if skip_report else output.with_suffix(".skipped.json")
        _write_json(
            {
                "n_total": len(entries),
                "n_extracted": len(result.rows),
                "n_discarded": result.n_discarded,
                "skipped": [asdict(s) for s in result.skipped],
                **self._provenance(),
            },
            skip_path,
        )
        if not result.rows:
            raise EmptyInputError(f"no utterance of {manifest_path} could be embedded")

        write_rows(result.rows, output)
        summary = {
            "n_total": len(entries),
            "n_extracted": len(result.rows),
            "n_skipped": len(result.skipped),
            "n_discarded": result.n_discarded,
        }
        text = (
            f"Extracted {len(result.rows)} of {len(entries)} utterances "
            f"({len(result.skipped)} skipped) -> {output}"
        )
        return CommandResult(output, summary, text)

    def synth(self, output: str | Path, manifest: str | Path | None = None) -> CommandResult:
        """Generates the synthetic corpus; optionally writes a manifest pointing at it."""
        synth_config = self.config.synth_config()
        rows = gen_synthetic_corpus(synth_config, n_jobs=self.config.n_jobs)
        output = write_rows(rows, output, dim=synth_config.dim)

        if manifest:
            entries = [
                ManifestEntry(
                    path=str(output.resolve()),
                    speaker_id=row.speaker_id,
                    utterance_id=row.utterance_id,
                    emotion=row.emotion.value,
                    sentence_id=row.sentence_id,
                )
                for row in rows
            ]
            write_manifest(entries, manifest)

        summary = {"n_rows": len(rows), "synth": synth_config.to_dict()}
        return CommandResult(output, summary, f"Generated {len(rows)} synthetic rows -> {output}")

    def train(
        self, embeddings: str | Path, head: ClassifierHead, bundle_dir: str | Path
    ) -> CommandResult:
        """
        Trains one head on the train side of the split and writes the bundle with
        a `train_report.json` (split, class counts, parameters).

        :raises MissingClassError: Required classes absent from the train split.
        :raises TooFewSpeakersError: Speaker-disjoint split with a single speaker.
        """
        rows = load_embeddings(embeddings)
        spec = self.config.split_spec()
        train, test = self._split(rows, spec)
        params = self.config.train_params()

        classifier = train_head(
            head, train, params, first_class=self.config.first_class_label, n_jobs=self.config.n_jobs
        )

        report = {
            "head": head.value,
            "params": params.to_dict(),
            "split": spec.to_dict(),
            "class_counts": _class_counts(train),
            "n_train": len(train),
            "n_test": len(test),
            "train_speakers": sorted({row.speaker_id for row in train}),
            **self._provenance(),
        }
        bundle_dir = Path(bundle_dir)
        save_bundle(
            classifier,
            bundle_dir,
            self.config.config_hash,
            extra={"params": params.to_dict(), "split": spec.to_dict()},
        )
        _write_json(report, bundle_dir / "train_report.json")

        summary = {"head": head.value, "n_train": len(train), "class_counts": report["class_counts"]}
        text = f"Trained {head.value} head on {len(train)} rows -> {bundle_dir}"
        return CommandResult(bundle_dir, summary, text)

    def _load_for(self, classifier: EmotionClassifier, embeddings: str | Path):
        rows = load_embeddings(embeddings)
        if rows and rows[0].dim != classifier.dim:
            raise DimMismatchError(classifier.dim, rows[0].dim)
        return rows

    def predict(
        self, bundle_dir: str | Path, embeddings: str | Path, output: str | Path
    ) -> CommandResult:
        """Writes `utterance_id,speaker_id,emotion,predicted` for every embedding."""
        classifier, _ = load_bundle(bundle_dir)
        rows = self._load_for(classifier, embeddings)
        if not rows:
            raise EmptyInputError(f"{embeddings} holds no embeddings")

        predictions = classifier.predict_many(embedding_matrix(rows))
        output = Path(output)
        output.parent.mkdir(parents=True, exist_ok=True)
        lines = ["utterance_id,speaker_id,emotion,predicted"]
        lines += [
            f"{row.utterance_id},{row.speaker_id},{row.emotion.value},{pred}"
            for row, pred in zip(rows, predictions, strict=True)
        ]
        output.write_text("\n".join(lines) + "\n", encoding="utf-8")

        counts = Counter(str(p) for p in predictions)
        summary = {"n_predicted": len(rows), "predicted": dict(sorted(counts.items()))}
        return CommandResult(output, summary, f"Predicted {len(rows)} utterances -> {output}")

    def evaluate(
        self,
        bundle_dir: str | Path,
        embeddings: str | Path,
        output: str | Path,
        skip_report: str | Path | None = None,
        use_all: bool = False,
    ) -> CommandResult:
        """
        Scores a bundle on the held-out side of the split it was trained with (or on
        every row with `use_all`). Writes the JSON report and the confusion CSV.

        :raises EmptyEvalError: Nothing to evaluate.
        """
        classifier, manifest = load_bundle(bundle_dir)
        rows = self._load_for(classifier, embeddings)
        if use_all:
            test = rows
        else:
            spec = SplitSpec(**manifest["split"]) if "split" in manifest else None
            _, test = self._split(rows, spec)
        if not test:
            raise EmptyEvalError("the test split is empty")

        n_discarded = 0
        if skip_report:
            n_discarded = json.loads(Path(skip_report).read_text(encoding="utf-8"))["n_discarded"]

        report, predictions = evaluate_classifier(classifier, test, n_discarded)
        row = ResultsRow(name=classifier.head.value)
        if classifier.head == ClassifierHead.DETECTOR:
            row = ResultsRow(name=row.name, detection=report.accuracy)
        else:
            truth = [r.emotion for r in test if classifier.accepts(r)]
            detection = detection_report(truth, predictions, n_discarded)
            report.extra["detection_accuracy"] = detection.accuracy
            row = ResultsRow(name=row.name, recognition=report.accuracy, detection=detection.accuracy)

        output = Path(output)
        write_report_json(
            report, output, bundle_config_hash=manifest.get("config_hash"), **self._provenance()
        )
        write_confusion_csv(report.confusion, output.with_suffix(".confusion.csv"))

        text = format_results_table([row]) + "\n\n" + format_confusion(report.confusion)
        summary = {
            "head": classifier.head.value,
            "accuracy": report.accuracy,
            "macro_f1": report.macro_f1,
            "n_evaluated": report.confusion.total,
        }
        return CommandResult(output, summary, text)

    def matchscore(self, source: str | Path, output_dir: str | Path) -> CommandResult:
        """
        Runs the match-score experiment on an embeddings file, or on a manifest
        embedded with the configured backend first.
        """
        if is_manifest(source):
            rows = self._extract(read_manifest(source)).rows
        else:
            rows = load_embeddings(source)

        present = {row.emotion for row in rows}
        emotions = [e for e in SIX_CLASS if e in present]
        result = run_matchscore_experiment(
            rows,
            emotions=emotions if len(emotions) >= 2 else SIX_CLASS,
            impostor_cap=self.config.impostor_cap,
            seed=self.config.seed,
        )

        output_dir = Path(output_dir)
        write_scores_csv(result, output_dir / "scores.csv")
        stats_path = write_box_stats_json(result, output_dir / "box_stats.json", **self._provenance())

        stats = summarize(result)
        lines = [f"{'pairing':<16}{'n':>6}{'q1':>9}{'median':>9}{'q3':>9}"]
        for kind, box in stats.items():
            lines.append(f"{kind.label:<16}{box.n:>6}{box.q1:>9.4f}{box.median:>9.4f}{box.q3:>9.4f}")
        for kind in result.missing:
            lines.append(f"{kind.label:<16}{'no eligible pairs':>33}")
        summary = {
            "n_kinds": len(result.kinds),
            "missing": [k.label for k in result.missing],
            "medians": {k.label: box.median for k, box in stats.items()},
        }
        return CommandResult(stats_path, summary, "\n".join(lines))

    def benchmark(
        self, embeddings: str | Path, output_dir: str | Path, sweep_first_class: bool = False
    ) -> CommandResult:
        """
        Trains every head on one split and tabulates recognition (ER) and detection
        (ED) accuracy plus class-wise F1, next to a nearest-centroid baseline.
        """
        rows = load_embeddings(embeddings)
        train, test = self._split(rows)
        params = self.config.train_params()
        n_jobs = self.config.n_jobs
        four_test = [r for r in test if r.emotion in FOUR_CLASS]
        if not four_test:
            raise EmptyEvalError("no 4-class rows in the test split")

        table: list[ResultsRow] = []
        f1_rows: dict[str, EvalReport] = {}
        reports: dict[str, Any] = {}

        def add(name: str, report: EvalReport, detection: EvalReport | None) -> None:
            table.append(ResultsRow(name, report.accuracy, detection.accuracy if detection else None))
            f1_rows[name] = report
            reports[name] = {"recognition": report.to_dict()}
            if detection is not None:
                reports[name]["detection"] = detection.to_dict()

        centroid = NearestCentroidClassifier(FOUR_CLASS).fit(train)
        centroid_report = evaluate(centroid.predict, four_test, FOUR_CLASS)
        centroid_pred = [centroid.predict(r.embedding) for r in four_test]
        add(
            "Nearest centroid",
            centroid_report,
            detection_report([r.emotion for r in four_test], centroid_pred),
        )

        flat = train_head(ClassifierHead.FLAT, train, params, n_jobs=n_jobs)
        flat_report, flat_pred = evaluate_classifier(flat, test)
        add("SVM", flat_report, detection_report([r.emotion for r in four_test], flat_pred))

        first_classes = FOUR_CLASS if sweep_first_class else (self.config.first_class_label,)
        for first_class in first_classes:
            hc = train_head(ClassifierHead.HIERARCHICAL, train, params, first_class, n_jobs)
            hc_report, hc_pred = evaluate_classifier(hc, test)
            add(
                f"HC ({first_class.value}-First)",
                hc_report,
                detection_report([r.emotion for r in four_test], hc_pred),
            )

        detector = train_head(ClassifierHead.DETECTOR, train, params)
        detector_report, _ = evaluate_classifier(detector, test)
        table.append(ResultsRow("Detector", None, detector_report.accuracy))
        reports["Detector"] = {"detection": detector_report.to_dict()}

        text = (
            format_results_table(table)
            + "\n\n"
            + format_class_f1_table(f1_rows, [c.value for c in FOUR_CLASS])
        )
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        (output_dir / "results.txt").write_text(text + "\n", encoding="utf-8")
        artifact = _write_json(
            {
                "reports": reports,
                "params": params.to_dict(),
                "split": self.config.split_spec().to_dict(),
                "n_train": len(train),
                "n_test": len(test),
                **self._provenance(),
            },
            output_dir / "benchmark.json",
        )

        summary = {row.name: {"ER": row.recognition, "ED": row.detection} for row in table}
        return CommandResult(artifact, summary, text)


def record_run(
    ledger_url: str,
    command: str,
    config: PipelineConfig | None,
    status: str,
    artifact: str | Path | None = None,
    summary: dict[str, Any] | None = None,
) -> RunRecord | None:
    """
    Appends one row to the run ledger. Ledger failures are logged, never raised.

    :param ledger_url: SQLAlchemy URL; empty disables the ledger.
    """
    if not ledger_url:
        return None

    try:
        session_factory = get_session_factory(ledger_url)
    except SQLAlchemyError as e:
        logger.warning("Could not open the run ledger at %s: %s", ledger_url, e)
        return None

    with session_factory() as session:
        try:
            repository = RunsRepository(db=session)
            record = repository.record_run(
                command=command,
                status=status,
                config_hash=config.config_hash if config else "",
                seed=config.seed if config else 0,
                artifact_path=str(artifact) if artifact else None,
                summary=summary,
            )
            session.commit()
            logger.debug("Recorded run %d (%s, %s).", record.id, command, status)
            return record
        except SQLAlchemyError as e:
            logger.warning("Could not record the run in the ledger: %s", e)
            session.rollback()
            return None


def run_history(ledger_url: str, limit: int | None = None) -> str:
    """Formats the most recent ledger rows, oldest first."""
    if not ledger_url:
        return "The run ledger is disabled."

    session_factory = get_session_factory(ledger_url)
    with session_factory() as session:
        runs = RunsRepository(db=session).get_all_runs()
        if limit:
            runs = runs[-limit:]
        if not runs:
            return "No runs recorded."
        return "\n".join(
            f"{r.id:>5}  {r.created_at:%Y-%m-%d %H:%M:%S}  {r.command:<11}{r.status:<8}"
            f"{r.config_hash[:12]:<14}{r.artifact_path or '-'}"
            for r in runs
        )
