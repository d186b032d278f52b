import argparse
import logging
import sys
from collections.abc import Sequence

from sqlalchemy.exc import SQLAlchemyError

from cli.config import PipelineConfig, load_pipeline_config
from cli.service import CommandResult, PipelineService, record_run, run_history
from core.config import settings
from core.exceptions import PipelineError
from core.logger_config import setup_logging
from embeddings.models import PRECOMPUTED, SPECTRAL_BASELINE
from emotions.models import ClassifierHead
from runs.models import STATUS_FAILED, STATUS_OK

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config (default: SER_CONFIG)")
    common.add_argument("--seed", type=int)
    common.add_argument("--gamma", type=float, help="rbf kernel width")
    common.add_argument("--c", dest="C", type=float, help="SVM box constraint")
    common.add_argument("--first-class", dest="first_class", help="first stage of the hierarchy")
    common.add_argument("--backend", choices=[SPECTRAL_BASELINE, PRECOMPUTED])
    common.add_argument("--embedding-source", dest="embedding_source")
    common.add_argument("--n-jobs", dest="n_jobs", type=int)
    common.add_argument("--ledger-url", default=None, help="run ledger URL, empty to disable")
    common.add_argument("--log-dir", default=None)

    parser = argparse.ArgumentParser(
        prog="emotion-embeddings",
        description="Speech emotion recognition from speaker embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="embed the utterances of a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="EMB1 file, or .csv")
    p.add_argument("--skip-report")

    p = sub.add_parser("train", parents=[common], help="train a classifier head")
    p.add_argument("embeddings")
    p.add_argument("--head", choices=[h.value for h in ClassifierHead], default="flat")
    p.add_argument("-o", "--output", required=True, help="bundle directory")

    p = sub.add_parser("predict", parents=[common], help="label embeddings with a bundle")
    p.add_argument("bundle")
    p.add_argument("embeddings")
    p.add_argument("-o", "--output", required=True, help="predictions CSV")

    p = sub.add_parser("evaluate", parents=[common], help="score a bundle on the test split")
    p.add_argument("bundle")
    p.add_argument("embeddings")
    p.add_argument("-o", "--output", required=True, help="report JSON")
    p.add_argument("--skip-report", help="extraction skip report, for the discard count")
    p.add_argument("--all", dest="use_all", action="store_true", help="evaluate every row")

    p = sub.add_parser("matchscore", parents=[common], help="intra-speaker match scores")
    p.add_argument("source", help="embeddings file or manifest")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("-o", "--output", required=True, help="EMB1 file, or .csv")
    p.add_argument("--manifest", help="also write a manifest referencing the corpus")

    p = sub.add_parser("benchmark", parents=[common], help="train and compare every head")
    p.add_argument("embeddings")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--sweep-first-class", action="store_true")

    p = sub.add_parser("history", parents=[common], help="list recorded runs")
    p.add_argument("--limit", type=int)

    return parser


OVERRIDE_KEYS = ("seed", "gamma", "C", "first_class", "backend", "embedding_source", "n_jobs")


def dispatch(service: PipelineService, args: argparse.Namespace) -> CommandResult:
    match args.command:
        case "extract":
            return service.extract(args.manifest, args.output, args.skip_report)
        case "train":
            return service.train(args.embeddings, ClassifierHead(args.head), args.output)
        case "predict":
            return service.predict(args.bundle, args.embeddings, args.output)
        case "evaluate":
            return service.evaluate(
                args.bundle, args.embeddings, args.output, args.skip_report, args.use_all
            )
        case "matchscore":
            return service.matchscore(args.source, args.output)
        case "synth":
            return service.synth(args.output, args.manifest)
        case "benchmark":
            return service.benchmark(args.embeddings, args.output, args.sweep_first_class)
    raise ValueError(f"unknown command {args.command}")


def main(argv: Sequence[str] | None = None) -> int:
    """
    Main entry point for the application. Returns 0 iff the requested artifact was written.
    """
    args = build_parser().parse_args(argv)
    setup_logging(log_dir=args.log_dir)
    ledger_url = settings.LEDGER_URL if args.ledger_url is None else args.ledger_url

    if args.command == "history":
        try:
            print(run_history(ledger_url, args.limit))
        except SQLAlchemyError as e:
            logger.error("Could not read the run ledger at %s: %s", ledger_url, e)
            return 1
        return 0

    config: PipelineConfig | None = None
    try:
        config = load_pipeline_config(
            args.config, {key: getattr(args, key) for key in OVERRIDE_KEYS}
        )
        result = dispatch(PipelineService(config), args)
    except (PipelineError, OSError) as e:
        logger.error("%s failed: %s", args.command, e, exc_info=True)
        record_run(ledger_url, args.command, config, STATUS_FAILED, summary={"error": str(e)})
        return 1

    record_run(ledger_url, args.command, config, STATUS_OK, result.artifact, result.summary)
    if result.text:
        print(result.text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
