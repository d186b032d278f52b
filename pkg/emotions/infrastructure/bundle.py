"""
Classifier bundles: a directory holding the stage models in SVM1 format and a
`manifest.json` recording head type, first class, class codes, embedding dimension
and the configuration hash.
"""

import json
import logging
from pathlib import Path
from typing import Any

from core.exceptions import BadMagicError
from emotions.models import ClassifierHead, EmotionLabel, HierarchicalClassifier
from emotions.service import EmotionClassifier
from svm.infrastructure.serialization import load_model, save_model
from svm.models import BinarySvmModel, MulticlassSvmModel

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
BUNDLE_FORMAT = "emotion-bundle/1"


def _as_emotions(model: MulticlassSvmModel) -> MulticlassSvmModel:
    return MulticlassSvmModel(
        classes=tuple(EmotionLabel(c) for c in model.classes),
        pairwise_models=model.pairwise_models,
    )


def save_bundle(
    classifier: EmotionClassifier,
    directory: str | Path,
    config_hash: str,
    extra: dict[str, Any] | None = None,
) -> Path:
    """
    Writes a classifier bundle.

    :param classifier: Trained head.
    :param directory: Created when missing.
    :param config_hash: Provenance hash stored in the manifest.
    :param extra: Additional manifest fields (split settings, parameters).
    :return: Path of the written manifest.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    files: dict[str, str] = {}
    first_class = None
    if classifier.head == ClassifierHead.HIERARCHICAL:
        hc: HierarchicalClassifier = classifier.model
        first_class = hc.first_class.value
        save_model(hc.stage1, directory / "stage1.svm")
        save_model(hc.stage2, directory / "stage2.svm")
        files = {"stage1": "stage1.svm", "stage2": "stage2.svm"}
    else:
        save_model(classifier.model, directory / "model.svm")
        files = {"model": "model.svm"}

    manifest = {
        "format": BUNDLE_FORMAT,
        "head": classifier.head.value,
        "first_class": first_class,
        "class_codes": {label.value: label.code for label in EmotionLabel},
        "classes": [str(c) for c in classifier.classes],
        "embedding_dim": classifier.dim,
        "config_hash": config_hash,
        "files": files,
        **(extra or {}),
    }
    manifest_path = directory / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.info("Saved %s bundle to %s", classifier.head.value, directory)
    return manifest_path


def load_bundle(directory: str | Path) -> tuple[EmotionClassifier, dict[str, Any]]:
    """
    Reads a bundle written by `save_bundle`.

    :return: The classifier and the parsed manifest.
    :raises BadMagicError: Missing or foreign manifest.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise BadMagicError(f"{directory} has no {MANIFEST_NAME}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != BUNDLE_FORMAT:
        raise BadMagicError(f"{manifest_path} is not a classifier bundle")

    head = ClassifierHead(manifest["head"])
    files = manifest["files"]
    if head == ClassifierHead.HIERARCHICAL:
        stage1 = load_model(directory / files["stage1"])
        stage2 = load_model(directory / files["stage2"])
        if not isinstance(stage1, BinarySvmModel) or not isinstance(stage2, MulticlassSvmModel):
            raise BadMagicError(f"{directory} holds stage models of the wrong kind")
        model = HierarchicalClassifier(
            first_class=EmotionLabel(manifest["first_class"]),
            stage1=stage1,
            stage2=_as_emotions(stage2),
        )
    else:
        model = load_model(directory / files["model"])
        if head == ClassifierHead.FLAT:
            model = _as_emotions(model)

    logger.info("Loaded %s bundle from %s", head.value, directory)
    return EmotionClassifier(head=head, model=model), manifest
