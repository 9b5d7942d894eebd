"""The 81-classifier grid, member selection and voting."""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from wsd_ensemble.corpus import Corpus, Instance
from wsd_ensemble.errors import ContaminationError, ModelFormatError, ModelVersionError
from wsd_ensemble.features import (
    RangeCategory,
    WindowSpec,
    all_categories,
    category_of,
    extract,
    grid_specs,
    specs_in,
)
from wsd_ensemble.naive_bayes import (
    DEFAULT_EPSILON,
    TIE_TOLERANCE,
    NBModel,
    load_model,
    pick_best,
    save_model,
    train_many,
)

MANIFEST_FORMAT = "wsd-ensemble-manifest"
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class VoteRule:
    """How members are chosen and combined.

    ``majority``: best classifier per range category, plurality vote.
    ``weighted``: same members, sense with the largest summed log joint wins.
    ``all81``: every grid classifier, plurality vote.
    ``category``: the nine classifiers of one range category, plurality vote.
    """

    kind: str = "majority"
    category: RangeCategory | None = None

    KINDS = ("majority", "weighted", "all81", "category")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown vote rule {self.kind!r}")
        if (self.kind == "category") != (self.category is not None):
            raise ValueError("a category is required exactly for the 'category' rule")

    @classmethod
    def parse(cls, text: str) -> VoteRule:
        text = text.strip().lower()
        if text in ("majority", "weighted", "all81"):
            return cls(text)
        if text == "all_81":
            return cls("all81")
        if text.startswith("category="):
            return cls("category", RangeCategory.parse(text[len("category="):]))
        raise ValueError(
            f"vote rule must be majority, weighted, all81 or category=<L,R>; got {text!r}"
        )

    def __str__(self) -> str:
        if self.kind == "category":
            return f"category={self.category}"
        return self.kind


MAJORITY = VoteRule("majority")


@dataclass(frozen=True)
class GridEntry:
    model: NBModel
    devtest_accuracy: float


@dataclass(frozen=True)
class ClassifierGrid:
    entries: Mapping[WindowSpec, GridEntry]

    def accuracy_of(self, spec: WindowSpec) -> float:
        return self.entries[spec].devtest_accuracy

    def accuracies(self) -> dict[WindowSpec, float]:
        return {spec: e.devtest_accuracy for spec, e in self.entries.items()}


@dataclass(frozen=True)
class Member:
    category: RangeCategory
    spec: WindowSpec
    model: NBModel
    devtest_accuracy: float


@dataclass(frozen=True)
class Ensemble:
    members: tuple[Member, ...]
    rule: VoteRule = MAJORITY

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        senses = {m.model.senses for m in self.members}
        if len(senses) != 1:
            raise ValueError("ensemble members disagree on the sense inventory")

    @property
    def senses(self) -> tuple[str, ...]:
        return self.members[0].model.senses

    @property
    def specs(self) -> list[WindowSpec]:
        return [m.spec for m in self.members]


def _check_disjoint(train_split: Corpus, devtest: Corpus) -> None:
    overlap = set(train_split.ids) & set(devtest.ids)
    if overlap:
        sample = ", ".join(sorted(overlap)[:5])
        raise ContaminationError(
            f"{len(overlap)} instance(s) appear in both training and devtest data: {sample}"
        )


def train_grid(
    train_split: Corpus,
    devtest: Corpus,
    epsilon: float = DEFAULT_EPSILON,
    scoring: str = "bernoulli",
) -> ClassifierGrid:
    """Train one classifier per window spec and score each on ``devtest``."""
    if len(train_split) == 0 or len(devtest) == 0:
        raise ValueError("training and devtest splits must be non-empty")
    _check_disjoint(train_split, devtest)
    gold = [inst.sense for inst in devtest]
    entries = {}
    models = train_many(train_split, grid_specs(), epsilon, scoring)
    for spec, model in models.items():
        predicted = [model.senses[pick_best(model.scores(extract(inst, spec)), model.sense_counts)]
                     for inst in devtest]
        correct = sum(p == g for p, g in zip(predicted, gold))
        entries[spec] = GridEntry(model, correct / len(gold))
    return ClassifierGrid(entries)


def selection_key(spec: WindowSpec, accuracy: float) -> tuple:
    """Sort key: best accuracy, then smallest total window, then grid order."""
    return (-accuracy, spec.left + spec.right, spec.left, spec.right)


def best_in(accuracies: Mapping[WindowSpec, float], specs: Iterable[WindowSpec]) -> WindowSpec:
    return min(specs, key=lambda s: selection_key(s, accuracies[s]))


def select_members(grid: ClassifierGrid, rule: VoteRule = MAJORITY) -> Ensemble:
    """Choose ensemble members from a trained grid according to ``rule``."""
    acc = grid.accuracies()
    if rule.kind in ("majority", "weighted"):
        chosen = [best_in(acc, specs_in(cat)) for cat in all_categories()]
    elif rule.kind == "all81":
        chosen = grid_specs()
    else:
        chosen = specs_in(rule.category)
    members = tuple(
        Member(category_of(spec), spec, grid.entries[spec].model, acc[spec]) for spec in chosen
    )
    return Ensemble(members, rule)


def member_scores(ensemble: Ensemble, instance: Instance) -> list[list[float]]:
    return [m.model.scores(extract(instance, m.spec)) for m in ensemble.members]


def _argmax_in_order(values: list[float], candidates: list[int]) -> int:
    top = max(values[j] for j in candidates)
    return min(j for j in candidates if top - values[j] <= TIE_TOLERANCE)


def decide(ensemble: Ensemble, scores: list[list[float]]) -> int:
    """Winning sense index given each member's per-sense log scores."""
    k = len(ensemble.senses)
    totals = [math.fsum(row[j] for row in scores) for j in range(k)]
    if ensemble.rule.kind == "weighted":
        return _argmax_in_order(totals, list(range(k)))
    votes = Counter(
        pick_best(row, m.model.sense_counts) for m, row in zip(ensemble.members, scores)
    )
    most = max(votes.values())
    tied = sorted(j for j, n in votes.items() if n == most)
    if len(tied) == 1:
        return tied[0]
    return _argmax_in_order(totals, tied)


def vote(ensemble: Ensemble, instance: Instance) -> str:
    """Ensemble decision for one instance.

    Plurality ties are settled by the members' summed log joint over the tied
    senses, then by inventory order.
    """
    return ensemble.senses[decide(ensemble, member_scores(ensemble, instance))]


def classify_batch(ensemble: Ensemble, instances: Iterable[Instance]) -> list[str]:
    return [vote(ensemble, inst) for inst in instances]


# --- manifest --------------------------------------------------------------

def model_filename(spec: WindowSpec) -> str:
    return f"nb_{spec.left}_{spec.right}.model"


def write_manifest(ensemble: Ensemble, directory: str | os.PathLike) -> Path:
    """Write member models and ``manifest.json`` into ``directory``.

    Model paths in the manifest are relative to the manifest file.
    """
    directory = Path(directory)
    (directory / "models").mkdir(parents=True, exist_ok=True)
    rows = []
    for m in ensemble.members:
        rel = f"models/{model_filename(m.spec)}"
        save_model(m.model, directory / rel)
        rows.append({
            "category": [m.category.left_range, m.category.right_range],
            "spec": [m.spec.left, m.spec.right],
            "model": rel,
            "devtest_accuracy": m.devtest_accuracy,
        })
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "vote_rule": str(ensemble.rule),
        "members": rows,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | os.PathLike) -> Ensemble:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a valid manifest ({exc})") from None
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ModelFormatError(f"{path}: not an ensemble manifest")
    if manifest.get("version") != MANIFEST_VERSION:
        raise ModelVersionError(f"{path}: unsupported manifest version {manifest.get('version')!r}")
    members = []
    for row in manifest["members"]:
        spec = WindowSpec(*row["spec"]).validate()
        model = load_model(path.parent / row["model"])
        if model.spec != spec:
            raise ModelFormatError(f"{row['model']}: model spec {model.spec} != manifest {spec}")
        members.append(Member(RangeCategory(*row["category"]), spec, model,
                              float(row["devtest_accuracy"])))
    return Ensemble(tuple(members), VoteRule.parse(manifest["vote_rule"]))
