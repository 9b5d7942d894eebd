"""Five-fold evaluation protocol, accuracy statistics and McNemar's test.

Each round trains the grid on k-1 folds, splits the held-out fold into a
devtest half (used only for member selection) and a test half (used only
for reporting), then evaluates the ensemble and the best single classifier
on the test half.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from wsd_ensemble.corpus import Corpus, sense_distribution
from wsd_ensemble.ensemble import (
    MAJORITY,
    ClassifierGrid,
    Ensemble,
    VoteRule,
    best_in,
    decide,
    select_members,
    train_grid,
)
from wsd_ensemble.errors import ContaminationError, EvaluationError
from wsd_ensemble.features import WINDOW_SIZES, WindowSpec, all_categories, extract, grid_specs, specs_in
from wsd_ensemble.naive_bayes import DEFAULT_EPSILON, SCORING_MODES, pick_best

# chi-square critical value, 1 degree of freedom, p = .01
CHI2_CRITICAL_P01 = 6.635
ALPHA = 0.01
MCNEMAR_METHODS = ("chi2", "exact")


@dataclass(frozen=True)
class FoldPlan:
    """Random assignment of instances to folds and of each fold to devtest/test halves."""

    k: int
    seed: int
    folds: tuple[tuple[str, ...], ...]
    devtest_ids: tuple[tuple[str, ...], ...]
    test_ids: tuple[tuple[str, ...], ...]
    stratified: bool = False

    @property
    def assignments(self) -> dict[str, int]:
        return {i: f for f, fold in enumerate(self.folds) for i in fold}

    def training_ids(self, fold: int, order: Sequence[str]) -> list[str]:
        """Ids outside ``fold``, in the order given by ``order``."""
        held_out = set(self.folds[fold])
        return [i for i in order if i not in held_out]


def _halve(ids: list[str], rng: random.Random) -> tuple[list[str], list[str]]:
    ids = list(ids)
    rng.shuffle(ids)
    cut = (len(ids) + 1) // 2
    return ids[:cut], ids[cut:]


def _halve_stratified(ids: list[str], corpus: Corpus, rng: random.Random):
    by_sense: dict[str, list[str]] = {s: [] for s in corpus.sense_inventory}
    for i in ids:
        by_sense[corpus[i].sense].append(i)
    ordered: list[str] = []
    for sense in corpus.sense_inventory:
        group = by_sense[sense]
        rng.shuffle(group)
        ordered.extend(group)
    return ordered[0::2], ordered[1::2]


def make_fold_plan(corpus: Corpus, k: int = 5, seed: int = 0, *, stratify_halves: bool = False) -> FoldPlan:
    """Shuffle the corpus into ``k`` folds and halve each fold.

    Fold sizes differ by at most one (the first ``n % k`` folds are larger);
    odd folds give the extra instance to devtest. All randomness comes from
    ``random.Random(seed)``.
    """
    n = len(corpus)
    if k < 2:
        raise EvaluationError("k must be at least 2")
    if n < 2 * k:
        raise EvaluationError(f"{n} instances cannot fill {k} folds of at least 2")
    rng = random.Random(seed)
    ids = corpus.ids
    rng.shuffle(ids)
    base, extra = divmod(n, k)
    folds, devtest, test = [], [], []
    start = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        fold = ids[start:start + size]
        start += size
        if stratify_halves:
            dev, tst = _halve_stratified(fold, corpus, rng)
        else:
            dev, tst = _halve(fold, rng)
        folds.append(tuple(fold))
        devtest.append(tuple(dev))
        test.append(tuple(tst))
    return FoldPlan(k, seed, tuple(folds), tuple(devtest), tuple(test), stratify_halves)


def accuracy(predicted: Sequence[str], gold: Sequence[str]) -> float:
    if len(predicted) != len(gold):
        raise EvaluationError(f"length mismatch: {len(predicted)} predictions, {len(gold)} gold")
    if not gold:
        raise EvaluationError("accuracy of an empty sequence is undefined")
    return sum(p == g for p, g in zip(predicted, gold)) / len(gold)


@dataclass(frozen=True)
class McNemarResult:
    statistic: float
    significant: bool
    b: int
    c: int
    p_value: float
    method: str = "chi2"

    def __iter__(self):
        # unpacks as (statistic, significant)
        return iter((self.statistic, self.significant))


def mcnemar_statistic(b: int, c: int) -> float:
    """Continuity-corrected statistic ``(|b - c| - 1)^2 / (b + c)``; 0 when ``b + c == 0``."""
    if b + c == 0:
        return 0.0
    return (abs(b - c) - 1) ** 2 / (b + c)


def is_significant(statistic: float) -> bool:
    return statistic > CHI2_CRITICAL_P01


def exact_binomial_p(b: int, c: int) -> float:
    """Two-sided exact McNemar p-value, Binomial(b + c, 1/2)."""
    n = b + c
    if n == 0:
        return 1.0
    tail = sum(math.comb(n, i) for i in range(min(b, c) + 1))
    return min(1.0, 2 * tail / 2 ** n)


def mcnemar(
    preds_a: Sequence[str],
    preds_b: Sequence[str],
    gold: Sequence[str],
    method: str = "chi2",
) -> McNemarResult:
    """Paired test of two classifiers on the same gold labels.

    ``b`` counts instances only ``a`` gets right, ``c`` those only ``b`` gets
    right. With ``method="chi2"`` the result is significant when the statistic
    exceeds 6.635; with ``"exact"`` when the binomial p-value is below .01.
    """
    if not len(preds_a) == len(preds_b) == len(gold):
        raise EvaluationError("McNemar needs three sequences of equal length")
    if method not in MCNEMAR_METHODS:
        raise ValueError(f"method must be one of {MCNEMAR_METHODS}")
    b = c = 0
    for pa, pb, g in zip(preds_a, preds_b, gold):
        if pa == g and pb != g:
            b += 1
        elif pa != g and pb == g:
            c += 1
    stat = mcnemar_statistic(b, c)
    if method == "chi2":
        p = math.erfc(math.sqrt(stat / 2)) if b + c else 1.0
        return McNemarResult(stat, is_significant(stat), b, c, p, method)
    p = exact_binomial_p(b, c)
    return McNemarResult(stat, p < ALPHA, b, c, p, method)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    k: int = 5
    epsilon: float = DEFAULT_EPSILON
    vote: VoteRule = MAJORITY
    scoring: str = "bernoulli"
    stratify_halves: bool = False
    mcnemar: str = "chi2"
    ablations: tuple[VoteRule, ...] = ()

    def __post_init__(self):
        if isinstance(self.vote, str):
            object.__setattr__(self, "vote", VoteRule.parse(self.vote))
        object.__setattr__(self, "ablations", tuple(
            VoteRule.parse(r) if isinstance(r, str) else r for r in self.ablations
        ))
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError("seed must be an integer")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.scoring not in SCORING_MODES:
            raise ValueError(f"scoring must be one of {SCORING_MODES}")
        if self.mcnemar not in MCNEMAR_METHODS:
            raise ValueError(f"mcnemar must be one of {MCNEMAR_METHODS}")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "k": self.k,
            "epsilon": self.epsilon,
            "vote": str(self.vote),
            "scoring": self.scoring,
            "stratify_halves": self.stratify_halves,
            "mcnemar": self.mcnemar,
            "ablations": [str(r) for r in self.ablations],
        }


Grid = list[list[float]]  # grid[left_index][right_index]


def _to_matrix(values: dict[WindowSpec, float]) -> Grid:
    return [[values[WindowSpec(l, r)] for r in WINDOW_SIZES] for l in WINDOW_SIZES]


def _from_matrix(matrix: Grid) -> dict[WindowSpec, float]:
    return {
        WindowSpec(l, r): matrix[i][j]
        for i, l in enumerate(WINDOW_SIZES)
        for j, r in enumerate(WINDOW_SIZES)
    }


def mean_and_std(grids: Sequence[Grid]) -> tuple[Grid, Grid]:
    """Cellwise mean and sample standard deviation (divisor k - 1)."""
    k = len(grids)
    mean = [[math.fsum(g[i][j] for g in grids) / k for j in range(9)] for i in range(9)]
    std = [
        [
            math.sqrt(math.fsum((g[i][j] - mean[i][j]) ** 2 for g in grids) / (k - 1))
            if k > 1 else 0.0
            for j in range(9)
        ]
        for i in range(9)
    ]
    return mean, std


@dataclass
class FoldResult:
    fold: int
    train_size: int
    devtest_size: int
    test_size: int
    devtest_grid: Grid
    test_grid: Grid
    members: list[WindowSpec]
    ensemble_accuracy: float
    ensemble_predictions: list[str]
    test_gold: list[str]
    spec_predictions: dict[WindowSpec, list[str]] = field(repr=False)
    ensemble: Ensemble = field(repr=False)
    ablation_accuracy: dict[str, float] = field(default_factory=dict)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    target_word: str
    corpus_size: int
    sense_distribution: dict[str, int]
    folds: list[FoldResult]
    mean_grid: Grid
    std_grid: Grid
    mean_grid_members: list[WindowSpec]
    ensemble_test_accuracy: float
    best_single_spec: WindowSpec
    best_single_fold_accuracy: list[float]
    best_single_test_accuracy: float
    mcnemar: McNemarResult
    ablation_test_accuracy: dict[str, float]

    @property
    def per_fold_grids(self) -> list[Grid]:
        return [f.devtest_grid for f in self.folds]

    @property
    def per_fold_test_grids(self) -> list[Grid]:
        return [f.test_grid for f in self.folds]

    def to_dict(self) -> dict:
        return {
            "schema": "wsd-experiment-report/1",
            "config": self.config.to_dict(),
            "corpus": {
                "target_word": self.target_word,
                "size": self.corpus_size,
                "sense_distribution": self.sense_distribution,
            },
            "window_sizes": list(WINDOW_SIZES),
            "grid_layout": "grid[left_index][right_index]",
            "folds": [
                {
                    "fold": f.fold,
                    "train_size": f.train_size,
                    "devtest_size": f.devtest_size,
                    "test_size": f.test_size,
                    "devtest_grid": f.devtest_grid,
                    "test_grid": f.test_grid,
                    "members": [list(s) for s in f.members],
                    "ensemble_test_accuracy": f.ensemble_accuracy,
                    "best_single_test_accuracy": self.best_single_fold_accuracy[f.fold],
                    "ablation_test_accuracy": f.ablation_accuracy,
                }
                for f in self.folds
            ],
            "mean_grid": self.mean_grid,
            "std_grid": self.std_grid,
            "mean_grid_members": [list(s) for s in self.mean_grid_members],
            "ensemble_test_accuracy": self.ensemble_test_accuracy,
            "best_single": {
                "spec": list(self.best_single_spec),
                "test_accuracy": self.best_single_test_accuracy,
            },
            "mcnemar": {
                "method": self.mcnemar.method,
                "b_ensemble_only_correct": self.mcnemar.b,
                "c_best_single_only_correct": self.mcnemar.c,
                "statistic": self.mcnemar.statistic,
                "p_value": self.mcnemar.p_value,
                "significant_at_p01": self.mcnemar.significant,
            },
            "ablation_test_accuracy": self.ablation_test_accuracy,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def summary_line(self) -> str:
        return (
            f"ensemble={self.ensemble_test_accuracy:.3f} "
            f"best_single={self.best_single_test_accuracy:.3f} "
            f"mcnemar={self.mcnemar.statistic:.3f} "
            f"significant={str(self.mcnemar.significant).lower()}"
        )

    def to_text(self) -> str:
        return render_report(self)


def _assert_no_leakage(train_ids, devtest_ids, test_ids) -> None:
    train_set, dev_set, test_set = set(train_ids), set(devtest_ids), set(test_ids)
    if train_set & (dev_set | test_set) or dev_set & test_set:
        raise ContaminationError("fold split leaks instances between training and held-out data")


def _predict_all(grid: ClassifierGrid, corpus: Corpus) -> dict[WindowSpec, list[list[float]]]:
    scores = {}
    for spec, entry in grid.entries.items():
        scores[spec] = [entry.model.scores(extract(inst, spec)) for inst in corpus]
    return scores


def _ensemble_predictions(ensemble, spec_scores, n: int) -> list[str]:
    return [
        ensemble.senses[decide(ensemble, [spec_scores[m.spec][i] for m in ensemble.members])]
        for i in range(n)
    ]


def run_fold(corpus: Corpus, plan: FoldPlan, fold: int, config: ExperimentConfig) -> FoldResult:
    train_ids = plan.training_ids(fold, corpus.ids)
    _assert_no_leakage(train_ids, plan.devtest_ids[fold], plan.test_ids[fold])
    train_split = corpus.subset(train_ids)
    devtest = corpus.subset(plan.devtest_ids[fold])
    test = corpus.subset(plan.test_ids[fold])

    grid = train_grid(train_split, devtest, config.epsilon, config.scoring)
    test_gold = [inst.sense for inst in test]
    spec_scores = _predict_all(grid, test)
    spec_predictions = {}
    test_acc = {}
    for spec, rows in spec_scores.items():
        model = grid.entries[spec].model
        preds = [model.senses[pick_best(row, model.sense_counts)] for row in rows]
        spec_predictions[spec] = preds
        test_acc[spec] = accuracy(preds, test_gold)

    ensemble = select_members(grid, config.vote)
    predictions = _ensemble_predictions(ensemble, spec_scores, len(test))
    ablation = {}
    for rule in config.ablations:
        preds = _ensemble_predictions(select_members(grid, rule), spec_scores, len(test))
        ablation[str(rule)] = accuracy(preds, test_gold)
    return FoldResult(
        fold=fold,
        train_size=len(train_split),
        devtest_size=len(devtest),
        test_size=len(test),
        devtest_grid=_to_matrix(grid.accuracies()),
        test_grid=_to_matrix(test_acc),
        members=ensemble.specs,
        ensemble_accuracy=accuracy(predictions, test_gold),
        ensemble_predictions=predictions,
        test_gold=test_gold,
        spec_predictions=spec_predictions,
        ensemble=ensemble,
        ablation_accuracy=ablation,
    )


def run_experiment(corpus: Corpus, config: ExperimentConfig, plan: FoldPlan | None = None) -> ExperimentReport:
    """Run every fold of the cross-validation protocol and aggregate the results."""
    if plan is None:
        plan = make_fold_plan(corpus, config.k, config.seed, stratify_halves=config.stratify_halves)
    folds = [run_fold(corpus, plan, f, config) for f in range(plan.k)]

    mean_grid, std_grid = mean_and_std([f.devtest_grid for f in folds])
    mean_acc = _from_matrix(mean_grid)
    mean_members = [best_in(mean_acc, specs_in(cat)) for cat in all_categories()]
    best = best_in(mean_acc, grid_specs())

    best_fold_acc = [accuracy(f.spec_predictions[best], f.test_gold) for f in folds]
    pooled_gold = [g for f in folds for g in f.test_gold]
    pooled_ensemble = [p for f in folds for p in f.ensemble_predictions]
    pooled_best = [p for f in folds for p in f.spec_predictions[best]]
    test_result = mcnemar(pooled_ensemble, pooled_best, pooled_gold, config.mcnemar)

    ablation = {
        str(rule): math.fsum(f.ablation_accuracy[str(rule)] for f in folds) / len(folds)
        for rule in config.ablations
    }
    return ExperimentReport(
        config=config,
        target_word=corpus.target_word,
        corpus_size=len(corpus),
        sense_distribution=sense_distribution(corpus),
        folds=folds,
        mean_grid=mean_grid,
        std_grid=std_grid,
        mean_grid_members=mean_members,
        ensemble_test_accuracy=math.fsum(f.ensemble_accuracy for f in folds) / len(folds),
        best_single_spec=best,
        best_single_fold_accuracy=best_fold_acc,
        best_single_test_accuracy=math.fsum(best_fold_acc) / len(folds),
        mcnemar=test_result,
        ablation_test_accuracy=ablation,
    )


# --- text rendering --------------------------------------------------------

def render_grid(matrix: Grid, marked: Sequence[WindowSpec] = (), title: str = "") -> str:
    """Draw a 9x9 grid with left windows across and right windows down.

    Rows run from the widest right window at the top to 0 at the bottom and
    range-category blocks are separated by rules. Marked cells carry ``*``.
    """
    marked = set(marked)
    names = {0: "narrow", 3: "medium", 6: "wide"}
    margin = " " * 9
    rule = margin + "+" + "+".join(["-" * 24] * 3) + "+"

    def row(prefix: str, blocks: list[str], edge: str) -> str:
        return prefix + f"{edge}  " + f"  {edge}  ".join(blocks) + f"  {edge}"

    lines = [title] if title else []
    lines.append(rule)
    for j in reversed(range(9)):
        r = WINDOW_SIZES[j]
        label = names.get(j - 1 if j % 3 == 1 else -1, "")
        cells = []
        for i, l in enumerate(WINDOW_SIZES):
            star = "*" if WindowSpec(l, r) in marked else " "
            cells.append(f"{matrix[i][j]:.3f}{star}")
        lines.append(row(f"{label:>6} {r:>2}", [" ".join(cells[b:b + 3]) for b in (0, 3, 6)], "|"))
        if j % 3 == 0:
            lines.append(rule)
    sizes = [" ".join(f"{l:>5} " for l in WINDOW_SIZES[b:b + 3]) for b in (0, 3, 6)]
    lines.append(row(margin, sizes, " "))
    lines.append(row(margin, [f"{n:^20}" for n in ("narrow", "medium", "wide")], " "))
    lines.append(margin + " left window (across) / right window (down)")
    return "\n".join(lines)


def render_report(report: ExperimentReport) -> str:
    cfg = report.config
    out = [
        f"target word: {report.target_word or '-'}    instances: {report.corpus_size}",
        "senses: " + ", ".join(f"{s}={n}" for s, n in report.sense_distribution.items()),
        f"config: k={cfg.k} seed={cfg.seed} epsilon={cfg.epsilon:g} vote={cfg.vote} "
        f"scoring={cfg.scoring} mcnemar={cfg.mcnemar} stratify_halves={str(cfg.stratify_halves).lower()}",
        "",
        render_grid(report.mean_grid, report.mean_grid_members,
                    "mean devtest accuracy (* = best in range category)"),
        "",
        render_grid(report.std_grid, (), "devtest accuracy standard deviation"),
    ]
    for f in report.folds:
        out += ["", render_grid(f.devtest_grid, f.members,
                                f"fold {f.fold + 1} devtest accuracy (* = ensemble member)")]
        out.append(
            f"fold {f.fold + 1}: train={f.train_size} devtest={f.devtest_size} "
            f"test={f.test_size} ensemble={f.ensemble_accuracy:.3f} "
            f"best_single={report.best_single_fold_accuracy[f.fold]:.3f}"
        )
    out += [
        "",
        f"best single classifier (by mean devtest accuracy): {report.best_single_spec}",
        f"mcnemar ({report.mcnemar.method}): b={report.mcnemar.b} c={report.mcnemar.c} "
        f"p={report.mcnemar.p_value:.4g}",
    ]
    for rule, acc in report.ablation_test_accuracy.items():
        out.append(f"ablation {rule}: test accuracy {acc:.3f}")
    out += ["", report.summary_line()]
    return "\n".join(out) + "\n"
