"""Bernoulli Naive Bayes over binary co-occurrence features for one window spec.

Parameters are relative frequencies. Any estimate of exactly 0 is floored to
``epsilon`` and any estimate of exactly 1 is clipped to ``1 - epsilon``, so
every log factor stays finite. Scores are natural-log joint probabilities.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from wsd_ensemble.corpus import Corpus, Instance
from wsd_ensemble.errors import (
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    TrainingError,
    UnknownSenseError,
)
from wsd_ensemble.features import WINDOW_SIZES, WindowSpec, extract

DEFAULT_EPSILON = 1e-6
SCORING_MODES = ("bernoulli", "presence")

# Log scores closer than this are treated as tied; exact float ties are
# unreliable once the same real value is reached by different sums.
TIE_TOLERANCE = 1e-9

FORMAT_MAGIC = "wsd-nb-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class NBModel:
    spec: WindowSpec
    senses: tuple[str, ...]
    vocabulary: tuple[str, ...]
    prior: tuple[float, ...]
    # conditional[i][j] = p(word i present | sense j)
    conditional: tuple[tuple[float, ...], ...]
    epsilon: float
    sense_counts: tuple[int, ...]
    word_counts: tuple[tuple[int, ...], ...]
    scoring: str = "bernoulli"

    _word_index: dict = field(init=False, repr=False, compare=False)
    _base: tuple = field(init=False, repr=False, compare=False)
    _delta: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.scoring not in SCORING_MODES:
            raise ValueError(f"scoring must be one of {SCORING_MODES}")
        k = len(self.senses)
        log_prior = [math.log(p) for p in self.prior]
        if self.scoring == "bernoulli":
            # score(s) = base[s] + sum of delta[w][s] over present words
            base = tuple(
                math.fsum([log_prior[j]] + [math.log1p(-row[j]) for row in self.conditional])
                for j in range(k)
            )
            delta = tuple(
                tuple(math.log(row[j]) - math.log1p(-row[j]) for j in range(k))
                for row in self.conditional
            )
        else:
            base = tuple(log_prior)
            delta = tuple(tuple(math.log(p) for p in row) for row in self.conditional)
        object.__setattr__(self, "_word_index", {w: i for i, w in enumerate(self.vocabulary)})
        object.__setattr__(self, "_base", base)
        object.__setattr__(self, "_delta", delta)

    def sense_index(self, sense: str) -> int:
        try:
            return self.senses.index(sense)
        except ValueError:
            raise UnknownSenseError(f"sense {sense!r} not known to this model") from None

    def with_scoring(self, scoring: str) -> NBModel:
        """Same parameters, different scoring rule."""
        return NBModel(
            self.spec, self.senses, self.vocabulary, self.prior, self.conditional,
            self.epsilon, self.sense_counts, self.word_counts, scoring,
        )

    def scores(self, features: Iterable[str]) -> list[float]:
        """Log joint probability of ``features`` with each sense, in ``senses`` order.

        Words outside the vocabulary contribute nothing.
        """
        index = self._word_index
        present = sorted({index[w] for w in features if w in index})
        delta = self._delta
        return [
            math.fsum([base] + [delta[i][j] for i in present])
            for j, base in enumerate(self._base)
        ]


def _smooth(value: float, epsilon: float) -> float:
    if value == 0.0:
        return epsilon
    if value == 1.0:
        return 1.0 - epsilon
    return value


def train(
    corpus: Corpus,
    spec: WindowSpec,
    epsilon: float = DEFAULT_EPSILON,
    scoring: str = "bernoulli",
) -> NBModel:
    """Estimate priors and per-sense feature probabilities from ``corpus``.

    ``prior[s] = n(s) / N`` and ``p(w | s) = n(w, s) / n(s)`` where ``n(w, s)``
    counts sense-``s`` instances whose window contains ``w``. Zero priors are
    floored to ``epsilon`` and the priors renormalized.
    """
    spec = WindowSpec(*spec).validate()
    if len(corpus) == 0:
        raise TrainingError("cannot train on an empty corpus")
    if not 0.0 < epsilon < 1.0:
        raise TrainingError(f"epsilon must lie in (0, 1), got {epsilon}")
    senses = corpus.sense_inventory
    column = {s: j for j, s in enumerate(senses)}
    k = len(senses)

    sense_counts = [0] * k
    pair_counts: dict[str, list[int]] = {}
    for inst in corpus:
        j = column[inst.sense]
        sense_counts[j] += 1
        for word in extract(inst, spec):
            row = pair_counts.get(word)
            if row is None:
                row = pair_counts[word] = [0] * k
            row[j] += 1

    vocabulary = tuple(sorted(pair_counts))
    return _from_counts(
        spec, tuple(senses), vocabulary, [pair_counts[w] for w in vocabulary],
        sense_counts, epsilon, scoring,
    )


def _from_counts(spec, senses, vocabulary, word_counts, sense_counts, epsilon, scoring) -> NBModel:
    k = len(senses)
    total = sum(sense_counts)
    prior = [n / total for n in sense_counts]
    if any(p == 0.0 for p in prior):
        floored = [p if p > 0.0 else epsilon for p in prior]
        mass = math.fsum(floored)
        prior = [p / mass for p in floored]
    conditional = tuple(
        tuple(
            _smooth(row[j] / sense_counts[j] if sense_counts[j] else 0.0, epsilon)
            for j in range(k)
        )
        for row in word_counts
    )
    return NBModel(
        spec=spec,
        senses=senses,
        vocabulary=vocabulary,
        prior=tuple(prior),
        conditional=conditional,
        epsilon=epsilon,
        sense_counts=tuple(sense_counts),
        word_counts=tuple(tuple(int(n) for n in row) for row in word_counts),
        scoring=scoring,
    )


# window-size bucket of a distance 1..50: index of the smallest size covering it
_BUCKET = [None] + [
    next(i for i, size in enumerate(WINDOW_SIZES) if size >= d)
    for d in range(1, WINDOW_SIZES[-1] + 1)
]


def train_many(
    corpus: Corpus,
    specs: Sequence[WindowSpec],
    epsilon: float = DEFAULT_EPSILON,
    scoring: str = "bernoulli",
) -> dict[WindowSpec, NBModel]:
    """Train one model per spec in a single pass over the corpus.

    Gives exactly the models :func:`train` would. Each word's nearest left
    and right distance to the target is bucketed by window size; a word is
    in the ``(l, r)`` window iff its left bucket is ``<= l`` or its right
    bucket is ``<= r``, so all window counts follow from 2-D suffix sums.
    """
    specs = [WindowSpec(*s).validate() for s in specs]
    if len(corpus) == 0:
        raise TrainingError("cannot train on an empty corpus")
    if not 0.0 < epsilon < 1.0:
        raise TrainingError(f"epsilon must lie in (0, 1), got {epsilon}")
    senses = tuple(corpus.sense_inventory)
    column = {s: j for j, s in enumerate(senses)}
    k = len(senses)
    reach = max((max(s.left, s.right) for s in specs), default=0)
    never = len(WINDOW_SIZES)

    sense_counts = [0] * k
    per_instance = []
    words: set[str] = set()
    for inst in corpus:
        sense_counts[column[inst.sense]] += 1
        t, tokens = inst.target_index, inst.tokens
        nearest: dict[str, list[int]] = {}
        for d in range(1, min(reach, t) + 1):
            slot = nearest.setdefault(tokens[t - d], [never, never])
            if slot[0] == never:
                slot[0] = _BUCKET[d]
        for d in range(1, min(reach, len(tokens) - 1 - t) + 1):
            slot = nearest.setdefault(tokens[t + d], [never, never])
            if slot[1] == never:
                slot[1] = _BUCKET[d]
        per_instance.append((column[inst.sense], nearest))
        words.update(nearest)

    vocab = sorted(words)
    index = {w: i for i, w in enumerate(vocab)}
    w_idx, s_idx, l_idx, r_idx = [], [], [], []
    for j, nearest in per_instance:
        for word, (bl, br) in nearest.items():
            w_idx.append(index[word])
            s_idx.append(j)
            l_idx.append(bl)
            r_idx.append(br)
    # buckets 0..8 are window sizes, 9 means "not within reach"; 10 pads the suffix sums
    hist = np.zeros((len(vocab), k, never + 2, never + 2), dtype=np.int64)
    np.add.at(hist, (w_idx, s_idx, l_idx, r_idx), 1)
    # beyond[w, s, a, b] = instances whose left bucket >= a and right bucket >= b
    beyond = hist[:, :, ::-1, ::-1].cumsum(axis=2).cumsum(axis=3)[:, :, ::-1, ::-1]
    seen = beyond[:, :, 0, 0]

    models = {}
    for spec in specs:
        li, ri = WINDOW_SIZES.index(spec.left), WINDOW_SIZES.index(spec.right)
        counts = seen - beyond[:, :, li + 1, ri + 1]
        keep = np.flatnonzero(counts.any(axis=1))
        models[spec] = _from_counts(
            spec, senses, tuple(vocab[i] for i in keep), counts[keep].tolist(),
            sense_counts, epsilon, scoring,
        )
    return models


def log_joint(model: NBModel, features: Iterable[str], sense: str) -> float:
    return model.scores(features)[model.sense_index(sense)]


def pick_best(
    scores: Sequence[float],
    sense_counts: Sequence[int],
    tolerance: float = TIE_TOLERANCE,
) -> int:
    """Index of the highest score.

    Scores within ``tolerance`` of the maximum tie; ties go to the larger
    training count, then the lower index.
    """
    top = max(scores)
    tied = [j for j, s in enumerate(scores) if top - s <= tolerance]
    return min(tied, key=lambda j: (-sense_counts[j], j))


def classify_features(model: NBModel, features: Iterable[str]) -> str:
    return model.senses[pick_best(model.scores(features), model.sense_counts)]


def classify(model: NBModel, instance: Instance) -> str:
    """Most probable sense of ``instance`` under ``model``."""
    return classify_features(model, extract(instance, model.spec))


# --- persistence -----------------------------------------------------------

def _num(x: float) -> str:
    return format(x, ".17g")


def _dumps(model: NBModel) -> str:
    lines = [
        f"{FORMAT_MAGIC}\t{FORMAT_VERSION}",
        f"spec\t{model.spec.left}\t{model.spec.right}",
        f"epsilon\t{_num(model.epsilon)}",
        f"scoring\t{model.scoring}",
        "senses\t" + "\t".join(model.senses),
        "sense_counts\t" + " ".join(str(n) for n in model.sense_counts),
        "prior\t" + " ".join(_num(p) for p in model.prior),
        f"vocabulary\t{len(model.vocabulary)}",
    ]
    for word, counts, probs in zip(model.vocabulary, model.word_counts, model.conditional):
        lines.append(
            f"{word}\t{' '.join(str(n) for n in counts)}\t{' '.join(_num(p) for p in probs)}"
        )
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + f"checksum\tsha256:{digest}\n"


def save_model(model: NBModel, sink: str | os.PathLike | TextIO) -> None:
    """Write ``model`` in the versioned text format.

    Decimals carry 17 significant digits, so a reload is bit-identical.
    """
    text = _dumps(model)
    if hasattr(sink, "write"):
        sink.write(text)
        return
    with open(sink, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _expect(line: str, key: str, line_number: int) -> list[str]:
    fields = line.split("\t")
    if fields[0] != key:
        raise ModelFormatError(f"line {line_number}: expected {key!r}, found {fields[0]!r}")
    return fields[1:]


def loads_model(text: str) -> NBModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(FORMAT_MAGIC + "\t"):
        if not lines or not lines[0]:
            raise ModelTruncatedError("model file is empty")
        raise ModelFormatError("not a model file (bad header)")
    version = lines[0].split("\t", 1)[1]
    if version != str(FORMAT_VERSION):
        raise ModelVersionError(
            f"model format version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    if not lines[-1].startswith("checksum\t") or not text.endswith("\n"):
        raise ModelTruncatedError("model file is truncated (no checksum line)")
    body = "\n".join(lines[:-1]) + "\n"
    stored = lines[-1].split("\t", 1)[1]
    actual = "sha256:" + hashlib.sha256(body.encode("utf-8")).hexdigest()
    if stored != actual:
        raise ModelChecksumError("model checksum mismatch")

    header = lines[1:-1]
    if len(header) < 7:
        raise ModelTruncatedError("model header is incomplete")
    try:
        left, right = (int(x) for x in _expect(header[0], "spec", 2))
        (epsilon,) = (float(x) for x in _expect(header[1], "epsilon", 3))
        (scoring,) = _expect(header[2], "scoring", 4)
        senses = tuple(_expect(header[3], "senses", 5))
        (counts_field,) = _expect(header[4], "sense_counts", 6)
        sense_counts = tuple(int(x) for x in counts_field.split())
        (prior_field,) = _expect(header[5], "prior", 7)
        prior = tuple(float(x) for x in prior_field.split())
        (vocab_size,) = (int(x) for x in _expect(header[6], "vocabulary", 8))
    except ValueError as exc:
        raise ModelFormatError(f"malformed model header: {exc}") from None
    rows = header[7:]
    if len(rows) != vocab_size:
        raise ModelTruncatedError(f"expected {vocab_size} vocabulary rows, found {len(rows)}")
    vocabulary, word_counts, conditional = [], [], []
    k = len(senses)
    for offset, row in enumerate(rows):
        try:
            word, counts, probs = row.split("\t")
            counts_t = tuple(int(x) for x in counts.split())
            probs_t = tuple(float(x) for x in probs.split())
        except ValueError:
            raise ModelFormatError(f"line {offset + 10}: malformed vocabulary row") from None
        if len(counts_t) != k or len(probs_t) != k:
            raise ModelFormatError(f"line {offset + 10}: expected {k} values per sense")
        vocabulary.append(word)
        word_counts.append(counts_t)
        conditional.append(probs_t)
    if len(sense_counts) != k or len(prior) != k:
        raise ModelFormatError("sense table lengths disagree")
    return NBModel(
        spec=WindowSpec(left, right).validate(),
        senses=senses,
        vocabulary=tuple(vocabulary),
        prior=prior,
        conditional=tuple(conditional),
        epsilon=epsilon,
        sense_counts=sense_counts,
        word_counts=tuple(word_counts),
        scoring=scoring,
    )


def load_model(source: str | os.PathLike | TextIO) -> NBModel:
    """Read a model written by :func:`save_model`.

    Raises:
        ModelVersionError: unsupported format version.
        ModelTruncatedError: the file ends early.
        ModelChecksumError: contents do not match the stored digest.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    return loads_model(text)


def dumps_model(model: NBModel) -> str:
    buf = io.StringIO()
    save_model(model, buf)
    return buf.getvalue()

