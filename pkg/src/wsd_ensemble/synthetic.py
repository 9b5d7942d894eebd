"""Synthetic sense-tagged corpora with known structure.

These stand in for the real *line* and *interest* data in tests, demos and
the CLI smoke runs. Every generator is deterministic for a given seed.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from wsd_ensemble.corpus import Corpus, Instance

LINE_SENSES = {
    "product": 2218, "text": 405, "phone": 429,
    "queue": 349, "division": 376, "cord": 371,
}
INTEREST_SENSES = {
    "money": 1252, "share": 500, "attention": 361,
    "advantage": 178, "activity": 66, "cause": 11,
}


def _filler_vocab(size: int) -> list[str]:
    return [f"f{i:03d}" for i in range(size)]


def separable_corpus(
    senses: Sequence[str] = ("alpha", "beta", "gamma"),
    per_sense: int = 100,
    seed: int = 0,
    filler_size: int = 20,
    max_left: int = 60,
    max_right: int = 60,
    target: str = "line",
) -> Corpus:
    """Corpus where the token just left of the target names the sense.

    The keyword ``key<sense>`` never appears anywhere else, so any classifier
    whose left window is at least one word can separate the senses perfectly.
    Other tokens come from a small shared vocabulary so that every filler word
    is seen with every sense.
    """
    rng = random.Random(seed)
    filler = _filler_vocab(filler_size)
    labels = [s for s in senses for _ in range(per_sense)]
    rng.shuffle(labels)
    instances = []
    for n, sense in enumerate(labels):
        left = [rng.choice(filler) for _ in range(rng.randint(0, max_left - 1))]
        right = [rng.choice(filler) for _ in range(rng.randint(0, max_right))]
        tokens = left + [f"key{sense}", target] + right
        instances.append(Instance(f"s{n:05d}", sense, tuple(tokens), len(left) + 1))
    return Corpus(target, tuple(senses), tuple(instances))


@dataclass(frozen=True)
class CueSlot:
    """One informative position relative to the target.

    ``side`` is ``"left"``, ``"right"`` or ``"both"``. The slot draws ``count``
    independent cues; each one writes ``burst`` words of its sense's cue
    vocabulary at random distances in the inclusive ``distances`` band. A
    burst carries one cue's worth of evidence spread over many words, which
    Naive Bayes over-counts. With probability ``p_true`` the cue word
    belongs to the instance's sense, with ``p_other`` to one of the other
    senses (uniformly), otherwise it is neutral (a plain filler word).
    """

    side: str
    distances: tuple[int, int]
    p_true: float
    p_other: float
    words_per_sense: int = 2
    count: int = 1
    burst: int = 1


DEFAULT_SLOTS = (
    CueSlot("left", (1, 1), 0.55, 0.15),
    CueSlot("right", (1, 2), 0.45, 0.15),
    CueSlot("left", (3, 5), 0.45, 0.2),
    CueSlot("right", (3, 5), 0.4, 0.2),
    CueSlot("left", (8, 25), 0.4, 0.2),
    CueSlot("right", (8, 25), 0.4, 0.2),
)


def _zipf_sampler(vocab: list[str], rng: random.Random, exponent: float = 1.0):
    weights = [1.0 / (rank + 1) ** exponent for rank in range(len(vocab))]
    cum = list(itertools.accumulate(weights))

    def draw() -> str:
        return rng.choices(vocab, cum_weights=cum, k=1)[0]

    return draw


def noisy_corpus(
    sense_counts: Mapping[str, int] | None = None,
    seed: int = 0,
    slots: Sequence[CueSlot] = DEFAULT_SLOTS,
    filler_size: int = 120,
    context: int = 30,
    target: str = "interest",
) -> Corpus:
    """Corpus whose senses are signalled by several partially reliable cues.

    Each cue slot sits in its own distance band, so narrow, medium and wide
    windows see different evidence, while Zipf-distributed filler words add
    sampling noise that grows with window size. :func:`bayes_optimal_accuracy`
    gives the best accuracy any classifier can reach on this distribution.
    """
    if sense_counts is None:
        sense_counts = {"alpha": 120, "beta": 120, "gamma": 120}
    for slot in slots:
        lo, hi = slot.distances
        if not 1 <= lo <= hi <= context:
            raise ValueError(f"cue band {slot.distances} does not fit a context of {context}")
    senses = list(sense_counts)
    rng = random.Random(seed)
    draw_filler = _zipf_sampler(_filler_vocab(filler_size), rng)
    labels = [s for s in senses for _ in range(sense_counts[s])]
    rng.shuffle(labels)
    instances = []
    for n, sense in enumerate(labels):
        left = [draw_filler() for _ in range(context)]
        right = [draw_filler() for _ in range(context)]
        for k, slot in enumerate(slots):
            band = range(slot.distances[0], slot.distances[1] + 1)
            sides = ("left", "right") if slot.side == "both" else (slot.side,)
            places = [(side, d) for side in sides for d in band]
            spots = rng.sample(places, slot.count * slot.burst)
            for c in range(slot.count):
                u = rng.random()
                if u < slot.p_true:
                    cue_sense = sense
                elif u < slot.p_true + slot.p_other:
                    cue_sense = rng.choice([s for s in senses if s != sense])
                else:
                    continue
                for side, distance in spots[c * slot.burst:(c + 1) * slot.burst]:
                    word = f"c{k}{cue_sense}{rng.randrange(slot.words_per_sense)}"
                    (left if side == "left" else right)[distance - 1] = word
        tokens = list(reversed(left)) + [target] + right
        instances.append(Instance(f"n{n:05d}", sense, tuple(tokens), context))
    return Corpus(target, tuple(senses), tuple(instances))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def bayes_optimal_accuracy(
    sense_counts: Mapping[str, int] | None = None,
    slots: Sequence[CueSlot] = DEFAULT_SLOTS,
) -> float:
    """Exact Bayes-optimal accuracy for :func:`noisy_corpus`'s distribution.

    Only the cue outcomes (neutral, or pointing at some sense) carry sense
    information; filler, cue positions and the choice of word within a
    sense's cue set do not. Cues with the same reliabilities are pooled, and
    every vector of outcome counts is enumerated with its multinomial weight;
    the accuracy is the sum over vectors of the largest joint probability.
    """
    if sense_counts is None:
        sense_counts = {"alpha": 120, "beta": 120, "gamma": 120}
    senses = list(sense_counts)
    k = len(senses)
    total = sum(sense_counts.values())
    prior = [sense_counts[s] / total for s in senses]

    pooled: dict[tuple[float, float], int] = {}
    for slot in slots:
        key = (slot.p_true, slot.p_other)
        pooled[key] = pooled.get(key, 0) + slot.count

    # per group: list of (count vector, [p(vector | sense) for each sense])
    groups = []
    for (p_true, p_other), n in pooled.items():
        p_none = 1.0 - p_true - p_other
        p_wrong = p_other / (k - 1) if k > 1 else 0.0
        table = []
        for vec in _compositions(n, k + 1):
            coef = math.factorial(n)
            for c in vec:
                coef //= math.factorial(c)
            likes = []
            for j in range(k):
                p = coef * p_none ** vec[0]
                for t in range(k):
                    p *= (p_true if t == j else p_wrong) ** vec[t + 1]
                likes.append(p)
            table.append(likes)
        groups.append(table)

    rate = 0.0
    for combo in itertools.product(*groups):
        best = 0.0
        for j in range(k):
            p = prior[j]
            for likes in combo:
                p *= likes[j]
            best = max(best, p)
        rate += best
    return rate


def table_corpus(counts: Mapping[str, int], seed: int = 0, target: str = "line") -> Corpus:
    """Small-context corpus with exactly ``counts`` instances per sense."""
    slots = (CueSlot("left", (1, 2), 0.6, 0.1), CueSlot("right", (1, 3), 0.5, 0.1))
    return noisy_corpus(counts, seed=seed, slots=slots, filler_size=60, context=6, target=target)



# Local cues sit at the outer edge of the narrow and medium ranges and a
# topic cue is spread over many wide-range words. Each range category then
# sees a different slice of the evidence, which is where a per-category
# ensemble pays off over any single category or the full grid.
ABLATION_SENSES = {"alpha": 200, "beta": 200, "gamma": 200}
ABLATION_SLOTS = (
    CueSlot("left", (2, 2), 0.5, 0.15),
    CueSlot("right", (2, 2), 0.5, 0.15),
    CueSlot("left", (5, 5), 0.4, 0.2),
    CueSlot("right", (5, 5), 0.4, 0.2),
    CueSlot("both", (6, 45), 0.6, 0.4, words_per_sense=25, burst=8),
)


def ablation_corpus(seed: int = 0) -> Corpus:
    """Noisy 600-instance corpus used for the vote-rule ablation check."""
    return noisy_corpus(ABLATION_SENSES, seed=seed, slots=ABLATION_SLOTS,
                        filler_size=300, context=50)
