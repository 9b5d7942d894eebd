import itertools

import pytest

from wsd_ensemble.synthetic import (
    ABLATION_SENSES,
    ABLATION_SLOTS,
    DEFAULT_SLOTS,
    CueSlot,
    ablation_corpus,
    bayes_optimal_accuracy,
    noisy_corpus,
    separable_corpus,
)
from wsd_ensemble.corpus import sense_distribution


def brute_bayes(sense_counts, slots):
    """Enumerate every cue's outcome (neutral or a sense) one by one."""
    senses = list(sense_counts)
    k = len(senses)
    total = sum(sense_counts.values())
    cues = [slot for slot in slots for _ in range(slot.count)]
    rate = 0.0
    for outcome in itertools.product(range(k + 1), repeat=len(cues)):
        joints = []
        for j in range(k):
            p = sense_counts[senses[j]] / total
            for slot, o in zip(cues, outcome):
                if o == 0:
                    p *= 1 - slot.p_true - slot.p_other
                elif o - 1 == j:
                    p *= slot.p_true
                else:
                    p *= slot.p_other / (k - 1)
            joints.append(p)
        rate += max(joints)
    return rate


@pytest.mark.parametrize("counts, slots", [
    ({"a": 1, "b": 1, "c": 1}, DEFAULT_SLOTS),
    ({"a": 5, "b": 2, "c": 1}, DEFAULT_SLOTS[:4]),
    ({"a": 3, "b": 1}, (CueSlot("left", (1, 3), 0.5, 0.2, count=3),)),
    (ABLATION_SENSES, ABLATION_SLOTS),
])
def test_bayes_optimal_matches_brute_force(counts, slots):
    assert bayes_optimal_accuracy(counts, slots) == pytest.approx(brute_bayes(counts, slots), abs=1e-12)


def test_bayes_optimal_bounds():
    assert bayes_optimal_accuracy({"a": 3, "b": 1}, ()) == 0.75
    sure = (CueSlot("left", (1, 1), 1.0, 0.0),)
    assert bayes_optimal_accuracy({"a": 1, "b": 1}, sure) == pytest.approx(1.0)


def test_noisy_corpus_shape():
    corpus = noisy_corpus({"x": 30, "y": 10}, seed=1, context=25)
    assert sense_distribution(corpus) == {"x": 30, "y": 10}
    for inst in corpus:
        assert len(inst.tokens) == 51 and inst.target_index == 25
        assert inst.target == "interest"
    with pytest.raises(ValueError):
        noisy_corpus(seed=1, context=12)


def test_cues_stay_in_their_band():
    slots = (CueSlot("right", (3, 5), 0.9, 0.1),)
    for inst in noisy_corpus({"a": 50, "b": 50}, seed=2, slots=slots, context=10):
        t = inst.target_index
        for i, tok in enumerate(inst.tokens):
            if tok.startswith("c0"):
                assert 3 <= i - t <= 5


def test_deterministic():
    assert noisy_corpus(seed=3) == noisy_corpus(seed=3)
    assert ablation_corpus(1) == ablation_corpus(1)
    assert noisy_corpus(seed=3) != noisy_corpus(seed=4)


def test_separable_keyword_oracle():
    corpus = separable_corpus(per_sense=100, seed=5)
    assert len(corpus) == 300
    # brute force: the keyword for each sense occurs only in that sense, always just left of the target
    where = {}
    for inst in corpus:
        assert inst.tokens[inst.target_index - 1] == f"key{inst.sense}"
        for tok in inst.tokens:
            if tok.startswith("key"):
                where.setdefault(tok, set()).add(inst.sense)
    assert where == {f"key{s}": {s} for s in corpus.sense_inventory}
