"""Sense-tagged corpora: parsing, normalization, inspection and sampling.

Two line-oriented formats are understood. ``marked`` records look like::

    <id> TAB <sense> TAB <raw text with the target wrapped as @@token@@>

``pretokenized`` records carry normalized tokens and an explicit index::

    <id> TAB <sense> TAB <space separated tokens> TAB <target index>

Lines starting with ``#`` and blank lines are ignored in both formats.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

from wsd_ensemble.errors import (
    CorpusParseError,
    DuplicateIdError,
    EmptyCorpusError,
    InsufficientDataError,
)

FORMATS = ("marked", "pretokenized")

_NON_TOKEN_CHARS = re.compile(r"[^a-z0-9]")
_MARKER = re.compile(r"@@(.+?)@@")


def _clean(raw_token: str) -> str:
    return _NON_TOKEN_CHARS.sub("", raw_token.lower())


def normalize(raw: str) -> list[str]:
    """Split on whitespace, lowercase, and strip every non ``[a-z0-9]`` character.

    Tokens left empty by stripping are dropped. No stemming or stop-word
    removal is done.

    >>> normalize("U.S.-based firm's")
    ['usbased', 'firms']
    """
    tokens = []
    for piece in raw.split():
        cleaned = _clean(piece)
        if cleaned:
            tokens.append(cleaned)
    return tokens


def is_token(text: str) -> bool:
    return bool(text) and _clean(text) == text


@dataclass(frozen=True)
class Instance:
    """One sense-tagged occurrence of the target word."""

    id: str
    sense: str
    tokens: tuple[str, ...]
    target_index: int

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError(f"instance {self.id!r} has no tokens")
        if not 0 <= self.target_index < len(self.tokens):
            raise ValueError(
                f"instance {self.id!r}: target index {self.target_index} "
                f"outside 0..{len(self.tokens) - 1}"
            )

    @property
    def target(self) -> str:
        return self.tokens[self.target_index]


@dataclass(frozen=True)
class Corpus:
    """An immutable collection of instances sharing one sense inventory.

    The inventory order is fixed at construction and used for deterministic
    tie-breaking everywhere downstream.
    """

    target_word: str
    sense_inventory: tuple[str, ...]
    instances: tuple[Instance, ...]
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sense_inventory", tuple(self.sense_inventory))
        object.__setattr__(self, "instances", tuple(self.instances))
        if len(set(self.sense_inventory)) != len(self.sense_inventory):
            raise ValueError("sense inventory contains duplicates")
        known = set(self.sense_inventory)
        index = {}
        for inst in self.instances:
            if inst.sense not in known:
                raise ValueError(
                    f"instance {inst.id!r} has sense {inst.sense!r} "
                    "outside the sense inventory"
                )
            if inst.id in index:
                raise DuplicateIdError(f"duplicate instance id {inst.id!r}")
            index[inst.id] = inst
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __getitem__(self, instance_id: str) -> Instance:
        return self._index[instance_id]

    @property
    def ids(self) -> list[str]:
        return [inst.id for inst in self.instances]

    def subset(self, ids: Iterable[str]) -> Corpus:
        """Corpus of the given ids, in the given order, keeping the inventory."""
        return Corpus(
            self.target_word,
            self.sense_inventory,
            tuple(self._index[i] for i in ids),
        )


def _parse_marked(text: str, line_number: int) -> tuple[list[str], int]:
    tokens: list[str] = []
    target_index = None
    for piece in text.split():
        markers = _MARKER.findall(piece)
        if len(markers) > 1 or (markers and target_index is not None):
            raise CorpusParseError("more than one @@target@@ marker", line_number)
        cleaned = _clean(_MARKER.sub(lambda m: m.group(1), piece))
        if markers:
            if not cleaned:
                raise CorpusParseError("target token is empty after normalization", line_number)
            target_index = len(tokens)
        if cleaned:
            tokens.append(cleaned)
    if target_index is None:
        raise CorpusParseError("missing @@target@@ marker", line_number)
    return tokens, target_index


def _parse_pretokenized(fields: list[str], line_number: int) -> tuple[list[str], int]:
    if len(fields) != 4:
        raise CorpusParseError(
            f"expected 4 tab-separated fields, found {len(fields)}", line_number
        )
    tokens = fields[2].split()
    for tok in tokens:
        if not is_token(tok):
            raise CorpusParseError(f"token {tok!r} is not normalized", line_number)
    try:
        target_index = int(fields[3])
    except ValueError:
        raise CorpusParseError(f"bad target index {fields[3]!r}", line_number) from None
    if not 0 <= target_index < len(tokens):
        raise CorpusParseError(
            f"target index {target_index} outside 0..{len(tokens) - 1}", line_number
        )
    return tokens, target_index


def parse_corpus(
    stream: Iterable[str],
    format: str = "marked",
    *,
    target_word: str | None = None,
    allow_empty: bool = False,
) -> Corpus:
    """Parse a line-oriented corpus into a :class:`Corpus`.

    The sense inventory is the distinct senses in order of first appearance.
    ``target_word`` defaults to the first record's target token.

    Raises:
        CorpusParseError: a malformed record; the message names the line.
        DuplicateIdError: two records share an id.
        EmptyCorpusError: no records, unless ``allow_empty``.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {FORMATS}")
    instances: list[Instance] = []
    senses: dict[str, None] = {}
    seen: dict[str, int] = {}
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if format == "marked":
            if len(fields) != 3:
                raise CorpusParseError(
                    f"expected 3 tab-separated fields, found {len(fields)}", line_number
                )
            tokens, target_index = _parse_marked(fields[2], line_number)
        else:
            tokens, target_index = _parse_pretokenized(fields, line_number)
        instance_id, sense = fields[0].strip(), fields[1].strip()
        if not instance_id:
            raise CorpusParseError("empty instance id", line_number)
        if not sense:
            raise CorpusParseError("empty sense label", line_number)
        if instance_id in seen:
            raise DuplicateIdError(
                f"line {line_number}: duplicate instance id {instance_id!r} "
                f"(first seen on line {seen[instance_id]})"
            )
        seen[instance_id] = line_number
        senses.setdefault(sense, None)
        instances.append(Instance(instance_id, sense, tuple(tokens), target_index))
    if not instances and not allow_empty:
        raise EmptyCorpusError("corpus contains no records")
    if target_word is None:
        target_word = instances[0].target if instances else ""
    return Corpus(target_word, tuple(senses), tuple(instances))


def read_corpus(path: str | Path, format: str = "marked", **kwargs) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh, format, **kwargs)


def format_record(instance: Instance, format: str = "marked") -> str:
    if format == "marked":
        words = list(instance.tokens)
        words[instance.target_index] = f"@@{words[instance.target_index]}@@"
        return f"{instance.id}\t{instance.sense}\t{' '.join(words)}"
    if format == "pretokenized":
        return (
            f"{instance.id}\t{instance.sense}\t{' '.join(instance.tokens)}"
            f"\t{instance.target_index}"
        )
    raise ValueError(f"unknown corpus format {format!r}")


def write_corpus(corpus: Corpus, sink: TextIO, format: str = "marked") -> None:
    """Write ``corpus`` in a format :func:`parse_corpus` reads back unchanged."""
    for inst in corpus:
        sink.write(format_record(inst, format))
        sink.write("\n")


def sense_distribution(corpus: Corpus) -> dict[str, int]:
    """Instance count per sense, in inventory order, zero counts included."""
    counts = Counter(inst.sense for inst in corpus)
    return {sense: counts.get(sense, 0) for sense in corpus.sense_inventory}


def uniform_subsample(corpus: Corpus, per_sense: int, seed: int) -> Corpus:
    """Draw exactly ``per_sense`` instances of every sense, without replacement.

    Sampling uses ``random.Random(seed)``; the result is shuffled.
    """
    if per_sense < 1:
        raise ValueError("per_sense must be positive")
    by_sense: dict[str, list[Instance]] = {s: [] for s in corpus.sense_inventory}
    for inst in corpus:
        by_sense[inst.sense].append(inst)
    for sense, pool in by_sense.items():
        if len(pool) < per_sense:
            raise InsufficientDataError(sense, len(pool), per_sense)
    rng = random.Random(seed)
    chosen: list[Instance] = []
    for sense in corpus.sense_inventory:
        chosen.extend(rng.sample(by_sense[sense], per_sense))
    rng.shuffle(chosen)
    return Corpus(corpus.target_word, corpus.sense_inventory, tuple(chosen))


def corpus_from_records(
    records: Sequence[tuple[str, str, Sequence[str], int]],
    target_word: str = "",
    sense_inventory: Sequence[str] | None = None,
) -> Corpus:
    """Build a corpus from ``(id, sense, tokens, target_index)`` tuples."""
    instances = tuple(Instance(i, s, tuple(t), k) for i, s, t, k in records)
    if sense_inventory is None:
        sense_inventory = tuple(dict.fromkeys(inst.sense for inst in instances))
    return Corpus(target_word, tuple(sense_inventory), instances)
