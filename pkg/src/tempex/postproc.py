"""Post-processing identification pipeline over raw CRF output.

Three stages: probabilistic correction (averaging CRF marginals with
lexical label priors), a BIO fixer, and a threshold-based label switcher.
The default stage order is prob_correction, bio_fixer,
threshold_switcher, bio_fixer, with switch threshold 0.87.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence as Seq

import numpy as np

from .corpus import Document, LABELS, Token, bio_to_spans
from .crf import MarginalTable

DEFAULT_THRESHOLD = 0.87
DEFAULT_STAGES = ("prob_correction", "bio_fixer", "threshold_switcher",
                  "bio_fixer")

STAGE_NAMES = frozenset({"prob_correction", "bio_fixer",
                         "threshold_switcher"})

_PUNCT_RE = re.compile(r"[^\sA-Za-z0-9]+")


class PostprocError(ValueError):
    pass


@dataclass
class PriorTable:
    """Lower-cased token -> empirical B/I/O distribution.

    Only tokens that occurred inside gold timex spans at least twice are
    stored; the distribution itself counts all occurrences of the token.
    """
    counts: dict[str, np.ndarray] = field(default_factory=dict)
    in_span_counts: dict[str, int] = field(default_factory=dict)

    def distribution(self, surface: str) -> Optional[np.ndarray]:
        c = self.counts.get(surface.lower())
        if c is None:
            return None
        return c / c.sum()

    def __contains__(self, surface: str) -> bool:
        return surface.lower() in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def save(self, path) -> None:
        lines = []
        for tok in sorted(self.counts):
            c = self.counts[tok]
            lines.append("\t".join(
                [tok, str(int(c[0])), str(int(c[1])), str(int(c[2])),
                 str(self.in_span_counts[tok])]))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PriorTable":
        table = cls()
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise PostprocError(
                    f"line {lineno}: expected 5 columns, got {len(cols)}")
            tok, b, i, o, in_span = cols
            table.counts[tok] = np.array([int(b), int(i), int(o)], float)
            table.in_span_counts[tok] = int(in_span)
        return table


def build_prior_table(docs: Iterable[Document]) -> PriorTable:
    """Harvest label priors from a human-annotated corpus.

    Tokens are keyed lower-cased; the min-in-span-count-2 filter decides
    which tokens are kept.
    """
    label_counts: dict[str, np.ndarray] = {}
    in_span: dict[str, int] = {}
    any_labels = False
    for doc in docs:
        for seq in doc.sequences:
            if seq.gold_labels is None:
                continue
            any_labels = True
            for tok, lab in zip(seq.tokens, seq.gold_labels):
                key = tok.surface.lower()
                if key not in label_counts:
                    label_counts[key] = np.zeros(3)
                    in_span[key] = 0
                label_counts[key][LABELS.index(lab)] += 1
                if lab in ("B", "I"):
                    in_span[key] += 1
    if not any_labels:
        raise PostprocError("corpus has no gold labels")
    table = PriorTable()
    for key, count in label_counts.items():
        if in_span[key] >= 2:
            table.counts[key] = count
            table.in_span_counts[key] = in_span[key]
    return table


def _argmax_label(row: np.ndarray) -> str:
    return LABELS[int(np.argmax(row))]  # first max wins: B < I < O


def probabilistic_correction(marginals: MarginalTable, tokens: Seq[Token],
                             priors: PriorTable
                             ) -> tuple[MarginalTable, list[str]]:
    """Average CRF marginals with the lexical priors, token by token.

    Tokens absent from the prior table keep their CRF row.  Returns the
    adjusted table and its per-position argmax labels.
    """
    if len(marginals) != len(tokens):
        raise PostprocError("marginals and tokens differ in length")
    probs = marginals.probs.copy()
    for i, tok in enumerate(tokens):
        prior = priors.distribution(tok.surface)
        if prior is not None:
            probs[i] = (probs[i] + prior) / 2.0
    adjusted = MarginalTable(probs, marginals.log_z)
    labels = [_argmax_label(row) for row in probs]
    return adjusted, labels


def is_punctuation(tok: Token) -> bool:
    return _PUNCT_RE.fullmatch(tok.surface) is not None


def bio_fixer(labels: Seq[str], tokens: Seq[Token]) -> list[str]:
    """Repair invalid label sequences and merge adjacent expressions.

    O followed by I becomes B (the O); a leading I becomes B.  A B
    directly preceded by B or I is merged into the running expression
    (B -> I) unless either adjacent token is punctuation.
    """
    out = list(labels)
    if out and out[0] == "I":
        out[0] = "B"
    for i in range(len(out) - 1):
        if out[i] == "O" and out[i + 1] == "I":
            out[i] = "B"
    for i in range(1, len(out)):
        if (out[i] == "B" and out[i - 1] in ("B", "I")
                and not is_punctuation(tokens[i - 1])
                and not is_punctuation(tokens[i])):
            out[i] = "I"
    return out


def threshold_label_switcher(labels: Seq[str], tokens: Seq[Token],
                             priors: PriorTable,
                             threshold: float = DEFAULT_THRESHOLD
                             ) -> list[str]:
    """Force the prior-argmax label when its prior probability is
    strictly greater than the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise PostprocError(f"threshold {threshold} outside [0, 1]")
    out = list(labels)
    for i, tok in enumerate(tokens):
        prior = priors.distribution(tok.surface)
        if prior is not None and float(prior.max()) > threshold:
            out[i] = _argmax_label(prior)
    return out


@dataclass(frozen=True)
class PipelineConfig:
    threshold: float = DEFAULT_THRESHOLD
    stages: tuple[str, ...] = DEFAULT_STAGES

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise PostprocError(f"threshold {self.threshold} outside [0, 1]")
        for name in self.stages:
            if name not in STAGE_NAMES:
                raise PostprocError(f"unknown pipeline stage {name!r}")


def run_pipeline(marginals: MarginalTable, tokens: Seq[Token],
                 priors: PriorTable,
                 config: PipelineConfig = PipelineConfig()) -> list[str]:
    """Apply the configured stages; the initial labels are the raw CRF
    argmax of `marginals`."""
    labels = [_argmax_label(row) for row in marginals.probs]
    for stage in config.stages:
        if stage == "prob_correction":
            _, labels = probabilistic_correction(marginals, tokens, priors)
        elif stage == "bio_fixer":
            labels = bio_fixer(labels, tokens)
        elif stage == "threshold_switcher":
            labels = threshold_label_switcher(labels, tokens, priors,
                                              config.threshold)
    return labels
