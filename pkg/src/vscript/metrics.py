"""Deterministic text metrics: Distinct-n, Repeat@8, corpus BLEU, sentence
similarity, genre accuracy and mean perplexity.

All token-level metrics share one canonical tokenizer (lowercase, whitespace
split, punctuation broken out into separate tokens) so numbers are comparable
across metrics.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .backends.base import (
    GenreClassifier,
    PerplexityScorer,
    TextEmbedder,
    cosine,
)
from .domain import Genre
from .errors import (
    EmptyCandidate,
    EmptySequence,
    LengthMismatch,
    NoNgrams,
)

REPEAT_WINDOW = 8
BLEU_MAX_ORDER = 4

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Canonical tokenizer shared by every token-level metric."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: Sequence[str], n: int) -> Iterable[tuple[str, ...]]:
    return (tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def distinct_n(corpus: Sequence[Sequence[str]], n: int) -> float:
    """Unique n-grams over total n-gram occurrences, pooled across the corpus."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seen: set[tuple[str, ...]] = set()
    total = 0
    for seq in corpus:
        for gram in _ngrams(seq, n):
            seen.add(gram)
            total += 1
    if total == 0:
        raise NoNgrams(f"no sequence yields an {n}-gram")
    return len(seen) / total


def repeat_rate(seq: Sequence[str]) -> float:
    """Percentage of tokens that also occur among their 8 predecessors."""
    if not seq:
        raise EmptySequence("sequence must be non-empty")
    repeats = 0
    for i in range(1, len(seq)):
        window = seq[max(0, i - REPEAT_WINDOW):i]
        if seq[i] in window:
            repeats += 1
    return 100.0 * repeats / len(seq)


def corpus_bleu(
    candidates: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
) -> float:
    """Corpus-level BLEU-4 with clipping.

    A zero-numerator precision for order n is smoothed to 1/(2 * denominator);
    the brevity penalty uses pooled candidate/reference lengths.
    """
    if len(candidates) != len(references):
        raise LengthMismatch(
            f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise LengthMismatch("corpus must be non-empty")
    if any(len(c) == 0 for c in candidates):
        raise EmptyCandidate("candidates must be non-empty token sequences")

    c_len = sum(len(c) for c in candidates)
    r_len = sum(len(r) for r in references)

    log_precision_sum = 0.0
    for n in range(1, BLEU_MAX_ORDER + 1):
        numerator = 0
        denominator = 0
        for cand, ref in zip(candidates, references):
            cand_counts = Counter(_ngrams(cand, n))
            ref_counts = Counter(_ngrams(ref, n))
            denominator += sum(cand_counts.values())
            numerator += sum(min(count, ref_counts[gram])
                             for gram, count in cand_counts.items())
        denominator = max(denominator, 1)
        precision = numerator / denominator if numerator > 0 else 1.0 / (2 * denominator)
        log_precision_sum += math.log(precision)

    brevity = 1.0 if c_len > r_len else math.exp(1.0 - r_len / c_len)
    return brevity * math.exp(log_precision_sum / BLEU_MAX_ORDER)


def sentence_similarity(embedder: TextEmbedder, a: str, b: str) -> float:
    """Cosine similarity of the two sentence embeddings; 0.0 when either side
    is the zero-embedding sentinel."""
    if not a.strip() or not b.strip():
        raise ValueError("both texts must be non-empty")
    emb_a, emb_b = embedder.embed([a, b])
    if emb_a.is_zero or emb_b.is_zero:
        return 0.0
    return cosine(emb_a.values, emb_b.values)


def genre_accuracy(
    classifier: GenreClassifier,
    texts: Sequence[str],
    targets: Sequence[Genre],
) -> float:
    """Fraction of texts whose classifier argmax equals the target genre.

    A tied argmax counts as incorrect.
    """
    if len(texts) != len(targets):
        raise LengthMismatch(f"{len(texts)} texts vs {len(targets)} targets")
    if not texts:
        raise LengthMismatch("texts must be non-empty")
    if any(t is Genre.GENRE_FREE for t in targets):
        raise ValueError("targets must be control genres, not GENRE_FREE")
    correct = 0
    for text, target in zip(texts, targets):
        if classifier.classify(text).argmax() is target:
            correct += 1
    return correct / len(texts)


def mean_perplexity(scorer: PerplexityScorer, texts: Sequence[str]) -> float:
    """Token-weighted corpus perplexity from per-text NLL scores."""
    if not texts:
        raise ValueError("texts must be non-empty")
    total_nll = 0.0
    total_tokens = 0
    for text in texts:
        score = scorer.score(text)
        total_nll += score.mean_nll_per_token * score.token_count
        total_tokens += score.token_count
    return math.exp(total_nll / total_tokens)


@dataclass(frozen=True)
class MetricReport:
    distinct: dict[int, float] | None = None
    repeat_pct: float | None = None
    bleu: float | None = None
    sent_sim: float | None = None
    genre_acc: float | None = None
    ppl: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "distinct": {str(n): v for n, v in self.distinct.items()}
                        if self.distinct is not None else None,
            "repeat_pct": self.repeat_pct,
            "bleu": self.bleu,
            "sent_sim": self.sent_sim,
            "genre_acc": self.genre_acc,
            "ppl": self.ppl,
        }


KNOWN_METRICS = ("distinct", "repeat", "bleu", "sentsim", "genreacc", "ppl")


def compute_report(
    candidates: Sequence[str],
    metrics: Sequence[str],
    references: Sequence[str] | None = None,
    targets: Sequence[Genre] | None = None,
    embedder: TextEmbedder | None = None,
    classifier: GenreClassifier | None = None,
    scorer: PerplexityScorer | None = None,
) -> MetricReport:
    """Assemble a MetricReport over candidate texts for the requested metrics."""
    unknown = [m for m in metrics if m not in KNOWN_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics: {', '.join(unknown)}")
    token_seqs = [tokenize(t) for t in candidates]

    distinct = None
    if "distinct" in metrics:
        distinct = {n: distinct_n(token_seqs, n) for n in (1, 2, 3)}
    repeat_pct = None
    if "repeat" in metrics:
        rates = [repeat_rate(seq) for seq in token_seqs if seq]
        if not rates:
            raise EmptySequence("no tokens to score for repeat")
        repeat_pct = sum(rates) / len(rates)
    bleu = None
    if "bleu" in metrics:
        if references is None:
            raise ValueError("bleu requires references")
        bleu = corpus_bleu(token_seqs, [tokenize(t) for t in references])
    sent_sim = None
    if "sentsim" in metrics:
        if references is None or embedder is None:
            raise ValueError("sentsim requires references and the embedder")
        if len(references) != len(candidates):
            raise LengthMismatch("sentsim needs one reference per candidate")
        sims = [sentence_similarity(embedder, c, r)
                for c, r in zip(candidates, references)]
        sent_sim = sum(sims) / len(sims)
    genre_acc = None
    if "genreacc" in metrics:
        if targets is None or classifier is None:
            raise ValueError("genreacc requires targets and the classifier")
        genre_acc = genre_accuracy(classifier, candidates, targets)
    ppl = None
    if "ppl" in metrics:
        if scorer is None:
            raise ValueError("ppl requires the scorer")
        ppl = mean_perplexity(scorer, candidates)

    return MetricReport(distinct=distinct, repeat_pct=repeat_pct, bleu=bleu,
                        sent_sim=sent_sim, genre_acc=genre_acc, ppl=ppl)
