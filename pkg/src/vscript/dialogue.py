"""Plot-guided dialogue generation framed as inverse dialogue summarization.

The inference prompt and the corpus-inversion preprocessor share one template
so a model trained on the inverted corpus sees exactly the prompt shape the
pipeline sends at runtime.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .backends.base import GenerationRequest, TextGenerator
from .domain import DialogueTurn, PlotSentence
from .errors import DialogueParseError, MalformedRecord

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE = "Summary: {summary}\nDialogue:\n"
END_MARKER = "<|endofdialogue|>"
STOP_MARKER = "\n\n"

# "Name: utterance" where the name is 1-3 capitalized tokens, <= 30 chars.
_TURN_RE = re.compile(
    r"^(?P<name>[A-Z][\w.'-]*(?: [A-Z][\w.'-]*){0,2}): ?(?P<utterance>.*)$")

FALLBACK_SPEAKER = "NARRATOR"


@dataclass(frozen=True)
class SummarizationRecord:
    """One summary/dialogue pair from a dialogue-summarization corpus."""

    summary: str
    dialogue_text: str


@dataclass(frozen=True)
class Dialogue:
    turns: tuple[DialogueTurn, ...]
    source_sentence: PlotSentence
    raw_text: str
    is_fallback: bool = False

    @property
    def is_monologue(self) -> bool:
        return len({t.speaker for t in self.turns}) < 2

    @property
    def distinct_speakers(self) -> int:
        return len({t.speaker for t in self.turns})


def build_dialogue_prompt(sentence: PlotSentence) -> str:
    return PROMPT_TEMPLATE.format(summary=sentence.text)


def parse_dialogue(raw: str) -> list[DialogueTurn]:
    """Turn generated text into dialogue turns.

    Lines matching "Name: utterance" start a turn; other lines continue the
    previous turn's utterance. Leading non-matching lines are discarded, and a
    trailing turn that never received an utterance is dropped.
    """
    turns: list[tuple[str, str]] = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        match = _TURN_RE.match(line)
        if match and len(match.group("name")) <= 30:
            turns.append((match.group("name"), match.group("utterance").strip()))
        elif turns:
            speaker, utterance = turns[-1]
            turns[-1] = (speaker, f"{utterance} {line}".strip())
    while turns and not turns[-1][1]:
        turns.pop()
    turns = [(s, u) for s, u in turns if u]
    if not turns:
        raise DialogueParseError("no dialogue turns found")
    return [DialogueTurn(speaker=s, utterance=u) for s, u in turns]


def format_turns(turns: tuple[DialogueTurn, ...] | list[DialogueTurn]) -> str:
    """Inverse of parse_dialogue for well-formed turns: "Name: utterance" lines."""
    return "\n".join(f"{t.speaker}: {t.utterance}" for t in turns)


def generate_dialogue(
    generator: TextGenerator,
    sentence: PlotSentence,
    seed: int,
    max_new_tokens: int = 160,
    top_k: int = 4,
    temperature: float = 1.0,
) -> Dialogue:
    """One-shot dialogue generation for a plot sentence.

    On a parse failure the generation is retried once with seed+1; a second
    failure produces a flagged single-turn narrator fallback so the pipeline
    never stalls on one bad sample.
    """
    prompt = build_dialogue_prompt(sentence)
    raw = ""
    for attempt_seed in (seed, seed + 1):
        raw = generator.generate(GenerationRequest(
            prompt=prompt,
            max_new_tokens=max_new_tokens,
            top_k=top_k,
            temperature=temperature,
            num_candidates=1,
            seed=attempt_seed % 2**64,
            stop_marker=STOP_MARKER,
        ))[0]
        try:
            turns = parse_dialogue(raw)
        except DialogueParseError:
            logger.warning("unparseable dialogue for sentence %d (seed %d)",
                           sentence.index, attempt_seed)
            continue
        return Dialogue(turns=tuple(turns), source_sentence=sentence, raw_text=raw)
    fallback = DialogueTurn(speaker=FALLBACK_SPEAKER, utterance=sentence.text)
    return Dialogue(turns=(fallback,), source_sentence=sentence,
                    raw_text=raw, is_fallback=True)


def invert_summarization_corpus(records: list[SummarizationRecord]) -> list[str]:
    """Produce training strings for the inverse-summarization fine-tune."""
    out = []
    for i, record in enumerate(records):
        if not record.summary.strip():
            raise MalformedRecord("empty summary", record_index=i)
        if not record.dialogue_text.strip():
            raise MalformedRecord("empty dialogue", record_index=i)
        if not any(_TURN_RE.match(line.strip())
                   for line in record.dialogue_text.splitlines()):
            raise MalformedRecord("no line matches the turn pattern", record_index=i)
        out.append(PROMPT_TEMPLATE.format(summary=record.summary)
                   + f"{record.dialogue_text}\n{END_MARKER}")
    return out


_PERSON_TAG_RE = re.compile(r"#(\w+)#")


def load_corpus_records(path: str | Path) -> list[SummarizationRecord]:
    """Read {summary, dialogue} records from a JSONL file.

    Speaker tags of the form #Person1# are normalised to Person1 so both
    source corpora share one turn grammar.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                summary = doc["summary"]
                dialogue = doc["dialogue"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedRecord(f"bad JSONL line: {exc}", record_index=i) from None
            dialogue = _PERSON_TAG_RE.sub(r"\1", dialogue)
            records.append(SummarizationRecord(summary=summary, dialogue_text=dialogue))
    return records


def write_training_file(strings: list[str], path: str | Path) -> None:
    """Write one training string per JSONL line; newlines survive JSON quoting."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in strings:
            fh.write(json.dumps({"text": s}, ensure_ascii=False) + "\n")
