"""Video clip database: annotation ingestion, caption segmentation,
speaker-frame filtering, a persisted embedding index, metadata-filtered
cosine retrieval and genre-keyed music selection.

Retrieval is an exhaustive linear scan over unit-norm rows; at desk scale an
approximate index would only add moving parts.
"""

from __future__ import annotations

import json
import struct
from collections import Counter
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .backends.base import GenreClassifier, TextEmbedder
from .domain import Genre, PlotSentence, TimeOfDay
from .errors import (
    CorruptIndex,
    DuplicateClipId,
    EmptyIndex,
    MissingMusicEntry,
    RejectedClip,
)
from .plotgen import segment_plot
from .scenegen import BanList, EMPTY_BANLIST, filter_banned_content

MAGIC = b"VSDB"
FORMAT_VERSION = 1

MANIFEST_NAME = "clips.jsonl"
VECTORS_NAME = "vectors.vsdb"

# Speaker-frame rule thresholds.
CENTER_BOX = 0.2          # max Chebyshev distance of the face centre from (0.5, 0.5)
AREA_RANGE = (0.05, 0.5)  # acceptable face area fraction, inclusive
MIN_RUN_SECONDS = 3       # runs shorter than this are never deleted
MAX_DRIFT = 0.05          # max pairwise Chebyshev drift within a deleted run
SPEAKER_REJECT_FRACTION = 0.8  # clips losing more than this are rejected

GENRE_TAG_THRESHOLD = 0.5

_DISCOURSE_CUES = frozenset({"and", "but", "so", "then", "because"})
_MAX_CHUNK_TOKENS = 25


@dataclass(frozen=True)
class Face:
    center_x: float
    center_y: float
    area_fraction: float
    gender: str

    def __post_init__(self):
        if not 0.0 <= self.center_x <= 1.0 or not 0.0 <= self.center_y <= 1.0:
            raise ValueError("face centre must be normalised to [0, 1]")
        if not 0.0 < self.area_fraction <= 1.0:
            raise ValueError("area_fraction must be in (0, 1]")
        if self.gender not in ("M", "F", "U"):
            raise ValueError("gender must be M, F or U")


@dataclass(frozen=True)
class FrameAnnotation:
    second: int
    faces: tuple[Face, ...]
    location_label: str = ""
    time_of_day: TimeOfDay = TimeOfDay.UNKNOWN

    def __post_init__(self):
        if self.second < 0:
            raise ValueError("second must be >= 0")
        if len(self.faces) > 32:
            raise ValueError("at most 32 faces per frame")


@dataclass(frozen=True)
class ClipSource:
    """A captioned clip before ingestion enriches it with annotations."""

    id: str
    video_uri: str
    start_s: float
    end_s: float
    caption: str

    def __post_init__(self):
        if self.start_s >= self.end_s:
            raise ValueError("start_s must be < end_s")


@dataclass(frozen=True)
class ClipRecord:
    id: str
    video_uri: str
    start_s: float
    end_s: float
    caption: str
    genre_tag: Genre | None = None
    location: str = ""
    time_of_day: TimeOfDay = TimeOfDay.UNKNOWN
    char_count: int = 0
    genders: tuple[str, ...] = ()
    embedding_row: int | None = None

    def __post_init__(self):
        if self.start_s >= self.end_s:
            raise ValueError("start_s must be < end_s")
        if not self.caption.strip():
            raise ValueError("caption must be non-empty")
        if self.char_count < 0:
            raise ValueError("char_count must be >= 0")
        if len(self.genders) != self.char_count:
            raise ValueError("genders multiset size must equal char_count")
        object.__setattr__(self, "genders", tuple(sorted(self.genders)))


def clip_to_dict(clip: ClipRecord) -> dict[str, Any]:
    return {
        "id": clip.id,
        "video_uri": clip.video_uri,
        "start_s": clip.start_s,
        "end_s": clip.end_s,
        "caption": clip.caption,
        "genre_tag": clip.genre_tag.value if clip.genre_tag else None,
        "location": clip.location,
        "time_of_day": clip.time_of_day.value,
        "char_count": clip.char_count,
        "genders": list(clip.genders),
        "embedding_row": clip.embedding_row,
    }


def clip_from_dict(data: dict[str, Any]) -> ClipRecord:
    return ClipRecord(
        id=data["id"],
        video_uri=data["video_uri"],
        start_s=float(data["start_s"]),
        end_s=float(data["end_s"]),
        caption=data["caption"],
        genre_tag=Genre(data["genre_tag"]) if data.get("genre_tag") else None,
        location=data.get("location", ""),
        time_of_day=TimeOfDay(data.get("time_of_day", "UNKNOWN")),
        char_count=int(data.get("char_count", 0)),
        genders=tuple(data.get("genders", ())),
        embedding_row=data.get("embedding_row"),
    )


# --- caption segmentation -----------------------------------------------------


def segment_caption(raw: str) -> list[str]:
    """Split a caption into sentence-like units.

    Punctuated captions reuse the plot segmentation rules; unpunctuated
    auto-captions fall back to greedy chunks of at most 25 tokens, split just
    before the last discourse cue inside the window.
    """
    if not raw.strip():
        raise ValueError("caption must be non-empty")
    if any(ch in raw for ch in ".!?"):
        return [s.text for s in segment_plot(raw)]

    tokens = raw.split()
    chunks: list[str] = []
    pos = 0
    while pos < len(tokens):
        remaining = len(tokens) - pos
        if remaining <= _MAX_CHUNK_TOKENS:
            chunks.append(" ".join(tokens[pos:]))
            break
        window = tokens[pos:pos + _MAX_CHUNK_TOKENS]
        cut = _MAX_CHUNK_TOKENS
        for i in range(len(window) - 1, 0, -1):
            if window[i].lower() in _DISCOURSE_CUES:
                cut = i
                break
        chunks.append(" ".join(tokens[pos:pos + cut]))
        pos += cut
    return chunks


# --- speaker-frame filtering ----------------------------------------------------


def _is_speaker_like(annotation: FrameAnnotation) -> bool:
    if len(annotation.faces) != 1:
        return False
    face = annotation.faces[0]
    if max(abs(face.center_x - 0.5), abs(face.center_y - 0.5)) > CENTER_BOX:
        return False
    return AREA_RANGE[0] <= face.area_fraction <= AREA_RANGE[1]


def _run_drift(run: Sequence[FrameAnnotation]) -> float:
    centers = [(a.faces[0].center_x, a.faces[0].center_y) for a in run]
    drift = 0.0
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            drift = max(drift,
                        abs(centers[i][0] - centers[j][0]),
                        abs(centers[i][1] - centers[j][1]))
    return drift


def filter_speaker_segments(
    annotations: Sequence[FrameAnnotation],
) -> list[tuple[int, int]]:
    """Drop talking-head seconds and merge what is left into [start, end) ranges.

    A second is speaker-like iff it shows exactly one face, centred within a
    0.2 box around the frame centre, with area in [0.05, 0.5]. A maximal run
    of at least 3 consecutive speaker-like seconds whose centre drifts at most
    0.05 (max pairwise) is deleted.
    """
    if not annotations:
        return []
    ordered = sorted(annotations, key=lambda a: a.second)

    deleted: set[int] = set()
    run: list[FrameAnnotation] = []

    def flush(current_run: list[FrameAnnotation]) -> None:
        if len(current_run) >= MIN_RUN_SECONDS and _run_drift(current_run) <= MAX_DRIFT:
            deleted.update(a.second for a in current_run)

    for annotation in ordered:
        if _is_speaker_like(annotation):
            if run and annotation.second != run[-1].second + 1:
                flush(run)
                run = []
            run.append(annotation)
        else:
            flush(run)
            run = []
    flush(run)

    kept = sorted(a.second for a in ordered if a.second not in deleted)
    ranges: list[tuple[int, int]] = []
    for second in kept:
        if ranges and second == ranges[-1][1]:
            ranges[-1] = (ranges[-1][0], second + 1)
        else:
            ranges.append((second, second + 1))
    return ranges


# --- clip ingestion -------------------------------------------------------------


def ingest_clip(
    source: ClipSource,
    annotations: Sequence[FrameAnnotation],
    classifier: GenreClassifier,
    banlist: BanList = EMPTY_BANLIST,
) -> ClipRecord:
    """Enrich a clip with annotation-derived metadata, or reject it.

    Rejection reasons: empty_caption, banned_caption, speaker_dominated
    (speaker filtering removed more than 80% of the annotated seconds).
    """
    if not source.caption.strip():
        raise RejectedClip("empty_caption", source.id)
    if banlist.enabled and filter_banned_content(source.caption, banlist).redactions:
        raise RejectedClip("banned_caption", source.id)

    in_range = [a for a in annotations
                if source.start_s <= a.second < source.end_s]

    if in_range:
        kept = filter_speaker_segments(in_range)
        kept_seconds = sum(end - start for start, end in kept)
        deleted_fraction = 1.0 - kept_seconds / len(in_range)
        if deleted_fraction > SPEAKER_REJECT_FRACTION:
            raise RejectedClip("speaker_dominated",
                               f"{source.id}: {deleted_fraction:.0%} deleted")

    char_count, genders = _mode_characters(in_range)
    time_of_day = _majority_time(in_range)
    location = _top_location(in_range)

    dist = classifier.classify(source.caption)
    top = dist.argmax()
    genre_tag = top if top is not None and dist.probs[top] >= GENRE_TAG_THRESHOLD else None

    return ClipRecord(
        id=source.id,
        video_uri=source.video_uri,
        start_s=source.start_s,
        end_s=source.end_s,
        caption=source.caption,
        genre_tag=genre_tag,
        location=location,
        time_of_day=time_of_day,
        char_count=char_count,
        genders=genders,
    )


def _mode_characters(
    annotations: Sequence[FrameAnnotation],
) -> tuple[int, tuple[str, ...]]:
    if not annotations:
        return 0, ()
    counts = Counter(
        (len(a.faces), tuple(sorted(f.gender for f in a.faces)))
        for a in annotations
    )
    top = max(counts.values())
    # Deterministic tie-break: smallest (count, genders) pair among the modes.
    winner = min(key for key, n in counts.items() if n == top)
    return winner[0], winner[1]


def _majority_time(annotations: Sequence[FrameAnnotation]) -> TimeOfDay:
    if not annotations:
        return TimeOfDay.UNKNOWN
    counts = Counter(a.time_of_day for a in annotations)
    top = max(counts.values())
    winners = [t for t, n in counts.items() if n == top]
    return winners[0] if len(winners) == 1 else TimeOfDay.UNKNOWN


def _top_location(annotations: Sequence[FrameAnnotation]) -> str:
    labels = Counter(a.location_label for a in annotations if a.location_label)
    if not labels:
        return ""
    top = max(labels.values())
    return min(label for label, n in labels.items() if n == top)


# --- the persisted index ---------------------------------------------------------


@dataclass(eq=False)
class VideoIndex:
    """Immutable after build/load; rows are float32 unit vectors."""

    dim: int
    rows: np.ndarray
    clips: tuple[ClipRecord, ...]
    version: int = FORMAT_VERSION

    def __len__(self) -> int:
        return len(self.clips)

    def equals(self, other: "VideoIndex") -> bool:
        return (self.dim == other.dim
                and self.version == other.version
                and self.clips == other.clips
                and np.array_equal(self.rows, other.rows))


def build_index(clips: Sequence[ClipRecord], embedder: TextEmbedder) -> VideoIndex:
    """Embed captions and lay the rows out in clip order."""
    ids = [c.id for c in clips]
    duplicates = [i for i, n in Counter(ids).items() if n > 1]
    if duplicates:
        raise DuplicateClipId(", ".join(sorted(duplicates)))

    if not clips:
        dim = embedder.embed(["probe"])[0].dim
        return VideoIndex(dim=dim, rows=np.zeros((0, dim), dtype=np.float32),
                          clips=())

    embeddings = embedder.embed([c.caption for c in clips])
    dim = embeddings[0].dim
    rows = np.zeros((len(clips), dim), dtype=np.float32)
    stored = []
    for i, (clip, emb) in enumerate(zip(clips, embeddings)):
        if emb.is_zero:
            raise RejectedClip("empty_caption",
                               f"{clip.id}: caption embeds to the zero vector")
        row = np.asarray(emb.values, dtype=np.float32)
        rows[i] = row / np.linalg.norm(row)
        stored.append(replace(clip, embedding_row=i))
    return VideoIndex(dim=dim, rows=rows, clips=tuple(stored))


def save_index(index: VideoIndex, path: str | Path) -> None:
    """Write manifest (JSONL) and matrix (VSDB binary) into a directory."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        for clip in index.clips:
            fh.write(json.dumps(clip_to_dict(clip), ensure_ascii=False) + "\n")
    with open(root / VECTORS_NAME, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", index.version))
        fh.write(struct.pack("<I", index.dim))
        fh.write(struct.pack("<I", len(index.clips)))
        fh.write(np.ascontiguousarray(index.rows, dtype="<f4").tobytes())


def load_index(path: str | Path) -> VideoIndex:
    """Read an index back, verifying magic, version, dimensions and row norms."""
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    vectors_path = root / VECTORS_NAME
    if not manifest_path.is_file() or not vectors_path.is_file():
        raise CorruptIndex("bad_manifest", f"missing files under {root}")

    clips = []
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    clips.append(clip_from_dict(json.loads(line)))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptIndex("bad_manifest", str(exc)) from None

    blob = vectors_path.read_bytes()
    if blob[:4] != MAGIC:
        raise CorruptIndex("bad_magic")
    if len(blob) < 13:
        raise CorruptIndex("row_count_mismatch", "truncated header")
    version = blob[4]
    if version != FORMAT_VERSION:
        raise CorruptIndex("bad_version", f"version byte {version}")
    dim, rows_n = struct.unpack_from("<II", blob, 5)
    if dim <= 0:
        raise CorruptIndex("dim_mismatch", "non-positive dim")
    expected = 13 + rows_n * dim * 4
    if len(blob) != expected:
        raise CorruptIndex("row_count_mismatch",
                           f"expected {expected} bytes, found {len(blob)}")
    if rows_n != len(clips):
        raise CorruptIndex("row_count_mismatch",
                           f"{rows_n} rows vs {len(clips)} manifest records")
    rows = np.frombuffer(blob[13:], dtype="<f4").reshape(rows_n, dim).copy()

    norms = np.linalg.norm(rows, axis=1)
    if rows_n and np.max(np.abs(norms - 1.0)) > 1e-5:
        raise CorruptIndex("bad_norm", "row norms outside 1 +/- 1e-5")
    for i, clip in enumerate(clips):
        if clip.embedding_row != i:
            raise CorruptIndex("bad_manifest",
                               f"clip {clip.id} embedding_row {clip.embedding_row} != {i}")
    return VideoIndex(dim=dim, rows=rows, clips=tuple(clips), version=version)


# --- retrieval --------------------------------------------------------------------


@dataclass(frozen=True)
class RetrievalConstraints:
    genre: Genre | None = None
    time_of_day: TimeOfDay | None = None
    min_char_count: int | None = None
    required_genders: tuple[str, ...] = ()


# Relaxation walks this list back to front.
_FILTER_ORDER = ("genre", "time", "char_count", "genders")


def _passes(clip: ClipRecord, constraints: RetrievalConstraints,
            active: frozenset[str]) -> bool:
    if "genre" in active and constraints.genre is not None:
        if clip.genre_tag != constraints.genre:
            return False
    if "time" in active and constraints.time_of_day not in (None, TimeOfDay.UNKNOWN):
        if clip.time_of_day is not TimeOfDay.UNKNOWN \
                and clip.time_of_day is not constraints.time_of_day:
            return False
    if "char_count" in active and constraints.min_char_count is not None:
        if clip.char_count < constraints.min_char_count:
            return False
    if "genders" in active and constraints.required_genders:
        required = Counter(constraints.required_genders)
        have = Counter(clip.genders)
        if any(have[g] < n for g, n in required.items()):
            return False
    return True


@dataclass(frozen=True)
class RetrievalResult:
    hits: tuple[tuple[ClipRecord, float], ...]
    relaxed: bool = False
    relaxed_filters: tuple[str, ...] = ()

    @property
    def best(self) -> tuple[ClipRecord, float] | None:
        return self.hits[0] if self.hits else None


def retrieve_clip(
    embedder: TextEmbedder,
    query_sentence: PlotSentence,
    index: VideoIndex,
    constraints: RetrievalConstraints = RetrievalConstraints(),
) -> RetrievalResult:
    """Rank clips by caption cosine similarity under hard metadata filters.

    When every clip is filtered out the constraints are relaxed one at a time
    in the order genders, char_count, time, genre, and the result is flagged.
    """
    if not index.clips:
        raise EmptyIndex("video index holds no clips")

    query = np.asarray(embedder.embed([query_sentence.text])[0].values,
                       dtype=np.float64)

    active = set(_FILTER_ORDER)
    relaxed: list[str] = []
    survivors = [c for c in index.clips if _passes(c, constraints, frozenset(active))]
    for name in reversed(_FILTER_ORDER):
        if survivors:
            break
        active.discard(name)
        if _constraint_set(constraints, name):
            relaxed.append(name)
        survivors = [c for c in index.clips
                     if _passes(c, constraints, frozenset(active))]

    scored = [
        (clip, float(np.dot(index.rows[clip.embedding_row].astype(np.float64), query)))
        for clip in survivors
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return RetrievalResult(hits=tuple(scored), relaxed=bool(relaxed),
                           relaxed_filters=tuple(relaxed))


def _constraint_set(constraints: RetrievalConstraints, name: str) -> bool:
    if name == "genre":
        return constraints.genre is not None
    if name == "time":
        return constraints.time_of_day not in (None, TimeOfDay.UNKNOWN)
    if name == "char_count":
        return constraints.min_char_count is not None
    return bool(constraints.required_genders)


# --- background music ---------------------------------------------------------------


@dataclass(frozen=True)
class MusicTrack:
    uri: str
    mood_tag: str


def load_music_map(path: str | Path) -> dict[Genre, MusicTrack]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return {
        Genre(key): MusicTrack(uri=value["uri"], mood_tag=value["mood_tag"])
        for key, value in doc.items()
    }


@lru_cache(maxsize=1)
def default_music_map() -> dict[Genre, MusicTrack]:
    ref = resources.files("vscript.data").joinpath("music.json")
    doc = json.loads(ref.read_text(encoding="utf-8"))
    return {
        Genre(key): MusicTrack(uri=value["uri"], mood_tag=value["mood_tag"])
        for key, value in doc.items()
    }


def select_music(genre: Genre, music: dict[Genre, MusicTrack] | None = None) -> MusicTrack:
    """Deterministic genre -> track lookup."""
    table = default_music_map() if music is None else music
    try:
        return table[genre]
    except KeyError:
        raise MissingMusicEntry(genre.value) from None
