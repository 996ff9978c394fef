"""End-to-end pipeline execution: steerable sessions and their persistence.

A session runs plot -> per-sentence dialogue -> scene description -> script
assembly -> per-sentence clip retrieval -> music. Steering appends to an
existing session: only the continuation is generated and expanded, previously
generated scenes are never touched.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .backends.base import BackendSet
from .config import EngineConfig
from .dialogue import generate_dialogue
from .domain import (
    Genre,
    Plot,
    PlotSentence,
    Script,
    plot_from_dict,
    plot_to_dict,
    render_script,
    script_from_dict,
    script_to_dict,
)
from .errors import (
    CorruptSessionRecord,
    EmptyIndex,
    InvalidSteer,
    UnknownSession,
    VScriptError,
)
from .plotgen import generate_plot_candidates, make_plot, rescore_and_select
from .scenegen import BanList, EMPTY_BANLIST, build_scene, generate_scene_description
from .util import mix64, new_ulid, normalize_ws
from .videostore import (
    ClipRecord,
    MusicTrack,
    RetrievalConstraints,
    VideoIndex,
    clip_from_dict,
    clip_to_dict,
    retrieve_clip,
    select_music,
)

logger = logging.getLogger(__name__)

STATUS_PENDING = "pending"
STATUS_RUNNING = "running"
STATUS_COMPLETE = "complete"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class SteerEvent:
    timestamp: float
    new_genre: Genre | None = None
    injected_words: str | None = None

    def __post_init__(self):
        if self.new_genre is None and not (self.injected_words or "").strip():
            raise ValueError("steer event needs a genre or injected words")


@dataclass(frozen=True)
class PresentationEntry:
    scene_index: int
    clip: ClipRecord | None
    relaxed: bool = False
    score: float | None = None


@dataclass
class Session:
    """Mutable run state; the store serialises writers per session id."""

    id: str
    genre: Genre
    starting_words: str
    seed: int
    status: str = STATUS_PENDING
    plot: Plot | None = None
    script: Script | None = None
    presentation: list[PresentationEntry] = field(default_factory=list)
    music: MusicTrack | None = None
    history: list[SteerEvent] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    error: dict[str, str] | None = None


def session_to_dict(session: Session) -> dict[str, Any]:
    return {
        "id": session.id,
        "genre": session.genre.value,
        "starting_words": session.starting_words,
        "seed": session.seed,
        "status": session.status,
        "plot": plot_to_dict(session.plot) if session.plot else None,
        "script": script_to_dict(session.script) if session.script else None,
        "presentation": [
            {
                "scene_index": entry.scene_index,
                "clip": clip_to_dict(entry.clip) if entry.clip else None,
                "relaxed": entry.relaxed,
                "score": entry.score,
            }
            for entry in session.presentation
        ],
        "music": {"uri": session.music.uri, "mood_tag": session.music.mood_tag}
                 if session.music else None,
        "history": [
            {
                "timestamp": event.timestamp,
                "new_genre": event.new_genre.value if event.new_genre else None,
                "injected_words": event.injected_words,
            }
            for event in session.history
        ],
        "warnings": list(session.warnings),
        "error": session.error,
    }


def session_from_dict(data: dict[str, Any]) -> Session:
    music = data.get("music")
    return Session(
        id=data["id"],
        genre=Genre(data["genre"]),
        starting_words=data["starting_words"],
        seed=int(data["seed"]),
        status=data["status"],
        plot=plot_from_dict(data["plot"]) if data.get("plot") else None,
        script=script_from_dict(data["script"]) if data.get("script") else None,
        presentation=[
            PresentationEntry(
                scene_index=entry["scene_index"],
                clip=clip_from_dict(entry["clip"]) if entry.get("clip") else None,
                relaxed=bool(entry.get("relaxed", False)),
                score=entry.get("score"),
            )
            for entry in data.get("presentation", ())
        ],
        music=MusicTrack(uri=music["uri"], mood_tag=music["mood_tag"]) if music else None,
        history=[
            SteerEvent(
                timestamp=event["timestamp"],
                new_genre=Genre(event["new_genre"]) if event.get("new_genre") else None,
                injected_words=event.get("injected_words"),
            )
            for event in data.get("history", ())
        ],
        warnings=list(data.get("warnings", ())),
        error=data.get("error"),
    )


class SessionStore:
    """One JSON file per session with an in-memory cache in front.

    directory=None keeps sessions purely in memory (tests, throwaway runs).
    """

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.RLock:
        with self._guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.RLock()
            return self._locks[session_id]

    def register(self, session: Session) -> None:
        with self._guard:
            self._cache[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._guard:
            if session_id in self._cache:
                return self._cache[session_id]
        session = self.restore(session_id)
        self.register(session)
        return session

    def ids(self) -> list[str]:
        with self._guard:
            known = set(self._cache)
        if self.directory is not None:
            known.update(p.stem for p in self.directory.glob("*.json"))
        return sorted(known)

    def persist(self, session: Session) -> None:
        self.register(session)
        if self.directory is None:
            return
        path = self.directory / f"{session.id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(session_to_dict(session), ensure_ascii=False,
                                  sort_keys=True, indent=2), encoding="utf-8")
        tmp.replace(path)

    def restore(self, session_id: str) -> Session:
        if self.directory is None:
            raise UnknownSession(session_id)
        path = self.directory / f"{session_id}.json"
        if not path.is_file():
            raise UnknownSession(session_id)
        try:
            return session_from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorruptSessionRecord(f"{session_id}: {exc}") from None


class Engine:
    """Binds backends, video index, config and session store into one pipeline."""

    def __init__(
        self,
        backends: BackendSet,
        index: VideoIndex | None = None,
        config: EngineConfig | None = None,
        store: SessionStore | None = None,
        banlist: BanList = EMPTY_BANLIST,
        music: dict[Genre, MusicTrack] | None = None,
        id_factory: Callable[[], str] = new_ulid,
        clock: Callable[[], float] = time.time,
    ):
        self.backends = backends
        self.index = index
        self.config = config or EngineConfig()
        self.store = store or SessionStore()
        self.banlist = banlist
        self.music = music
        self._id_factory = id_factory
        self._clock = clock

    # --- session lifecycle ---

    def new_session(self, genre: Genre, starting_words: str,
                    seed: int | None = None) -> Session:
        if not starting_words.strip():
            raise ValueError("starting words must be non-empty")
        session = Session(
            id=self._id_factory(),
            genre=genre,
            starting_words=starting_words.strip(),
            seed=seed if seed is not None else mix64(self._id_factory(), "seed"),
        )
        self.store.register(session)
        return session

    def run_pipeline(self, genre: Genre, starting_words: str,
                     seed: int | None = None) -> Session:
        """Create and synchronously execute a session; never raises for stage
        failures, which instead mark the session failed with stage and cause."""
        session = self.new_session(genre, starting_words, seed)
        return self.execute(session.id)

    def execute(self, session_id: str) -> Session:
        with self.store.lock(session_id):
            session = self.store.get(session_id)
            session.status = STATUS_RUNNING
            stage = "plot"
            try:
                plot = self._generate_plot(session.genre, session.starting_words,
                                           session.seed)
                session.plot = plot
                self.store.persist(session)

                stage = "scenes"
                scenes = []
                for sentence in plot.sentences:
                    scenes.append(self._expand_sentence(sentence, session.seed))
                    session.script = Script(
                        genre=plot.genre,
                        plot=_plot_prefix(plot, len(scenes)),
                        scenes=tuple(scenes))
                    self.store.persist(session)
                session.script = Script(genre=plot.genre, plot=plot,
                                        scenes=tuple(scenes))

                stage = "retrieval"
                for scene in session.script.scenes:
                    session.presentation.append(
                        self._retrieve_for_scene(session, scene))
                    self.store.persist(session)

                stage = "music"
                session.music = select_music(session.genre, self.music)
                session.status = STATUS_COMPLETE
            except VScriptError as exc:
                logger.error("session %s failed at %s: %s", session_id, stage, exc)
                session.status = STATUS_FAILED
                session.error = {"stage": stage, "error": str(exc)}
            self.store.persist(session)
            return session

    def _generate_plot(self, genre: Genre, starting_words: str, seed: int) -> Plot:
        cfg = self.config.rescore_config()
        if genre is Genre.GENRE_FREE:
            cfg = replace(cfg, num_candidates=1)
            candidates = generate_plot_candidates(
                self.backends.generator, genre, starting_words, cfg, seed)
            return make_plot(candidates[0].text, genre)
        candidates = generate_plot_candidates(
            self.backends.generator, genre, starting_words, cfg, seed)
        return rescore_and_select(self.backends.classifier, candidates, genre)

    def _expand_sentence(self, sentence: PlotSentence, base_seed: int):
        """Generate one scene (dialogue then description) for a plot sentence."""
        dialogue = generate_dialogue(
            self.backends.generator, sentence,
            seed=mix64(base_seed, "dialogue", sentence.index),
            top_k=self.config.top_k, temperature=self.config.temperature)
        part = generate_scene_description(
            self.backends.generator, dialogue,
            seed=mix64(base_seed, "scene", sentence.index),
            top_k=self.config.top_k, temperature=self.config.temperature)
        return build_scene(sentence, dialogue, part, self.banlist)

    def _retrieve_for_scene(self, session: Session, scene) -> PresentationEntry:
        index = self.index
        scene_index = scene.source_sentence.index
        if index is None or len(index) == 0:
            warning = "no video index loaded; presentation slot left empty" \
                if index is None else "video index is empty; presentation slot left empty"
            if warning not in session.warnings:
                session.warnings.append(warning)
            return PresentationEntry(scene_index=scene_index, clip=None)
        constraints = RetrievalConstraints(
            genre=session.genre if session.genre is not Genre.GENRE_FREE else None,
            time_of_day=scene.header.time_of_day,
            min_char_count=len({t.speaker for t in scene.turns}) or None,
        )
        try:
            result = retrieve_clip(self.backends.embedder, scene.source_sentence,
                                   index, constraints)
        except EmptyIndex:
            return PresentationEntry(scene_index=scene_index, clip=None)
        best = result.best
        if best is None:
            return PresentationEntry(scene_index=scene_index, clip=None,
                                     relaxed=result.relaxed)
        return PresentationEntry(scene_index=scene_index, clip=best[0],
                                 relaxed=result.relaxed, score=best[1])

    # --- steering ---

    def steer_session(self, session_id: str, new_genre: Genre | None = None,
                      injected_words: str | None = None) -> Session:
        if new_genre is None and not (injected_words or "").strip():
            raise InvalidSteer("steer needs a genre or injected words")
        with self.store.lock(session_id):
            session = self.store.get(session_id)
            if session.status not in (STATUS_RUNNING, STATUS_COMPLETE):
                raise InvalidSteer(f"cannot steer a {session.status} session")
            if session.plot is None or session.script is None:
                raise InvalidSteer("session has no plot to extend yet")

            event = SteerEvent(timestamp=self._clock(), new_genre=new_genre,
                               injected_words=injected_words)
            session.history.append(event)
            steer_seed = (session.seed + len(session.history)) % 2**64

            genre = new_genre or session.genre
            session.genre = genre
            context = session.plot.text
            injected = (injected_words or "").strip()
            steer_words = normalize_ws(f"{context} {injected}") if injected else context

            stage = "steer_plot"
            try:
                appended = self._steer_continuation(genre, steer_words, context,
                                                    steer_seed)
                offset = len(session.plot.sentences)
                new_sentences = tuple(
                    PlotSentence(index=offset + s.index, text=s.text)
                    for s in appended
                )
                new_plot = Plot(
                    text=normalize_ws(
                        f"{context} {' '.join(s.text for s in new_sentences)}"),
                    genre=genre,
                    sentences=session.plot.sentences + new_sentences,
                )

                stage = "steer_scenes"
                new_scenes = tuple(
                    self._expand_sentence(sentence, steer_seed)
                    for sentence in new_sentences
                )
                session.plot = new_plot
                session.script = Script(genre=genre, plot=new_plot,
                                        scenes=session.script.scenes + new_scenes)

                stage = "steer_retrieval"
                for scene in new_scenes:
                    session.presentation.append(
                        self._retrieve_for_scene(session, scene))

                stage = "steer_music"
                session.music = select_music(genre, self.music)
                session.status = STATUS_COMPLETE
            except VScriptError as exc:
                logger.error("steer of %s failed at %s: %s", session_id, stage, exc)
                session.status = STATUS_FAILED
                session.error = {"stage": stage, "error": str(exc)}
            self.store.persist(session)
            return session

    def _steer_continuation(self, genre: Genre, steer_words: str,
                            context: str, steer_seed: int) -> list[PlotSentence]:
        from .plotgen import segment_plot

        cfg = self.config.rescore_config()
        if genre is Genre.GENRE_FREE:
            cfg = replace(cfg, num_candidates=1)
            candidates = generate_plot_candidates(
                self.backends.generator, genre, steer_words, cfg, steer_seed)
            selected = candidates[0].text
        else:
            candidates = generate_plot_candidates(
                self.backends.generator, genre, steer_words, cfg, steer_seed)
            selected = rescore_and_select(
                self.backends.classifier, candidates, genre).text
        appended_text = selected[len(context):].strip()
        if not appended_text:
            raise InvalidSteer("steer produced no plot continuation")
        return segment_plot(appended_text)

    # --- views and persistence ---

    def get_session(self, session_id: str) -> Session:
        return self.store.get(session_id)

    def get_presentation(self, session_id: str) -> dict[str, Any]:
        session = self.store.get(session_id)
        entries = []
        for entry in session.presentation:
            clip = entry.clip
            entries.append({
                "scene_index": entry.scene_index,
                "relaxed": entry.relaxed,
                "score": entry.score,
                "clip": {
                    "id": clip.id,
                    "uri": clip.video_uri,
                    "start_s": clip.start_s,
                    "end_s": clip.end_s,
                    "caption": clip.caption,
                } if clip else None,
            })
        return {
            "status": session.status,
            "entries": entries,
            "music": {"uri": session.music.uri, "mood_tag": session.music.mood_tag}
                     if session.music else None,
        }

    def session_view(self, session_id: str) -> dict[str, Any]:
        session = self.store.get(session_id)
        view = session_to_dict(session)
        view["genre_display"] = session.genre.display_name
        view["script_text"] = render_script(session.script) if session.script else ""
        view["presentation"] = self.get_presentation(session_id)["entries"]
        return view

    def persist_session(self, session: Session) -> None:
        self.store.persist(session)

    def restore_session(self, session_id: str) -> Session:
        return self.store.restore(session_id)


def _plot_prefix(plot: Plot, count: int) -> Plot:
    """A valid partial Plot over the first `count` sentences, for progress views."""
    sentences = plot.sentences[:count]
    return Plot(text=" ".join(s.text for s in sentences), genre=plot.genre,
                sentences=sentences)
