"""Command line interface.

    vscript generate --genre crime --start "..." [--seed N] [--out DIR]
    vscript db build --annotations DIR --captions DIR --out INDEX
    vscript db query --index INDEX --text "..." [--genre g] [--time t] ...
    vscript eval --candidates FILE [--references FILE] [--targets FILE] --metrics ...
    vscript serve --port P [--index INDEX] [--ui DIR]
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .backends import default_backends
from .config import EngineConfig, load_config
from .domain import Genre, TimeOfDay, render_script, script_to_dict
from .errors import RejectedClip, VScriptError
from .metrics import KNOWN_METRICS, compute_report
from .orchestrator import Engine, SessionStore, session_to_dict
from .scenegen import default_banlist, load_banlist
from .service import ApiServer
from .videostore import (
    ClipSource,
    Face,
    FrameAnnotation,
    RetrievalConstraints,
    build_index,
    ingest_clip,
    load_index,
    load_music_map,
    retrieve_clip,
    save_index,
    segment_caption,
)
from .domain import PlotSentence

logger = logging.getLogger(__name__)


def _build_engine(args, config: EngineConfig, index=None, session_dir=None) -> Engine:
    backends = default_backends(urls=config.backend_urls,
                                auth_token=config.auth_token)
    banlist = (load_banlist(config.banlist_path) if config.banlist_path
               else default_banlist())
    music = load_music_map(config.music_map_path) if config.music_map_path else None
    store = SessionStore(session_dir) if session_dir else SessionStore()
    return Engine(backends=backends, index=index, config=config,
                  store=store, banlist=banlist, music=music)


def _cmd_generate(args) -> int:
    config = load_config(args.config)
    index = load_index(args.index) if args.index else None
    engine = _build_engine(args, config, index=index)
    genre = Genre.parse(args.genre)
    session = engine.run_pipeline(genre, args.start, seed=args.seed)
    if session.status != "complete":
        print(f"generation failed at stage {session.error['stage']}: "
              f"{session.error['error']}", file=sys.stderr)
        return 1

    rendered = render_script(session.script)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "script.txt").write_text(rendered + "\n", encoding="utf-8")
        (out / "script.json").write_text(
            json.dumps(script_to_dict(session.script), ensure_ascii=False, indent=2),
            encoding="utf-8")
        (out / "presentation.json").write_text(
            json.dumps(engine.get_presentation(session.id), ensure_ascii=False,
                       indent=2), encoding="utf-8")
        (out / "session.json").write_text(
            json.dumps(session_to_dict(session), ensure_ascii=False, indent=2,
                       sort_keys=True), encoding="utf-8")
        print(f"session {session.id} written to {out}")
    else:
        print(rendered)
    return 0


def _read_annotations(path: Path) -> list[FrameAnnotation]:
    annotations = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            annotations.append(FrameAnnotation(
                second=int(doc["second"]),
                faces=tuple(Face(
                    center_x=float(f["center_x"]),
                    center_y=float(f["center_y"]),
                    area_fraction=float(f["area_fraction"]),
                    gender=str(f["gender"]),
                ) for f in doc.get("faces", ())),
                location_label=doc.get("location_label", ""),
                time_of_day=TimeOfDay(doc.get("time_of_day", "UNKNOWN")),
            ))
    return annotations


def _cmd_db_build(args) -> int:
    config = load_config(args.config)
    backends = default_backends(urls=config.backend_urls,
                                auth_token=config.auth_token)
    banlist = (load_banlist(config.banlist_path) if config.banlist_path
               else default_banlist())

    captions_dir = Path(args.captions)
    annotations_dir = Path(args.annotations)
    clips = []
    rejected = 0
    for doc_path in sorted(captions_dir.glob("*.json")):
        doc = json.loads(doc_path.read_text(encoding="utf-8"))
        stem = doc_path.stem
        annotation_path = annotations_dir / f"{stem}.jsonl"
        annotations = _read_annotations(annotation_path) if annotation_path.is_file() else []
        duration = float(doc["duration_s"])
        sentences = segment_caption(doc["caption"])
        total_tokens = sum(len(s.split()) for s in sentences) or 1

        cursor = 0.0
        for i, sentence in enumerate(sentences):
            span = duration * len(sentence.split()) / total_tokens
            source = ClipSource(
                id=f"{stem}-{i:04d}",
                video_uri=doc["video_uri"],
                start_s=round(cursor, 3),
                end_s=round(min(cursor + span, duration), 3),
                caption=sentence,
            )
            cursor += span
            try:
                clips.append(ingest_clip(source, annotations,
                                         backends.classifier, banlist))
            except RejectedClip as exc:
                rejected += 1
                print(f"rejected {source.id}: {exc}", file=sys.stderr)

    index = build_index(clips, backends.embedder)
    save_index(index, args.out)
    print(f"indexed {len(index)} clips ({rejected} rejected) -> {args.out}")
    return 0


def _cmd_db_query(args) -> int:
    config = load_config(args.config)
    backends = default_backends(urls=config.backend_urls,
                                auth_token=config.auth_token)
    index = load_index(args.index)
    constraints = RetrievalConstraints(
        genre=Genre.parse(args.genre) if args.genre else None,
        time_of_day=TimeOfDay(args.time.upper()) if args.time else None,
        min_char_count=args.min_chars,
        required_genders=tuple(args.genders.upper()) if args.genders else (),
    )
    result = retrieve_clip(backends.embedder, PlotSentence(0, args.text),
                           index, constraints)
    for clip, score in result.hits[:args.top]:
        print(json.dumps({
            "id": clip.id,
            "score": round(score, 6),
            "uri": clip.video_uri,
            "start_s": clip.start_s,
            "end_s": clip.end_s,
            "caption": clip.caption,
            "relaxed": result.relaxed,
        }, ensure_ascii=False))
    if result.relaxed:
        print(f"note: constraints relaxed ({', '.join(result.relaxed_filters)})",
              file=sys.stderr)
    return 0


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def _cmd_eval(args) -> int:
    config = load_config(args.config)
    backends = default_backends(urls=config.backend_urls,
                                auth_token=config.auth_token)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    candidates = _read_lines(args.candidates)
    references = _read_lines(args.references) if args.references else None
    targets = ([Genre.parse(t) for t in _read_lines(args.targets)]
               if args.targets else None)
    report = compute_report(
        candidates, metrics,
        references=references,
        targets=targets,
        embedder=backends.embedder,
        classifier=backends.classifier,
        scorer=backends.scorer,
    )
    print(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    if args.sent_sim_x100 and report.sent_sim is not None:
        print(f"sent_sim_x100: {report.sent_sim * 100:.2f}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    config = load_config(args.config)
    index_path = args.index or config.index_path
    index = load_index(index_path) if index_path else None
    engine = _build_engine(args, config, index=index,
                           session_dir=args.session_dir or config.session_dir)
    server = ApiServer(engine, host=args.host, port=args.port, ui_dir=args.ui)
    print(f"serving on {server.url}" + (f" (ui: {args.ui})" if args.ui else ""))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vscript", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run the full pipeline once")
    gen.add_argument("--genre", required=True,
                     help="crime | sci-fi | war | romance | genre-free")
    gen.add_argument("--start", required=True, help="starting words for the plot")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default=None, help="directory for output artifacts")
    gen.add_argument("--index", default=None, help="video index directory")
    gen.add_argument("--config", default=None)
    gen.set_defaults(func=_cmd_generate)

    db = sub.add_parser("db", help="video database commands")
    db_sub = db.add_subparsers(dest="db_command", required=True)

    build = db_sub.add_parser("build", help="ingest captions + annotations")
    build.add_argument("--annotations", required=True)
    build.add_argument("--captions", required=True)
    build.add_argument("--out", required=True, help="index output directory")
    build.add_argument("--config", default=None)
    build.set_defaults(func=_cmd_db_build)

    query = db_sub.add_parser("query", help="query an index")
    query.add_argument("--index", required=True)
    query.add_argument("--text", required=True)
    query.add_argument("--genre", default=None)
    query.add_argument("--time", default=None, choices=["day", "night", "DAY", "NIGHT"])
    query.add_argument("--min-chars", type=int, default=None)
    query.add_argument("--genders", default=None, help="e.g. MF or MMF")
    query.add_argument("--top", type=int, default=5)
    query.add_argument("--config", default=None)
    query.set_defaults(func=_cmd_db_query)

    ev = sub.add_parser("eval", help="compute text metrics")
    ev.add_argument("--candidates", required=True, help="one text per line")
    ev.add_argument("--references", default=None)
    ev.add_argument("--targets", default=None, help="one genre per line")
    ev.add_argument("--metrics", default="distinct,repeat",
                    help=f"comma list of: {','.join(KNOWN_METRICS)}")
    ev.add_argument("--sent-sim-x100", action="store_true",
                    help="also print sentence similarity scaled by 100")
    ev.add_argument("--config", default=None)
    ev.set_defaults(func=_cmd_eval)

    serve = sub.add_parser("serve", help="run the HTTP API (and optional UI)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8040)
    serve.add_argument("--index", default=None)
    serve.add_argument("--ui", default=None, help="static UI bundle directory")
    serve.add_argument("--session-dir", default=None)
    serve.add_argument("--config", default=None)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (VScriptError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
