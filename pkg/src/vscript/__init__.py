"""vscript: a genre-controlled script generation pipeline.

Generates a genre-specific plot, expands every plot sentence into a dialogue
and a scene description, assembles the scenes into a screenplay-style script,
and pairs each scene with a retrieved video clip plus genre-keyed background
music. All neural inference sits behind pluggable backends; the shipped mocks
are deterministic so the whole pipeline is reproducible offline.
"""

from .backends import BackendSet, default_backends, mock_backends
from .config import EngineConfig, load_config
from .domain import (
    Genre,
    Plot,
    PlotSentence,
    Scene,
    SceneHeader,
    Script,
    Setting,
    TimeOfDay,
    render_script,
    validate_script,
)
from .orchestrator import Engine, Session, SessionStore, SteerEvent
from .plotgen import RescoreConfig, build_plot_prompt, segment_plot
from .scenegen import BanList, default_banlist, load_banlist, parse_scene_header
from .videostore import (
    ClipRecord,
    RetrievalConstraints,
    VideoIndex,
    build_index,
    load_index,
    retrieve_clip,
    save_index,
)

__version__ = "0.1.0"

__all__ = [
    "BackendSet",
    "BanList",
    "ClipRecord",
    "Engine",
    "EngineConfig",
    "Genre",
    "Plot",
    "PlotSentence",
    "RescoreConfig",
    "RetrievalConstraints",
    "Scene",
    "SceneHeader",
    "Script",
    "Session",
    "SessionStore",
    "Setting",
    "SteerEvent",
    "TimeOfDay",
    "VideoIndex",
    "__version__",
    "build_index",
    "build_plot_prompt",
    "default_backends",
    "default_banlist",
    "load_banlist",
    "load_config",
    "load_index",
    "mock_backends",
    "parse_scene_header",
    "render_script",
    "retrieve_clip",
    "save_index",
    "segment_plot",
    "validate_script",
]
