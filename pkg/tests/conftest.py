import pytest

from vscript.backends import mock_backends
from vscript.backends.mock import MockTextEmbedder
from vscript.domain import Genre, TimeOfDay
from vscript.videostore import ClipRecord, build_index


@pytest.fixture()
def backends():
    return mock_backends()


@pytest.fixture()
def embedder():
    return MockTextEmbedder()


def make_clip(clip_id, caption, genre=None, time=TimeOfDay.UNKNOWN,
              char_count=0, genders=(), uri=None, start=0.0, end=5.0):
    return ClipRecord(
        id=clip_id,
        video_uri=uri or f"videos/{clip_id}.mp4",
        start_s=start,
        end_s=end,
        caption=caption,
        genre_tag=genre,
        time_of_day=time,
        char_count=char_count,
        genders=tuple(genders),
    )


@pytest.fixture()
def small_index(embedder):
    clips = [
        make_clip("clip-a", "a detective studies the evidence wall",
                  genre=Genre.CRIME, time=TimeOfDay.NIGHT,
                  char_count=1, genders=("M",)),
        make_clip("clip-b", "two lovers share a candlelight dinner",
                  genre=Genre.ROMANCE, time=TimeOfDay.NIGHT,
                  char_count=2, genders=("F", "M")),
        make_clip("clip-c", "a starship drifts past the nebula",
                  genre=Genre.SCIFI, time=TimeOfDay.DAY,
                  char_count=0, genders=()),
        make_clip("clip-d", "infantry advance through the trench line",
                  genre=Genre.WAR, time=TimeOfDay.DAY,
                  char_count=3, genders=("M", "M", "U")),
    ]
    return build_index(clips, embedder)
