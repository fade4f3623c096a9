import json

import pytest

from fpsim.artifacts import (
    COUNTS,
    FAILED,
    TRANSCRIPT,
    format_counts,
    read_counts,
    read_json,
    read_transcript,
    require,
    write_counts,
    write_json,
)
from fpsim.exceptions import ArtifactError
from fpsim.simulator import PopulationCounts


def rows(*triples):
    return [PopulationCounts(d, *t) for d, t in enumerate(triples)]


def test_counts_round_trip(tmp_path):
    data = rows((29, 1, 0), (27, 3, 0), (27, 2, 1))
    path = write_counts(tmp_path / COUNTS, data, 30)
    assert path.read_text().splitlines()[0] == "day,S,I,R"
    assert read_counts(path) == data


def test_write_rejects_bad_partition():
    with pytest.raises(ArtifactError, match="row 2"):
        format_counts(rows((29, 1, 0), (28, 1, 0)))


@pytest.mark.parametrize(
    "body, fragment",
    [
        ("day,S,I,R\n0,29,1,0\n1,28,1,0\n", "row 2"),
        ("day,S,I,R\n0,29,1,0\n1,x,1,0\n", "row 2"),
        ("day,S,I,R\n0,29,1,0\n1,29,1\n", "row 2"),
        ("day,S,I,R\n0,29,1,0\n2,29,1,0\n", "row 2"),
        ("day,S,I,R\n0,31,-1,0\n", "row 1"),
        ("d,s,i,r\n0,29,1,0\n", "header"),
        ("day,S,I,R\n", "no data"),
    ],
)
def test_read_counts_errors(tmp_path, body, fragment):
    path = tmp_path / COUNTS
    path.write_text(body)
    with pytest.raises(ArtifactError, match=fragment):
        read_counts(path)


def test_transcript_errors(tmp_path):
    path = tmp_path / TRANSCRIPT
    path.write_text("")
    with pytest.raises(ArtifactError, match="empty"):
        read_transcript(path)
    path.write_text("{not json}\n")
    with pytest.raises(ArtifactError, match="line 1"):
        read_transcript(path)
    path.write_text(json.dumps({"id": 0, "day": 0}) + "\n")
    with pytest.raises(ArtifactError, match="lacks"):
        read_transcript(path)


def test_json_non_finite(tmp_path):
    write_json(tmp_path / "x.json", {"a": float("nan"), "b": [float("inf"), 1.5]})
    assert read_json(tmp_path / "x.json") == {"a": None, "b": [None, 1.5]}


def test_require(tmp_path):
    with pytest.raises(ArtifactError, match="does not exist"):
        require(tmp_path / "missing", COUNTS)
    with pytest.raises(ArtifactError, match="missing artifact counts.csv"):
        require(tmp_path, COUNTS)
    (tmp_path / FAILED).write_text("BackendError: boom\n")
    with pytest.raises(ArtifactError, match="boom"):
        require(tmp_path)
