"""Tests for the FileResultRepository implementation."""

import json

import numpy as np
import pandas as pd
import pytest

from bsca.exceptions import StorageError
from bsca.storage.file_repository import ERROR_RECORD, FileResultRepository, to_json


class TestFileResultRepository:
    """Test suite for FileResultRepository class."""

    @pytest.fixture
    def repository(self, tmp_path):
        return FileResultRepository(tmp_path / "out")

    def test_nothing_written_before_commit(self, repository):
        repository.stage_text("notes.txt", "hello\n")
        assert repository.staged == ["notes.txt"]
        assert not repository.directory.exists()

    def test_commit_writes_in_staging_order(self, repository):
        repository.stage_json("b.json", {"value": 1.5})
        repository.stage_frame("a.csv", pd.DataFrame({"x": [1, 2], "y": [0.25, np.nan]}))
        written = repository.commit()
        assert [path.name for path in written] == ["b.json", "a.csv"]
        assert repository.staged == []
        assert repository.read_json("b.json") == {"value": 1.5}
        assert (repository.directory / "a.csv").read_text(encoding="utf-8") == (
            "x,y\n1,0.25\n2,\n"
        )
        assert not list(repository.directory.glob(".*.partial"))

    def test_frame_round_trip_keeps_floats_and_text(self, repository):
        values = [0.1 + 0.2, 1 / 3, -2.5e-17]
        repository.stage_frame("t.csv", pd.DataFrame({"v": values, "flag": ["", "NA", "ok"]}))
        repository.commit()
        frame = repository.read_frame("t.csv")
        assert list(frame["v"]) == values
        assert frame["flag"].tolist()[1:] == ["NA", "ok"]
        assert pd.isna(frame["flag"].tolist()[0])

    def test_commit_removes_stale_error_record(self, repository):
        repository.write_error({"status": "error"})
        assert repository.exists(ERROR_RECORD)
        repository.stage_text("ok.txt", "done\n")
        repository.commit()
        assert not repository.exists(ERROR_RECORD)
        assert repository.exists("ok.txt")

    def test_write_error_discards_staged_outputs(self, repository):
        repository.stage_text("partial.txt", "half")
        path = repository.write_error({"status": "error", "message": "boom"})
        assert path == repository.directory / ERROR_RECORD
        assert repository.staged == []
        assert not repository.exists("partial.txt")
        assert json.loads(path.read_text(encoding="utf-8"))["message"] == "boom"

    def test_commit_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        repository = FileResultRepository(blocker)
        repository.stage_text("a.txt", "a")
        with pytest.raises(StorageError):
            repository.commit()

    def test_write_error_on_unwritable_location(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        assert FileResultRepository(blocker).write_error({"status": "error"}) is None

    @pytest.mark.parametrize("name", ["missing.json", "broken.json"])
    def test_read_json_errors(self, repository, name):
        repository.directory.mkdir(parents=True)
        (repository.directory / "broken.json").write_text("{", encoding="utf-8")
        with pytest.raises(StorageError):
            repository.read_json(name)

    @pytest.mark.parametrize("name", ["missing.csv", "empty.csv"])
    def test_read_frame_errors(self, repository, name):
        repository.directory.mkdir(parents=True)
        (repository.directory / "empty.csv").write_text("", encoding="utf-8")
        with pytest.raises(StorageError):
            repository.read_frame(name)


class TestToJson:
    """Tests for deterministic JSON text."""

    def test_stable_text(self):
        expected = '{\n  "b": [\n    1,\n    2\n  ],\n  "a": "é"\n}\n'
        assert to_json({"b": [1, 2], "a": "é"}) == expected

    @pytest.mark.parametrize("document", [{"value": float("nan")}, {"value": object()}])
    def test_unserializable(self, document):
        with pytest.raises(StorageError):
            to_json(document)

    def test_stage_json_rejects_non_finite(self, tmp_path):
        with pytest.raises(StorageError):
            FileResultRepository(tmp_path).stage_json("x.json", {"value": float("inf")})
