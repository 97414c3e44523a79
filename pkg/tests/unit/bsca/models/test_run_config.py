import json

import pytest

from bsca.exceptions import ConfigurationError
from bsca.models.data import Family, Role
from bsca.models.run_config import RunConfig


@pytest.fixture
def config_file(tmp_path):
    def write(document: dict):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write


def test_from_file_resolves_data_relative_to_config(config_file, tmp_path):
    path = config_file(
        {
            "data": "data.csv",
            "outcomes": [{"name": "anxious", "family": "binomial"}],
            "treatments": [{"name": "screen"}],
            "controls": [{"name": "age"}, {"name": "region", "kind": "categorical"}],
            "subgroups": ["female"],
            "seed": 3,
        }
    )
    config = RunConfig.from_file(path)
    assert config.data == tmp_path / "data.csv"
    assert config.roles() == {
        "anxious": Role.OUTCOME,
        "screen": Role.TREATMENT,
        "age": Role.CONTROL,
        "region": Role.CONTROL,
        "female": Role.SUBGROUP,
    }
    assert config.families() == {"anxious": Family.BINOMIAL}
    assert config.design_options().categorical_controls == ["region"]
    assert config.require_seed() == 3


def test_duplicate_roles_rejected(config_file):
    path = config_file(
        {
            "data": "data.csv",
            "outcomes": [{"name": "y"}],
            "treatments": [{"name": "y"}],
        }
    )
    with pytest.raises(ConfigurationError, match="more than one role"):
        RunConfig.from_file(path)


def test_invalid_document_is_a_configuration_error(config_file):
    path = config_file({"data": "data.csv", "outcomes": [], "treatments": [{"name": "x"}]})
    with pytest.raises(ConfigurationError, match="Invalid configuration"):
        RunConfig.from_file(path)


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigurationError, match="Cannot read"):
        RunConfig.from_file(tmp_path / "missing.json")


def test_missing_seed_is_reported(config_file):
    config = RunConfig.from_file(
        config_file({"data": "d.csv", "outcomes": [{"name": "y"}], "treatments": [{"name": "x"}]})
    )
    with pytest.raises(ConfigurationError, match="seed is required"):
        config.require_seed()
