import argparse
import json
import unittest
from unittest.mock import MagicMock, patch

import pytest

from bsca import __version__
from bsca.main import create_application, main


class TestMain(unittest.TestCase):
    """Test cases for the main application module."""

    @patch("bsca.main.PlotHandler")
    @patch("bsca.main.SimHandler")
    @patch("bsca.main.ScaHandler")
    @patch("bsca.main.RunHandler")
    def test_create_application_with_parser(self, mock_run, mock_sca, mock_sim, mock_plot):
        """Every handler registers with the subcommands of the given parser."""
        parser = MagicMock(spec=argparse.ArgumentParser)

        result = create_application(parser)

        subparsers = parser.add_subparsers.return_value
        parser.add_subparsers.assert_called_once_with(dest="command", required=True)
        for handler in (mock_run, mock_sca, mock_sim, mock_plot):
            handler.assert_called_once_with(subparsers)
        self.assertIs(result, parser)

    def test_create_application_without_parser(self):
        """A new parser knows every subcommand."""
        parser = create_application()
        self.assertEqual(parser.prog, "bsca")
        for command in ("run", "sca", "sim", "plot"):
            extra = ["--config", "c.json"] if command in ("run", "sca") else []
            args = parser.parse_args([command, "--out", "x", *extra])
            self.assertEqual(args.command, command)


def test_main_prints_the_record(capsys, tmp_path):
    code = main(["sim", "--scenario", "1", "--out", str(tmp_path)])
    assert code == 2
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "error"
    assert record["command"] == "sim"
    assert record["error"] == "ConfigurationError"
    assert (tmp_path / "error.json").is_file()


def test_usage_errors_exit_with_two():
    with pytest.raises(SystemExit) as raised:
        main(["run"])
    assert raised.value.code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as raised:
        main(["--version"])
    assert raised.value.code == 0
    assert __version__ in capsys.readouterr().out


if __name__ == "__main__":
    unittest.main()
