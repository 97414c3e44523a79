from bsca.handlers.base_handler import EXIT_ERROR, EXIT_OK
from bsca.handlers.plot_handler import PlotHandler
from bsca.handlers.run_handler import RunHandler
from bsca.handlers.sca_handler import ScaHandler


def _invoke(parser, *argv):
    args = parser.parse_args([*map(str, argv)])
    return args.handler.handle(args)


def test_nothing_to_plot(cli, tmp_path):
    parser, subparsers = cli
    PlotHandler(subparsers)
    code, record = _invoke(parser, "plot", "--out", tmp_path)
    assert code == EXIT_ERROR
    assert record["error"] == "StorageError"


def test_rerenders_identical_figures(cli, config_path, tmp_path):
    parser, subparsers = cli
    for handler in (RunHandler, ScaHandler, PlotHandler):
        handler(subparsers)
    out = tmp_path / "out"
    config = config_path()
    assert _invoke(parser, "run", "--config", config, "--out", out)[0] == EXIT_OK
    assert _invoke(parser, "sca", "--config", config, "--out", out, "--draws", "100")[0] == 0
    originals = {path.name: path.read_bytes() for path in out.glob("*.svg")}
    assert set(originals) == {"single_outcome_y.svg", "sca.svg"}
    for path in out.glob("*.svg"):
        path.unlink()

    code, record = _invoke(parser, "plot", "--out", out)
    assert code == EXIT_OK
    assert sorted(record["files"]) == sorted(originals)
    assert {path.name: path.read_bytes() for path in out.glob("*.svg")} == originals
