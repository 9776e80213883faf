import csv
import json

import pytest

from ocior.cli import main, parse_protocol, read_config
from ocior.sim.runner import CSV_COLUMNS


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_campaign_example(tmp_path):
    out = tmp_path / "runs.csv"
    code = main(["run", "--protocol", "ociorab a", "--n", "4", "--t", "1", "--input", "unanimous",
                 "--ell", "128", "--adversary", "silent", "--scheduler", "random", "--seeds", "100",
                 "--csv", str(out)])
    assert code == 0
    data = rows(out)
    assert len(data) == 100
    assert list(data[0]) == list(CSV_COLUMNS)
    assert all(r["all_honest_agree"] == "True" for r in data)


def test_biased_suite_exit_zero(capsys):
    assert main(["run", "--suite", "abbba-lemma13", "--n", "4", "--t", "1", "--seeds", "500"]) == 0
    assert "0 violations" in capsys.readouterr().err


def test_resilience_guard(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--n", "3", "--t", "1"])
    assert exc.value.code == 2


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_subresilient_run_can_fail(tmp_path):
    code = main(["run", "--n", "3", "--t", "1", "--allow-subresilient", "--adversary", "equivocator",
                 "--scheduler", "all", "--input", "all", "--seeds", "10", "--max-steps", "20000",
                 "--csv", str(tmp_path / "x.csv"), "--quiet"])
    assert code == 1


def test_config_file_and_summary(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("# campaign\nprotocol = OciorABAStar\nn = 4\nseeds = 3\nadversary = crash-after-k\n")
    summary = tmp_path / "s.json"
    out = tmp_path / "o.csv"
    assert main(["run", "--config", str(cfg), "--seeds", "2", "--csv", str(out),
                 "--json-summary", str(summary)]) == 0
    data = rows(out)
    assert len(data) == 2 and data[0]["protocol"] == "OciorABAStar"
    assert json.loads(summary.read_text())["runs"] == 2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(cfg)])
    assert exc.value.code == 2
    assert read_config(str(cfg)) == {"colour": "blue"}


def test_complexity_needs_three_sizes():
    with pytest.raises(SystemExit) as exc:
        main(["complexity", "--n", "4,7"])
    assert exc.value.code == 2


def test_complexity_table(tmp_path, capsys):
    out = tmp_path / "cx.csv"
    assert main(["complexity", "--n", "4,7,10", "--seeds", "2", "--ell", "256", "--csv", str(out)]) == 0
    data = rows(out)
    assert [int(r["n"]) for r in data] == [4, 7, 10]
    assert "not certified" in capsys.readouterr().err


def test_protocol_aliases():
    assert parse_protocol("OciorABA*") == "OciorABAStar"
    assert parse_protocol("apva") == "APVA"
    with pytest.raises(Exception):
        parse_protocol("paxos")
