import io
import json
import re
import shlex
from pathlib import Path

import pytest

from workbench import cli
from workbench.formats import load_pair, load_tree

ROOT = Path(__file__).resolve().parent.parent


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run_cli([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def exported(tmp_path):
    for name in ("FIG4", "FIG7", "PAIR2L"):
        code, _, _ = run("fixtures", "export", name, "--dir", tmp_path)
        assert code == 0
    return tmp_path


def test_export_writes_tree_and_pair(exported):
    assert (exported / "FIG4.tree").exists()
    assert (exported / "FIG4.pair").exists()
    assert (exported / "FIG7.tree").exists()
    assert not (exported / "FIG7.pair").exists()


def test_tour_on_fig7(exported):
    code, out, _ = run("tour", exported / "FIG7.tree", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["weight"] == 47
    assert list(doc["eccentricities"].values()) == [18, 21, 20, 21, 19]
    assert doc["numbering"] == ["v2", "v8", "v7", "v6", "v1", "v9", "v5", "v10", "v3", "v4"]


def test_tour_with_oracle(exported):
    code, out, _ = run("tour", exported / "FIG4.tree", "--oracle")
    assert code == 0
    assert "Weight: 5" in out
    assert "Match: yes" in out


def test_bench_on_fig4(exported):
    code, out, _ = run("bench", exported / "FIG4.pair", "--format", "json")
    assert code == 0
    rows = {row["label"]: row for row in json.loads(out)["rows"]}
    assert rows["ub1"]["coordination_passes"] == 16
    assert rows["ub2"]["coordination_passes"] == 16
    assert rows["ub3-default"]["coordination_passes"] == 8
    assert rows["ub3-optimal"]["coordination_passes"] == 5
    assert rows["ub2"]["finalization_passes"] == 4
    assert rows["direct"]["payload_entries"] == 2 ** 7
    assert len({row["payload_entries"] for label, row in rows.items() if label != "direct"}) == 1


def test_bench_text_table(exported):
    code, out, _ = run("bench", exported / "FIG4.pair")
    assert code == 0
    assert "LINKAGE PROPAGATION COST" in out
    assert "ub3-optimal" in out


def test_verify_pair2l(exported):
    code, out, _ = run("verify", exported / "PAIR2L.pair", "--seed", 3)
    assert code == 0
    assert "FAIL" not in out


def test_verify_failure_exits_two(exported, monkeypatch):
    monkeypatch.setattr(cli, "posterior_deviation", lambda session, expected=None: 1.0)
    code, out, _ = run("verify", exported / "PAIR2L.pair")
    assert code == 2
    assert "FAIL" in out


def test_propagate_json_schema_and_determinism(exported):
    argv = ("propagate", exported / "FIG4.pair", "--variant", "ub3", "--order", "5,2,1,3,4", "--format", "json")
    code, out, _ = run(*argv)
    assert code == 0
    doc = json.loads(out)
    assert list(doc) == [
        "variant", "order", "coordination_passes", "finalization_passes",
        "payload_entries", "weighted_cost", "max_deviation",
    ]
    assert doc["order"] == [5, 2, 1, 3, 4]
    assert doc["coordination_passes"] == 5
    assert doc["max_deviation"] < 1e-9
    assert run(*argv)[1] == out


def test_propagate_text_lists_marginals(exported):
    code, out, _ = run("propagate", exported / "PAIR2L.pair", "--variant", "ub2", "--order", "optimal")
    assert code == 0
    for var_id in "BCD":
        assert f"• {var_id}:" in out


@pytest.mark.parametrize("argv", [
    ("propagate",),
    ("tour", "missing.tree"),
    ("bench", "missing.pair", "--bogus"),
])
def test_usage_errors_exit_one(argv):
    code, _, err = run(*argv)
    assert code == 1
    assert err


def test_bad_order_exits_one(exported):
    code, _, err = run("propagate", exported / "FIG4.pair", "--variant", "ub1", "--order", "1,5,2,3,4")
    assert code == 1
    assert "inconsistent" in err


def test_gen_writes_loadable_files(tmp_path):
    pair_path, tree_path = tmp_path / "g.pair", tmp_path / "g.tree"
    assert run("gen", "pair", "--shared", 4, "--private-a", 2, "--private-b", 2, "--seed", 9, "--out", pair_path)[0] == 0
    assert run("gen", "tree", "--nodes", 6, "--seed", 9, "--out", tree_path)[0] == 0
    assert len(load_pair(str(pair_path)).dsepset.vars.variables) == 4
    assert len(load_tree(str(tree_path)).nodes) == 6


def test_tour_oracle_over_the_limit_exits_one(exported):
    code, _, err = run("tour", exported / "FIG7.tree", "--oracle")
    assert code == 1
    assert "exceeds the limit of 9" in err
    assert run("tour", exported / "FIG7.tree", "--oracle", "--brute-force-limit", 8)[0] == 1


def test_fixture_runner_commands_succeed(tmp_path):
    script = (ROOT / "run_fixtures.sh").read_text()
    names = re.search(r"for name in ([A-Z0-9 ]+); do", script).group(1).split()
    assert "INTERIOR" in names
    for name in names:
        assert run("fixtures", "export", name, "--dir", tmp_path)[0] == 0

    commands = [
        line for line in re.findall(r"^python MAIN\.py (.+?) \|\| exit", script, re.M)
        if "$name" not in line
    ]
    assert commands
    for command in commands:
        code, _, err = run(*shlex.split(command.replace("$OUT", str(tmp_path))))
        assert code == 0, f"{command}: {err}"


def test_unknown_log_level_exits_one(monkeypatch, capsys):
    monkeypatch.setenv("MSBN_LOG_LEVEL", "LOUD")
    assert cli.main(["fixtures", "export", "FIG4", "--dir", "."]) == 1
    assert "log_level" in capsys.readouterr().err
