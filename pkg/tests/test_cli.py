import json
import subprocess
import sys
from pathlib import Path

import pydot
import pytest

from tkbalign.cli import load_costs, main
from tkbalign.dl import ConceptAssertion

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def files(tmp_path):
    def make(kb, query, costs=None):
        (tmp_path / "g.kb").write_text(kb)
        (tmp_path / "q.txt").write_text(query)
        args = ["--kb", str(tmp_path / "g.kb"), "--query", str(tmp_path / "q.txt")]
        if costs is not None:
            (tmp_path / "c.json").write_text(json.dumps(costs))
            args += ["--costs", str(tmp_path / "c.json")]
        return args
    return make


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entails_ground_fact(files, capsys):
    code, out, _ = run(["entails", *files("abox@0: A(a)\n", "[A(a)]\n")], capsys)
    assert code == 0 and json.loads(out)["status"] == "ENTAILED"


def test_entails_failure_exit_code(files, capsys):
    code, out, _ = run(["entails", *files("abox@0: A(a)\n", "X [A(a)]\n")], capsys)
    assert code == 1 and json.loads(out)["status"] != "ENTAILED"


def test_align_json_and_text(files, capsys):
    args = files("abox@0:\n", "[A(a)]\n")
    code, out, _ = run(["align", *args], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "ALIGNED" and doc["total_cost"] == 1
    code, out, _ = run(["align", *args, "--format", "text"], capsys)
    assert code == 0 and "ins A(a)" in out


def test_align_out_file_matches_golden(tmp_path, capsys):
    out = tmp_path / "r.json"
    kb, q = GOLDEN / "ex1.kb", GOLDEN / "ex1.q"
    assert main(["align", "--kb", str(kb), "--query", str(q), "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert out.read_text() == (GOLDEN / "ex1.json").read_text()


def test_align_without_solution(files, capsys):
    code, out, _ = run(["align", *files("abox@0: A(a)\nabox@1:\n", "G [A(a)] & ~X [A(a)]\n")], capsys)
    assert code == 1 and json.loads(out)["status"] != "ALIGNED"


def test_align_with_costs(files, capsys):
    code, out, _ = run(["align", *files("abox@0: A(a)\n", "X [A(a)]\n", {"abox_unit": 5})], capsys)
    assert code == 0 and json.loads(out)["total_cost"] == 5


def test_oracle_check(files, capsys):
    code, out, _ = run(["align", *files("abox@0:\n", "[A(a)]\n"), "--oracle-check"], capsys)
    assert code == 0 and json.loads(out)["diagnostics"]["oracle_check"] == "no countermodel"


def test_kb_align(files, capsys):
    code, out, _ = run(["kb-align", *files("tbox: A subclassof B\nabox@0:\n", "B(a)\n", {"insert": {"B(a)": 3}})],
                       capsys)
    doc = json.loads(out)
    assert code == 0 and doc["total_cost"] == 1


def test_kb_align_rejects_several_aboxes(files, capsys):
    code, _, err = run(["kb-align", *files("abox@0:\nabox@1:\n", "A(a)\n")], capsys)
    assert code == 2 and "at most one" in err


def test_parse_error_exit_code(files, capsys):
    code, _, err = run(["align", *files("abox@0: A(\n", "[A(a)]\n")], capsys)
    assert code == 2 and "line 1" in err


def test_missing_file_and_bad_arguments(tmp_path, capsys):
    code, _, err = run(["align", "--kb", str(tmp_path / "nope"), "--query", str(tmp_path / "nope")], capsys)
    assert code == 2 and "cannot read" in err
    assert main(["align"]) == 2
    assert main(["frobnicate"]) == 2


def test_bad_cost_file_exit_code(files, capsys):
    code, _, err = run(["align", *files("abox@0:\n", "[A(a)]\n", {"default_insert": -1})], capsys)
    assert code == 2 and "cost file" in err


def test_max_props_refusal(files, capsys):
    query = "[A(a)] | [B(a)] | [A(b)]\n"
    code, _, err = run(["align", *files("abox@0:\n", query), "--max-props", "2"], capsys)
    assert code == 2 and "--max-props" in err
    code, _, _ = run(["align", *files("abox@0:\n", query), "--max-props", "3"], capsys)
    assert code == 0


def test_cyclic_query_is_unsupported(files, capsys):
    code, _, err = run(["entails", *files("abox@0:\n", "[EX y . r(y,y)]\n")], capsys)
    assert code == 3 and "unsupported" in err


def test_dump_writes_parseable_dot(files, tmp_path, capsys):
    out = tmp_path / "dot"
    assert main(["dump", *files("abox@0: A(a)\n", "X [A(a)]\n"), "--dump-dir", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["dpa.dot", "mig.dot", "nba.dot", "rtdfa.dot", "t_reduct.dot"]
    for p in out.iterdir():
        graphs = pydot.graph_from_dot_data(p.read_text())
        assert graphs and graphs[0].get_nodes()


def test_dump_needs_a_directory(files, capsys):
    code, _, err = run(["dump", *files("abox@0:\n", "[A(a)]\n")], capsys)
    assert code == 2 and "--dump-dir" in err


def test_load_costs():
    cm = load_costs('{"default_insert": 2, "remove": {"A(a)": 0.5}, "abox_unit": 3}')
    assert cm.default_insert == 2 and cm.abox_unit == 3
    assert cm.remove[ConceptAssertion("A", "a")] == 0.5


@pytest.mark.parametrize("text", ["[1]", '{"bogus": 1}', '{"default_insert": 0}', "{", '{"insert": []}'])
def test_load_costs_rejects(text):
    with pytest.raises(Exception, match="cost file"):
        load_costs(text)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tkbalign", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "align" in res.stdout
