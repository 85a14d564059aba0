# tests/test_cli.py

import argparse
import csv
import io
import json
import math

import pytest

from src import config
from src.cli import dispatch, float_grid, int_list, positive_int, resolve_seed
from src.middlewares.run_manifest import load_manifest, manifest_path

MUTUAL = "exists x. exists y. (E(x,y) and E(y,x))"


async def run(*argv):
    data = {"stdout": io.StringIO(), "stderr": io.StringIO()}
    code = await dispatch(list(argv), data)
    return code, data["stdout"].getvalue(), data["stderr"].getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_argument_types():
    assert float_grid("0.5:2:0.5") == [0.5, 1.0, 1.5, 2.0]
    assert float_grid("1,2.5") == [1.0, 2.5]
    assert int_list("100,200") == [100, 200]
    for bad in ("2:1:0.5", "1:2:0", "a"):
        with pytest.raises(argparse.ArgumentTypeError):
            float_grid(bad)
    with pytest.raises(argparse.ArgumentTypeError):
        positive_int("0")


def test_seed_resolution(monkeypatch):
    args = argparse.Namespace(command="sample", seed=None)
    monkeypatch.setattr(config, "SPARSELIMIT_SEED", "7")
    resolve_seed(args)
    assert args.seed == 7

    monkeypatch.setattr(config, "SPARSELIMIT_SEED", None)
    generated = argparse.Namespace(command="mc", seed=None)
    resolve_seed(generated)
    assert isinstance(generated.seed, int) and generated.seed >= 0

    deterministic = argparse.Namespace(command="limit", seed=None)
    resolve_seed(deterministic)
    assert deterministic.seed is None


@pytest.mark.asyncio
async def test_usage_errors_exit_with_two():
    code, _, _ = await run("sample", "--n", "10", "--beta", "1")
    assert code == 2
    code, _, _ = await run("mc", "--vocab", "graph", "--stat", "edge-count", "--beta", "1",
                           "--n", "10", "--samples", "0")
    assert code == 2
    code, _, err = await run("mc", "--vocab", "graph", "--stat", "edge-count", "--beta", "1",
                             "--n", "10,20", "--samples", "2", "--seed", "1", "--workers", "1")
    assert code == 2
    assert "UsageError" in err


@pytest.mark.asyncio
async def test_domain_errors_exit_with_one():
    code, out, err = await run("limit", "--vocab", "graph", "--formula", "exists x. F(x,x)")
    assert code == 1
    assert out == ""
    assert "UnknownRelation" in err
    code, _, err = await run("validate-vocab", "--vocab", "hypergraph9")
    assert code == 1
    assert "UnknownVocabulary" in err


@pytest.mark.asyncio
async def test_limit_table_per_grid_point():
    code, out, _ = await run("limit", "--vocab", "digraph", "--formula", MUTUAL, "--override-r", "0",
                             "--beta-grid", "0.5:2:0.5", "--no-verify")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["beta_E", "probability"]
    assert [float(r["beta_E"]) for r in table] == [0.5, 1.0, 1.5, 2.0]
    assert float(table[1]["probability"]) == pytest.approx(1 - math.exp(-0.5))


@pytest.mark.asyncio
async def test_limit_table_per_class():
    code, out, _ = await run("limit", "--vocab", "digraph", "--formula", MUTUAL, "--override-r", "0",
                             "--beta-grid", "1", "--no-verify", "--per-class")
    assert code == 0
    table = rows(out)
    assert [r["truth"] for r in table] == ["0", "1", "1"]
    assert float(table[0]["value@E=1"]) == 0.0
    assert sum(float(r["value@E=1"]) for r in table) == pytest.approx(1 - math.exp(-0.5))


@pytest.mark.asyncio
async def test_sample_writes_manifest_and_replays(tmp_path):
    out = tmp_path / "g.txt"
    code, stdout, _ = await run("sample", "--vocab", "graph", "--n", "40", "--beta", "1.5", "--seed", "5",
                                "--out", str(out))
    assert code == 0
    assert stdout == ""
    text = out.read_text(encoding="utf-8")
    assert text.startswith("# sparselimit structure v1")
    manifest = load_manifest(str(manifest_path(str(out))))
    assert manifest.subcommand == "sample"
    assert manifest.seed == 5
    assert manifest.exit_code == 0
    assert manifest.output == str(out)
    assert manifest.info["n"] == 40

    again = tmp_path / "again.txt"
    code, _, _ = await run("replay", str(manifest_path(str(out))), "--out", str(again))
    assert code == 0
    assert again.read_text(encoding="utf-8") == text


@pytest.mark.asyncio
async def test_replay_of_missing_manifest(tmp_path):
    code, _, err = await run("replay", str(tmp_path / "none.manifest.json"))
    assert code == 2
    assert "Cannot read manifest" in err


@pytest.mark.asyncio
async def test_sample_to_stdout_and_check(tmp_path):
    code, text, _ = await run("sample", "--vocab", "graph", "--n", "5", "--p", "1", "--seed", "0")
    assert code == 0
    assert "vocabulary graph" in text
    path = tmp_path / "k5.txt"
    path.write_text(text, encoding="utf-8")
    code, out, _ = await run("check", "--structure", str(path),
                             "--formula", "forall x. forall y. (x = y or E(x,y))",
                             "--formula", "exists x. E(x,x)",
                             "--compare", str(path), "--format", "json")
    assert code == 0
    result = json.loads(out)
    assert [r["holds"] for r in result["records"]] == [True, False]
    assert result["info"]["ef_winner"] == "Duplicator"
    assert result["info"]["edges"] == 10


@pytest.mark.asyncio
async def test_check_rejects_free_variables(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("# sparselimit structure v1\nvocabulary graph\nn 3\nE 0 1\nE 1 2\n", encoding="utf-8")
    code, _, err = await run("check", "--structure", str(path), "--formula", "E(x,y)")
    assert code == 2
    assert "free variables" in err


@pytest.mark.asyncio
async def test_validate_vocab_json(tmp_path):
    export = tmp_path / "cnf3.json"
    code, out, _ = await run("validate-vocab", "--vocab", "cnf3", "--n", "6", "--format", "json",
                             "--export", str(export))
    assert code == 0
    result = json.loads(out)
    assert [r["relation"] for r in result["records"]] == ["R0", "R1", "R2", "R3"]
    assert sum(r["edge_space_n6"] for r in result["records"]) == 160
    code, out, _ = await run("validate-vocab", "--vocab", str(export))
    assert code == 0
    assert len(rows(out)) == 4


@pytest.mark.asyncio
async def test_tree_types_with_probabilities():
    code, out, _ = await run("tree-types", "--vocab", "graph", "--k", "1", "--r", "1", "--beta", "1",
                             "--format", "json")
    assert code == 0
    records = json.loads(out)["records"]
    assert len(records) == 2
    assert records[0]["probability"] == pytest.approx(math.exp(-1.0))
    assert sum(r["probability"] for r in records) == pytest.approx(1.0)


@pytest.mark.asyncio
async def test_mc_edge_count():
    code, out, _ = await run("mc", "--vocab", "graph", "--stat", "edge-count", "--beta", "1", "--n", "50",
                             "--samples", "100", "--seed", "3", "--workers", "1")
    assert code == 0
    record = rows(out)[0]
    assert record["item"] == "edges"
    assert float(record["prediction"]) == pytest.approx(24.5)
    assert "pass" in record


@pytest.mark.asyncio
async def test_cnf_draw_and_solve(tmp_path):
    code, out, _ = await run("cnf", "--l", "3", "--n", "20", "--beta", "1", "--seed", "2")
    assert code == 0
    assert out.startswith("c sparselimit")
    assert "p cnf 20 " in out

    dimacs = tmp_path / "unsat.cnf"
    dimacs.write_text("p cnf 3 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n", encoding="utf-8")
    code, out, _ = await run("cnf", "--solve", str(dimacs), "--seed", "0")
    assert code == 0
    assert rows(out)[0]["outcome"] == "unsat"

    broken = tmp_path / "broken.cnf"
    broken.write_text("1 2 0\n", encoding="utf-8")
    code, _, err = await run("cnf", "--solve", str(broken), "--seed", "0")
    assert code == 1
    assert "DimacsError" in err


@pytest.mark.asyncio
async def test_sat_scan_csv():
    code, out, _ = await run("sat-scan", "--l", "2", "--beta", "0.1,3", "--n", "30", "--samples", "10",
                             "--seed", "1", "--workers", "1")
    assert code == 0
    table = rows(out)
    assert [float(r["beta"]) for r in table] == [0.1, 3.0]
    assert float(table[0]["p_sat"]) > float(table[1]["p_sat"])


@pytest.mark.asyncio
async def test_sat_scan_rejects_negative_density():
    code, out, err = await run("sat-scan", "--l", "3", "--beta=-0.5,1", "--n", "20", "--samples", "2",
                               "--seed", "1", "--workers", "1")
    assert code == 2
    assert out == ""
    assert "UsageError" in err
