import hashlib
import json
import subprocess
import sys

import jsonschema
import pytest

from conftest import CANONICAL, HELDOUT, PAPER
from vert import cli, identifiers, synthgen
from vert.hdl.printer import pretty_print_module


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, schema, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == cli.OK, err
    doc = json.loads(out)
    jsonschema.validate(doc, cli._schema(schema))
    return doc


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def canon(tmp_path):
    p = tmp_path / "canon.sv"
    p.write_text(CANONICAL)
    return p


def test_gen_zero(tmp_path, capsys):
    out = tmp_path / "d.jsonl"
    code, _, _ = run(capsys, "gen", "--count", 0, "--seed", 1, "--out", out)
    assert code == cli.OK and out.read_bytes() == b""


def test_gen_requires_seed(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--count", 3, "--out", tmp_path / "d.jsonl")
    assert code == cli.INVALID and "seed" in err


def test_gen_summary_and_records(tmp_path, capsys):
    out = tmp_path / "d.jsonl"
    doc = run_json(capsys, "gen", "gen", "--count", 50, "--seed", 2, "--synthetic-vars", 300, "--out", out)
    assert sum(row["total"] for row in doc["categories"]) == 50
    schema = cli._schema("dataset_record")
    lines = out.read_text().splitlines()
    assert len(lines) == 50
    for line in lines:
        jsonschema.validate(json.loads(line), schema)


def test_gen_bad_ratios(tmp_path, capsys):
    code, _, _ = run(capsys, "gen", "--count", 5, "--seed", 1, "--ratios", "0.5,0.5,0.5", "--out", tmp_path / "x")
    assert code == cli.INVALID


@pytest.mark.parametrize(
    "argv",
    [
        ("gen", "--count", 30, "--seed", 4, "--synthetic-vars", 200, "--out", "{out}"),
        ("synth", PAPER / "textbox4.sv", "--seed", 3, "--delayed", "--out", "{out}"),
        ("contaminate", PAPER / "textbox3.sv", "--seed", 5, "--out", "{out}"),
    ],
)
def test_seeded_commands_byte_identical(tmp_path, capsys, argv):
    hashes = []
    for i in range(2):
        out = tmp_path / f"out{i}"
        code, _, err = run(capsys, *[str(a).replace("{out}", str(out)) for a in argv])
        assert code == cli.OK, err
        hashes.append(digest(out))
    assert hashes[0] == hashes[1]


def test_json_reports_identical(tmp_path, capsys, canon):
    sva = tmp_path / "canon.sva"
    run(capsys, "synth", canon, "--out", sva)
    a = run(capsys, "eval", canon, sva, "--seed", 1, "--cycles", 200, "--json")[1]
    b = run(capsys, "eval", canon, sva, "--seed", 1, "--cycles", 200, "--json")[1]
    assert a == b


def test_check_textbox3(capsys):
    doc = run_json(capsys, "syntax", "check", PAPER / "textbox3_response.sva")
    assert doc["generated"] == 2 and doc["syntactically_correct_pct"] == 50.0


def test_eval_textbox3(capsys):
    doc = run_json(
        capsys, "eval", "eval", PAPER / "textbox3.sv", PAPER / "textbox3_response.sva", "--seed", 1, "--cycles", 300
    )
    (v,) = doc["verdicts"]
    assert v["name"] == "ResetTimer2" and v["reason"] == "antecedent omits guarding condition"
    assert doc["syntactically_correct_pct"] == 50.0 and doc["functionally_correct_pct"] == 0.0


def test_eval_requires_seed(capsys, canon):
    code, _, _ = run(capsys, "eval", canon, PAPER / "textbox3_response.sva")
    assert code == cli.INVALID


def test_coverage_and_leakage(tmp_path, capsys, canon):
    sva = tmp_path / "c.sva"
    run(capsys, "synth", canon, "--out", sva)
    doc = run_json(capsys, "coverage", "coverage", canon, sva)
    assert doc["cpc_pct"] == 100.0 and doc["total_paths"] == 2
    doc = run_json(capsys, "overlap", "leakage", canon, canon)
    assert doc["score"] == 1.0


def test_mine_vars(tmp_path, capsys):
    out = tmp_path / "pool.txt"
    doc = run_json(capsys, "mine", "mine-vars", PAPER / "textbox3.sv", PAPER / "textbox4.sv", "--out", out)
    assert doc["kept"] == len(identifiers.IdentifierPool.load(out))
    assert identifiers.IdentifierPool.load(out).is_clean


def test_invalid_inputs(tmp_path, capsys):
    assert run(capsys, "check", tmp_path / "missing.sva")[0] == cli.INVALID
    bad = tmp_path / "bad.sv"
    bad.write_text("not a module")
    assert run(capsys, "synth", bad)[0] == cli.INVALID
    assert run(capsys, "leakage", tmp_path / "nope", tmp_path / "nope2")[0] == cli.INVALID
    assert run(capsys, "bogus-command")[0] == cli.INVALID
    assert run(capsys, "eval", PAPER / "textbox3.sv", PAPER / "textbox3_response.sva", "--seed", 1, "--ops", "Nope")[0] == cli.INVALID


def test_config_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run settings\nseed = 8\ncount = 12\nsynthetic_vars = 100\n")
    a, b, c = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"
    assert run(capsys, "--config", cfg, "gen", "--out", a)[0] == cli.OK
    assert run(capsys, "gen", "--seed", 8, "--count", 12, "--synthetic-vars", 100, "--out", b)[0] == cli.OK
    assert digest(a) == digest(b)
    assert run(capsys, "--config", cfg, "gen", "--count", 5, "--out", c)[0] == cli.OK
    assert len(c.read_text().splitlines()) == 5


def test_console_script_exit_code(tmp_path):
    r = subprocess.run([sys.executable, "-m", "vert.cli", "check", str(tmp_path / "none.sva")], capture_output=True)
    assert r.returncode == cli.INVALID


def test_full_pipeline_self_test(tmp_path, capsys):
    # gen -> synth on each sample's own block -> check -> eval -> coverage
    count, seed = 200, 6
    out = tmp_path / "d.jsonl"
    assert run(capsys, "gen", "--count", count, "--seed", seed, "--synthetic-vars", 400, "--out", out)[0] == cli.OK
    pool = identifiers.synthesize(400, seed)
    config = synthgen.GenConfig(sample_count=count, pool=pool, seed=seed)
    for i, line in enumerate(out.read_text().splitlines()):
        meta = json.loads(line)["meta"]
        m, _ = synthgen.sample_module(meta["seed"], meta["category"], meta["sync"], pool, config)
        sv, sva = tmp_path / f"s{i}.sv", tmp_path / f"s{i}.sva"
        sv.write_text(pretty_print_module(m))
        assert run(capsys, "synth", sv, "--out", sva)[0] == cli.OK
        syn = run_json(capsys, "syntax", "check", sva)
        ev = run_json(capsys, "eval", "eval", sv, sva, "--seed", meta["seed"], "--cycles", 1000)
        cov = run_json(capsys, "coverage", "coverage", sv, sva)
        assert syn["syntactically_correct_pct"] == 100.0
        assert ev["functionally_correct_pct"] == 100.0, (i, [v for v in ev["verdicts"] if not v["functionally_correct"]])
        assert cov["cpc_pct"] == 100.0


def test_heldout_cli_runs(tmp_path, capsys):
    sva = tmp_path / "h.sva"
    assert run(capsys, "synth", HELDOUT / "pwm_unit.sv", "--out", sva)[0] == cli.OK
    doc = run_json(capsys, "eval", "eval", HELDOUT / "pwm_unit.sv", sva, "--seed", 1, "--cycles", 500)
    assert doc["cpc_pct"] == 100.0
