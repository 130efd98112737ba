import json
import subprocess
import sys

import jsonschema
import pytest

from perpl.cli import main
from perpl.pipeline import PipelineConfig, corpus_manifest, resolve_path, run

NUM_OR_INF = {"anyOf": [{"type": "number", "minimum": 0}, {"const": "inf"}]}

SUPPORT = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["value", "weight"],
        "properties": {"value": {"type": "string"}, "weight": NUM_OR_INF, "exact": {"type": "string"}},
    },
}

SOLVE = {
    "type": "object",
    "required": ["support", "report"],
    "properties": {
        "support": SUPPORT,
        "report": {
            "type": "object",
            "required": ["exact", "converged", "scc_counts", "sccs"],
            "properties": {
                "sccs": {"type": "array", "items": {
                    "type": "object", "required": ["size", "class", "iterations", "residual"],
                    "properties": {"class": {"enum": ["linear", "nonlinear"]}}}},
            },
        },
        "sequence": {"type": "array", "items": {"type": "object", "required": ["type", "op"],
                                                 "properties": {"op": {"enum": ["D", "R"]}}}},
    },
}

MSPE = {
    "type": "object",
    "required": ["vars", "eqs", "roots"],
    "properties": {
        "vars": {"type": "array", "items": {"type": "string"}},
        "eqs": {"type": "array", "items": {
            "type": "object", "required": ["lhs", "monomials"],
            "properties": {"lhs": {"type": "integer"}, "monomials": {"type": "array", "items": {
                "type": "object", "required": ["coef", "vars"],
                "properties": {"coef": {"type": "string", "pattern": r"^\d+(/\d+)?$"},
                               "vars": {"type": "array", "items": {"type": "integer"}}}}}}}},
        "roots": {"type": "array", "items": {"type": "object", "required": ["value", "var"]}},
    },
}

ORACLE = {
    "type": "object",
    "required": ["support", "residual", "steps"],
    "properties": {
        "support": {"type": "array", "items": {"type": "object", "required": ["value", "weight"],
                                               "properties": {"weight": {"type": ["number", "string"]}}}},
        "steps": {"type": "integer"},
    },
}

CHECK = {"type": "object", "required": ["ok", "usage", "types"],
         "properties": {"usage": {"enum": ["affine", "linear"]}, "types": {"type": "object"}}}

TRANSFORM = {"type": "object", "required": ["sequence", "graphs", "program"]}

DIAGNOSTICS = {
    "type": "object",
    "required": ["diagnostics"],
    "properties": {"diagnostics": {"type": "array", "items": {
        "type": "object", "required": ["file", "line", "col", "stage", "severity", "message"]}}},
}


def cli(capsys, *args):
    status = main(list(args))
    out = capsys.readouterr()
    return status, out.out, out.err


def test_solve_pcfg_exact_json(capsys):
    status, out, _ = cli(capsys, "solve", "examples/pcfg_unit.ppl", "--exact", "--json")
    assert status == 0
    js = json.loads(out)
    jsonschema.validate(js, SOLVE)
    (item,) = js["support"]
    assert item["value"] == "()" and item["weight"] == pytest.approx(0.5, abs=1e-9)


def test_check_rejects_double_use(tmp_path, capsys):
    bad = tmp_path / "bad_double_use.ppl"
    bad.write_text("let f = \\x: Bool. x in (f true, f true)\n")
    status, _, err = cli(capsys, "check", str(bad))
    assert status == 1
    assert err.strip() == f"{bad}:1:24: error: linear variable 'f' is used more than once"
    status, _, err = cli(capsys, "check", str(bad), "--json")
    js = json.loads(err)
    jsonschema.validate(js, DIAGNOSTICS)
    assert js["diagnostics"][0]["stage"] == "typecheck"


def test_diagnostics_json(tmp_path, capsys):
    bad = tmp_path / "bad.ppl"
    bad.write_text("define = 3")
    status, _, err = cli(capsys, "check", str(bad), "--json")
    assert status == 1
    js = json.loads(err)
    jsonschema.validate(js, DIAGNOSTICS)
    assert js["diagnostics"][0]["stage"] == "parse"


def test_check_json(capsys):
    status, out, _ = cli(capsys, "check", "pda.ppl", "--json")
    js = json.loads(out)
    jsonschema.validate(js, CHECK)
    assert js["types"]["main"] == "Bool"


def test_linear_flag(tmp_path, capsys):
    f = tmp_path / "drop.ppl"
    f.write_text("let f = \\x: Bool. x in false\n")
    assert cli(capsys, "check", str(f))[0] == 0
    status, _, err = cli(capsys, "check", str(f), "--linear")
    assert status == 1 and "never used" in err
    status, out, _ = cli(capsys, "solve", str(f), "--linear")
    assert status == 1


def test_transform_trace(capsys):
    status, out, _ = cli(capsys, "transform", "examples/pda.ppl", "--trace-dr")
    assert status == 0
    assert "sequence: String:D, Stack:R" in out
    assert out.startswith("digraph DR {")


def test_transform_json(capsys):
    status, out, _ = cli(capsys, "transform", "counter.ppl", "--json")
    js = json.loads(out)
    jsonschema.validate(js, TRANSFORM)
    assert [s["op"] for s in js["sequence"]] == ["D", "R"]


def test_mspe_json(capsys):
    status, out, _ = cli(capsys, "mspe", "coin.ppl", "--json")
    js = json.loads(out)
    jsonschema.validate(js, MSPE)


def test_mspe_text(capsys):
    status, out, _ = cli(capsys, "mspe", "loop.ppl")
    assert status == 0 and out.startswith("z0 = ")


def test_solve_text_with_everything(capsys):
    status, out, _ = cli(capsys, "solve", "pda.ppl", "--trace-dr", "--emit-transformed", "--emit-mspe", "--exact")
    assert status == 0
    assert "sequence: String:D, Stack:R" in out and "define $u_String" in out and "root true" in out
    assert out.rstrip().splitlines()[-1].startswith("true\t1/16") or "true\t1/16" in out


def test_solve_json_extras(capsys):
    status, out, _ = cli(capsys, "solve", "pda.ppl", "--json", "--trace-dr", "--emit-mspe", "--emit-transformed")
    js = json.loads(out)
    jsonschema.validate(js, SOLVE)
    jsonschema.validate(js["mspe"], MSPE)
    assert "transformed" in js


def test_oracle_json(capsys):
    status, out, _ = cli(capsys, "oracle", "coin.ppl", "--steps", "10", "--json")
    js = json.loads(out)
    jsonschema.validate(js, ORACLE)
    assert js["support"] == [{"value": "true", "weight": "3/10"}, {"value": "false", "weight": "7/10"}]


def test_missing_file(capsys):
    status, _, err = cli(capsys, "check", "no_such_program.ppl")
    assert status == 1 and "no such file" in err


def test_no_dr_sequence_exit_code(tmp_path, capsys):
    f = tmp_path / "stuck.ppl"
    f.write_text("data T = N | C T\ndefine d (x: T) : Unit = case x of N => () | C y => d y\n"
                 "define f (y: T) : Unit = d (C (let () = d y in N))\n"
                 "define g (y: T) (x: T) : Unit = case x of N => d y | C z => let () = d z in d y\n(f, g)\n")
    status, _, err = cli(capsys, "solve", str(f))
    assert status == 2 and "no successful sequence" in err


def test_budget_exit_codes(capsys):
    status, _, err = cli(capsys, "solve", "epda.ppl", "--max-vars", "1000")
    assert status == 3 and "budget" in err
    status, _, err = cli(capsys, "solve", "pcfg_unit.ppl", "--max-iters", "2")
    assert status == 3 and "did not converge" in err


def test_config_is_serializable():
    cfg = PipelineConfig(mode="oracle", steps=5)
    assert json.loads(json.dumps(cfg.to_json()))["steps"] == 5


def test_run_api():
    out = run(PipelineConfig(mode="solve", exact=True), "amb (factor 1/4 in true) (factor 3/4 in false)")
    assert out.status == 0 and out.stdout == "true\t1/4\nfalse\t3/4"


def test_manifest_entries():
    entries = corpus_manifest()
    names = {e["name"] for e in entries}
    assert {"coin", "loop", "pcfg_unit", "cfg_parse", "counter", "pda", "epda"} <= names
    for e in entries:
        assert resolve_path(e["path"]).exists() and e["provenance"]
    loop = next(e for e in entries if e["name"] == "loop")
    assert loop["distribution"]["true"] == 0.5


def test_test_corpus_command(capsys):
    status, out, _ = cli(capsys, "test-corpus")
    assert status == 0
    assert out.count("PASS") == len(corpus_manifest()) and "FAIL" not in out


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "perpl.cli", "solve", "coin.ppl", "--json"],
                       capture_output=True, text=True, check=True)
    jsonschema.validate(json.loads(r.stdout), SOLVE)
