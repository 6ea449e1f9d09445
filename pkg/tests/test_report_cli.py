import json

import pytest

from japdr.aiger import emit_ascii, gen_counter, parse_file
from japdr.circuit import Counterexample, TraceFrame
from japdr.cli import main
from japdr.orchestrator import (
    Mode,
    RunReport,
    RunTotals,
    Verdict,
    VerdictStatus as S,
    VerificationTask,
    run_ja,
)
from japdr.report import (
    EXIT_FAILURES,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_UNKNOWN,
    EXIT_USAGE,
    exit_code,
    format_csv,
    format_json,
    format_report,
    format_text,
    validate_report_json,
)


def v(index, status):
    return Verdict(property_index=index, status=status)


@pytest.mark.parametrize(
    "statuses,want",
    [
        ([S.HOLDS_LOCAL, S.HOLDS_GLOBAL], EXIT_OK),
        ([S.ETF_CONFIRMED, S.HOLDS_LOCAL], EXIT_OK),
        ([S.FAILS_LOCAL, S.HOLDS_LOCAL], EXIT_FAILURES),
        ([S.FAILS_GLOBAL], EXIT_FAILURES),
        ([S.ETF_HOLDS_LOCAL], EXIT_FAILURES),
        ([S.UNKNOWN, S.HOLDS_LOCAL], EXIT_UNKNOWN),
        # a failure somewhere outranks an unknown elsewhere
        ([S.UNKNOWN, S.FAILS_LOCAL], EXIT_FAILURES),
        ([], EXIT_OK),
    ],
)
def test_exit_code_table(statuses, want):
    assert exit_code([v(i, s) for i, s in enumerate(statuses)]) == want


def ja_report():
    c, props = gen_counter(3)
    return run_ja(VerificationTask(c, tuple(props), Mode.JA))


def test_json_report_is_parse_stable():
    rep = ja_report()
    text = format_json(rep)
    assert text.endswith("\n")
    doc = json.loads(text)
    again = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    assert again == text
    assert validate_report_json(doc) == []


def test_json_report_content():
    doc = json.loads(format_json(ja_report()))
    assert doc["mode"] == "ja"
    assert doc["debugging_set"] == [0]
    by_index = {r["index"]: r for r in doc["verdicts"]}
    assert by_index[0]["status"] == "FailsLocal"
    assert by_index[0]["evidence"] == {"cex_depth": 0}
    assert by_index[1]["status"] == "HoldsLocal"
    assert by_index[1]["evidence"] == {"clauses": 0}
    assert by_index[1]["certified"] is True
    assert doc["totals"]["sat_calls"] > 0


def test_validate_report_json_flags_problems():
    doc = json.loads(format_json(ja_report()))
    del doc["verdicts"][0]["status"]
    doc["totals"]["sat_calls"] = "many"
    doc["debugging_set"] = [0, "x"]
    problems = validate_report_json(doc)
    assert len(problems) == 3
    assert any("status" in p for p in problems)
    assert validate_report_json([]) != []


def test_csv_report_columns():
    lines = format_csv(ja_report()).splitlines()
    assert lines[0] == "index,kind,status,time_s,frames,sat_calls,witness_file"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "eth" and first[2] == "FailsLocal"


def test_text_report_mentions_conclusion():
    rep = ja_report()
    text = format_text(rep)
    assert "FailsLocal" in text and "HoldsLocal" in text
    assert rep.conclusion in text


def test_format_report_dispatch():
    rep = ja_report()
    for fmt in ("text", "json", "csv"):
        payload, code = format_report(rep, fmt)
        assert isinstance(payload, bytes) and payload
        assert code == EXIT_FAILURES
    with pytest.raises(ValueError):
        format_report(rep, "yaml")


def counter_file(tmp_path, bits=3):
    c, _ = gen_counter(bits)
    path = tmp_path / f"counter{bits}.aag"
    path.write_bytes(emit_ascii(c))
    return path


def test_cli_check_text(tmp_path, capsys):
    code = main(["check", str(counter_file(tmp_path)), "--reuse-clauses", "off"])
    out = capsys.readouterr().out
    assert code == EXIT_FAILURES
    assert "FailsLocal" in out and "HoldsLocal" in out


def test_cli_check_json_and_witnesses(tmp_path, capsys):
    wdir = tmp_path / "wit"
    code = main(
        [
            "check",
            str(counter_file(tmp_path)),
            "--report",
            "json",
            "--witness-dir",
            str(wdir),
            "--reuse-clauses",
            "off",
        ]
    )
    out = capsys.readouterr().out
    assert code == EXIT_FAILURES
    doc = json.loads(out)
    assert validate_report_json(doc) == []
    # the failing property gets a concrete stimulus, the holding one a cert
    assert (wdir / "b0.wit").read_bytes() == b"1\nb0\n000\n10\n.\n"
    assert (wdir / "b1.wit").read_bytes() == b"0\nb1\n"
    by_index = {r["index"]: r for r in doc["verdicts"]}
    assert by_index[0]["witness_file"].endswith("b0.wit")


def test_cli_check_modes_and_csv(tmp_path, capsys):
    path = counter_file(tmp_path)
    for mode in ("sep-global", "joint"):
        code = main(
            ["check", str(path), "--mode", mode, "--report", "csv",
             "--reuse-clauses", "off"]
        )
        out = capsys.readouterr().out
        assert code == EXIT_FAILURES
        assert out.splitlines()[0].startswith("index,kind,status")
        assert "FailsGlobal" in out


def test_cli_check_etf_remarking(tmp_path, capsys):
    code = main(
        ["check", str(counter_file(tmp_path)), "--etf", "0",
         "--reuse-clauses", "off", "--report", "json"]
    )
    doc = json.loads(capsys.readouterr().out)
    by_index = {r["index"]: r for r in doc["verdicts"]}
    assert by_index[0]["kind"] == "etf"
    assert by_index[0]["status"] == "EtfConfirmed"
    # the remaining lone property has nothing left to assume and fails
    assert by_index[1]["status"] == "FailsLocal"
    assert code == EXIT_FAILURES


def test_cli_check_order_file(tmp_path, capsys):
    order = tmp_path / "order.txt"
    order.write_text("1,0\n")
    code = main(
        ["check", str(counter_file(tmp_path)), "--order", str(order),
         "--reuse-clauses", "off", "--report", "json"]
    )
    doc = json.loads(capsys.readouterr().out)
    assert code == EXIT_FAILURES
    assert [r["index"] for r in doc["verdicts"]] == [0, 1]  # output stays sorted


def test_cli_check_unknown_exit(tmp_path, capsys):
    c, _ = gen_counter(20)
    path = tmp_path / "big.aag"
    path.write_bytes(emit_ascii(c))
    code = main(
        ["check", str(path), "--mode", "sep-global",
         "--per-prop-timeout", "0.05", "--reuse-clauses", "off"]
    )
    capsys.readouterr()
    assert code == EXIT_FAILURES  # req still fails; failures outrank unknowns


def test_cli_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.aag"
    bad.write_text("not an aiger file\n")
    code = main(["check", str(bad)])
    err = capsys.readouterr().err
    assert code == EXIT_PARSE and err


def test_cli_missing_file_exit(tmp_path, capsys):
    code = main(["check", str(tmp_path / "absent.aag")])
    assert code == EXIT_PARSE


def test_cli_usage_exit(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["check"]) == EXIT_USAGE
    capsys.readouterr()


def test_cli_gen_counter_roundtrip(tmp_path, capsys):
    out = tmp_path / "c.aag"
    assert main(["gen-counter", "--bits", "4", "-o", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert main(["check", str(out), "--reuse-clauses", "off"]) == EXIT_FAILURES
    capsys.readouterr()


def test_cli_gen_counter_thresholds(tmp_path, capsys):
    out = tmp_path / "thr.aag"
    assert (
        main(["gen-counter", "--bits", "4", "--thresholds", "3", "-o", str(out)])
        == EXIT_OK
    )
    capsys.readouterr()
    code = main(["check", str(out), "--reuse-clauses", "off", "--report", "json"])
    doc = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert all(r["status"] in ("HoldsLocal", "HoldsGlobal") for r in doc["verdicts"])


def test_cli_gen_output_format_follows_extension(tmp_path, capsys):
    # .aig names get binary bytes, anything else ASCII
    aag = tmp_path / "c.aag"
    aig = tmp_path / "c.aig"
    assert main(["gen-counter", "--bits", "4", "-o", str(aag)]) == EXIT_OK
    assert main(["gen-counter", "--bits", "4", "-o", str(aig)]) == EXIT_OK
    assert aag.read_bytes().startswith(b"aag ")
    assert aig.read_bytes().startswith(b"aig ")
    ca, _ = parse_file(aag)
    cb, _ = parse_file(aig)
    assert len(ca.latches) == len(cb.latches) == 4
    rnd = tmp_path / "r.aig"
    assert main(["gen-random", "--seed", "5", "-o", str(rnd)]) == EXIT_OK
    assert rnd.read_bytes().startswith(b"aig ")
    capsys.readouterr()


def test_cli_gen_random_and_oracle(tmp_path, capsys):
    out = tmp_path / "r.aag"
    assert (
        main(
            ["gen-random", "--seed", "7", "--latches", "4", "--inputs", "2",
             "--gates", "8", "--props", "2", "-o", str(out)]
        )
        == EXIT_OK
    )
    capsys.readouterr()
    code = main(["oracle", str(out)])
    text = capsys.readouterr().out
    assert code in (EXIT_OK, EXIT_FAILURES)
    assert "local" in text.lower()


def test_cli_bmc(tmp_path, capsys):
    path = counter_file(tmp_path)
    wdir = tmp_path / "w"
    code = main(
        ["bmc", str(path), "--prop", "1", "--depth", "5",
         "--witness-dir", str(wdir)]
    )
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "depth 5" in out
    assert (wdir / "b1.wit").read_bytes().startswith(b"1\nb1\n")
    capsys.readouterr()
    code = main(["bmc", str(path), "--prop", "1", "--depth", "4"])
    out = capsys.readouterr().out
    assert code == EXIT_OK and "no counterexample" in out


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    path = counter_file(tmp_path)
    proc = subprocess.run(
        [sys.executable, "-m", "japdr", "check", str(path), "--reuse-clauses", "off"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_FAILURES
    assert "FailsLocal" in proc.stdout


def test_unknown_status_row_has_unknown_witness(tmp_path):
    c, props = gen_counter(3)
    task = VerificationTask(c, tuple(props), Mode.JA)
    rep = RunReport(
        task=task,
        verdicts=(
            Verdict(property_index=0, status=S.UNKNOWN),
            Verdict(
                property_index=1,
                status=S.FAILS_LOCAL,
                evidence=Counterexample((TraceFrame((0, 0, 0), (0, 0)),), 1),
            ),
        ),
        debugging_set=(),
        conclusion="budget ran out",
        totals=RunTotals(wall_s=0.0, sat_calls=0, clauses_learned=0),
    )
    payload, code = format_report(rep, "json")
    assert code == EXIT_FAILURES
    doc = json.loads(payload)
    assert {r["status"] for r in doc["verdicts"]} == {"Unknown", "FailsLocal"}
