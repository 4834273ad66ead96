"""
Tests for the command-line entry point
"""

import json

import pytest

from app.cli import EXIT_AUDIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, main

pytestmark = pytest.mark.integration


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParser:
    """Argument handling"""

    def test_exit_codes_are_distinct(self):
        assert len({EXIT_OK, EXIT_AUDIT_FAILED, EXIT_USAGE}) == 3

    def test_missing_command(self, capsys):
        code, _, _ = run(capsys)
        assert code == EXIT_USAGE

    def test_help(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == EXIT_OK
        assert "ultraretract" in out

    def test_unknown_reduction(self, capsys):
        code, _, _ = run(capsys, "reduce", "--which", "s-to-n")
        assert code == EXIT_USAGE

    def test_seed_default_comes_from_settings(self):
        assert build_parser().parse_args(["verify", "--suite", "kernel"]).seed == 0


class TestPadicCommand:
    """padic eval"""

    def test_plain_value(self, capsys):
        code, out, _ = run(capsys, "padic", "--p", "3", "eval", "inv(3) * 3")
        assert code == EXIT_OK
        assert out.strip() == "1"

    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "padic", "--p", "3", "--prec", "4", "--json", "eval", "12 - 3")
        assert code == EXIT_OK
        result = json.loads(out)
        assert result["exact"] == "9"
        assert result["valuation"] == 2
        assert len(result["approximants"]) == 5

    def test_absolute_value(self, capsys):
        code, out, _ = run(capsys, "padic", "--p", "3", "--json", "eval", "abs(12)")
        assert code == EXIT_OK
        assert json.loads(out)["value"] == "1/3"

    def test_not_a_prime(self, capsys):
        code, _, err = run(capsys, "padic", "--p", "4", "eval", "1")
        assert code == EXIT_USAGE
        assert "error:" in err

    def test_malformed_expression(self, capsys):
        code, _, err = run(capsys, "padic", "--p", "3", "eval", "1 $ 2")
        assert code == EXIT_USAGE
        assert "error:" in err


class TestVerifyCommand:
    """verify --suite"""

    def test_kernel_suite(self, capsys):
        code, out, _ = run(capsys, "--seed", "5", "verify", "--suite", "kernel", "--trials", "10")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["passed"] is True
        assert report["seed"] == 5


class TestFixtureErrors:
    """Bad inputs map to the usage exit code"""

    def test_invalid_fixture_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"space": "cantor", "kind": "ajar"}')
        code, _, err = run(capsys, "dugundji", "--space", "cantor", "--fixture", str(path))
        assert code == EXIT_USAGE
        assert "invalid input" in err

    def test_point_outside_ambient(self, capsys):
        code, _, _ = run(capsys, "retract", "--space", "cantor", "--A", "cantor_cyl1.json",
                         "--B", "cantor_cyl0.json", "--point", "0")
        assert code == EXIT_USAGE

    def test_open_fixture_rejected(self, capsys):
        code, _, _ = run(capsys, "retract", "--space", "cantor", "--B", "cantor_open01.json", "--point", "1")
        assert code == EXIT_USAGE

    def test_fixture_count(self, capsys):
        code, _, _ = run(capsys, "reduce", "--which", "n0-to-n", "--fixture", "cantor_cyl00.json", "cantor_cyl1.json")
        assert code == EXIT_USAGE


@pytest.mark.slow
class TestAuditedCommands:
    """Commands that build and audit constructions"""

    def test_dugundji(self, capsys, tmp_path):
        out_path = tmp_path / "system.json"
        code, _, _ = run(capsys, "dugundji", "--space", "zp:3", "--fixture", "z3_ball0_r1o9.json",
                         "--depth", "3", "--out", str(out_path))
        assert code == EXIT_OK
        dump = json.loads(out_path.read_text())
        assert dump["coefficient"] == "2"
        assert dump["pieces"]
        assert dump["report"]["passed"] is True

    def test_dugundji_clopen(self, capsys):
        code, out, _ = run(capsys, "dugundji", "--space", "cantor", "--fixture", "cantor_cyl0.json",
                           "--depth", "4", "--clopen")
        assert code == EXIT_OK
        assert json.loads(out)["coefficient"] == "2"

    def test_retract(self, capsys):
        code, out, _ = run(capsys, "retract", "--space", "cantor", "--B", "cantor_cyl0.json",
                           "--point", "1", "--prec", "3", "--samples", "4")
        assert code == EXIT_OK
        result = json.loads(out)
        assert result["value"].startswith("0")
        assert result["report"]["passed"] is True

    def test_reduce_samples(self, capsys):
        code, out, _ = run(capsys, "reduce", "--which", "n0-to-s")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["strong"] is True
        assert report["fixtures"][0] == "sample-0"

    def test_reduce_fixture_files(self, capsys):
        code, out, _ = run(capsys, "reduce", "--which", "n-to-n0", "--fixture",
                           "cantor_cyl00.json", "cantor_cyl1.json", "cantor_whole.json")
        assert code == EXIT_OK
        assert json.loads(out)["report"]["passed"] is True
