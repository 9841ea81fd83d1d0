import argparse
import io
import json
import math
from pathlib import Path
import pytest
from domain.entities.instance import Instance
from domain.value_objects.types import ModelFamily
from infrastructure.persistence.native_instance_file import FileInstanceRepository, format_instances, parse_instances
from interface.cli.parser import OUTPUT_DIR_ENV, build_parser, parse_command
from main import main

DOCS_PATH = Path(__file__).resolve().parent.parent / "docs" / "CLI_USAGE.md"


def _write(path: Path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestParser:
    """명령행 해석 테스트"""

    def test_sizes_range_is_inclusive(self):
        """start:stop:step 은 stop 을 포함합니다."""
        config = parse_command(["study", "--family", "locked-1in3", "--sizes", "24:96:8"])
        assert config.sizes == (24, 32, 40, 48, 56, 64, 72, 80, 88, 96)

    def test_table1_ladder(self):
        """table1 은 Exact Cover 표의 크기입니다."""
        config = parse_command(["usa-curve", "--family", "unlocked-1in3", "--sizes", "table1"])
        assert config.sizes == (16, 32, 64, 128, 192, 256)

    def test_defaults(self):
        """지정하지 않은 옵션은 기본값을 씁니다."""
        config = parse_command(["walksat", "--input", "x.cnf"])
        assert config.noise == 0.5
        assert config.seed == 0
        assert config.log_level == "WARNING"
        assert not config.json_errors

    def test_every_option_documented(self):
        """모든 하위 명령의 모든 옵션이 CLI 문서에 나옵니다."""
        text = DOCS_PATH.read_text(encoding="utf-8")
        parser = build_parser()
        (subparsers,) = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
        for name, subparser in subparsers.choices.items():
            assert f"`{name}`" in text
            for action in subparser._actions:
                for option in action.option_strings:
                    if option in ("-h", "--help"):
                        continue
                    assert option in text, f"{name} {option}"


class TestExitCodes:
    """종료 코드와 오류 출력 테스트"""

    def test_unknown_option_is_usage_error(self, capsys):
        """알 수 없는 옵션은 종료 코드 2입니다."""
        assert main(["gen", "--family", "locked-1in3", "--n", "10", "--bogus"]) == 2
        assert "오류" in capsys.readouterr().err

    def test_missing_required_option(self, capsys):
        """필수 옵션이 없으면 종료 코드 2입니다."""
        assert main(["gen", "--family", "locked-1in3"]) == 2
        assert "--n" in capsys.readouterr().err

    def test_json_usage_error(self, capsys):
        """--json-errors 이면 표준 오류에 JSON 문서를 씁니다."""
        assert main(["study", "--family", "locked-1in3", "--sizes", "table1", "--json-errors"]) == 2
        document = json.loads(capsys.readouterr().err)
        assert document["exit_code"] == 2
        assert document["error"] == "UsageError"

    def test_seed_out_of_range(self):
        """음수 시드는 사용 오류입니다."""
        assert main(["gen", "--family", "locked-1in3", "--n", "10", "--seed", "-1"]) == 2

    def test_missing_input_file(self, temp_data_dir):
        """입력 파일이 없으면 종료 코드 4입니다."""
        assert main(["walksat", "--input", str(temp_data_dir / "missing.cnf")]) == 4

    def test_malformed_dimacs_reports_line(self, temp_data_dir, capsys):
        """형식 오류는 종료 코드 4이며 줄 번호를 보고합니다."""
        path = _write(temp_data_dir / "bad.cnf", "p cnf 2 1\n1 5 0\n")
        assert main(["walksat", "--input", path, "--json-errors"]) == 4
        document = json.loads(capsys.readouterr().err)
        assert document["line_number"] == 2

    def test_solve_budget_exceeded(self, temp_data_dir, capsys):
        """DPLL 예산을 넘기면 종료 코드 3입니다."""
        path = _write(temp_data_dir / "or.cnf", "p cnf 3 1\n1 2 3 0\n")
        assert main(["solve", "--input", path, "--format", "dimacs", "--node-budget", "1"]) == 3
        assert json.loads(capsys.readouterr().out)["count_class"] == "budget-exceeded"

    def test_walksat_not_found(self, temp_data_dir, capsys):
        """WalkSAT 이 해를 못 찾으면 종료 코드 3이고 flips 는 null 입니다."""
        path = _write(temp_data_dir / "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n")
        assert main(["walksat", "--input", path, "--max-flips", "5", "--max-tries", "2"]) == 3
        document = json.loads(capsys.readouterr().out)
        assert document["flips"] is None
        assert document["tries"] == 2


class TestCommands:
    """하위 명령 실행 테스트"""

    def test_gen_locked_clause_count(self, capsys):
        """locked-1in3, N=100 은 절 79개로 생성됩니다."""
        assert main(["gen", "--family", "locked-1in3", "--n", "100", "--seed", "7"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "p native locked-1in3 100 79"

    def test_gen_is_deterministic(self, capsys):
        """같은 시드는 같은 출력을 냅니다."""
        argv = ["gen", "--family", "xorsat-poisson", "--n", "30", "--count", "2", "--seed", "3"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first
        assert first.count("p native") == 2

    def test_walksat_trivial_file(self, temp_data_dir, capsys):
        """단일 리터럴 식은 바로 풀립니다."""
        path = _write(temp_data_dir / "unit.cnf", "p cnf 1 1\n1 0\n")
        assert main(["walksat", "--input", path, "--seed", "9", "--instance-id", "unit"]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["solved"]
        assert document["flips"] in (0, 1)
        assert document["instance_id"] == "unit"
        assert document["seed"] == 9

    def test_solve_native_unique(self, tiny_usa_xorsat, temp_data_dir, capsys):
        """네이티브 유일해 인스턴스는 one 과 증인을 출력합니다."""
        path = _write(temp_data_dir / "tiny.txt", format_instances([tiny_usa_xorsat]))
        assert main(["solve", "--input", path]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["count_class"] == "one"
        assert document["witness"] == "0101"

    def test_walksat_empty_formula_is_usage_error(self, temp_data_dir, capsys):
        """절이 없는 식은 WalkSAT 입력으로 받지 않고 종료 코드 2입니다."""
        path = _write(temp_data_dir / "empty.cnf", "p cnf 3 0\n")
        assert main(["walksat", "--input", path, "--json-errors"]) == 2
        assert json.loads(capsys.readouterr().err)["exit_code"] == 2

    def test_walksat_fully_pruned_instance_is_usage_error(self, temp_data_dir):
        """가지치기로 비어 버린 Exact Cover 인스턴스도 종료 코드 2입니다."""
        instance = Instance(n_vars=0, clauses=(), family=ModelFamily.UNLOCKED_1IN3)
        path = _write(temp_data_dir / "pruned.txt", format_instances([instance]))
        assert main(["walksat", "--input", path, "--format", "native"]) == 2

    def test_filter_between_standard_streams(self, tiny_usa_xorsat, monkeypatch, capsys):
        """'-' 입력은 표준 입력에서 읽고 출력 생략 시 표준 출력에 씁니다."""
        monkeypatch.setattr("sys.stdin", io.StringIO(format_instances([tiny_usa_xorsat])))
        assert main(["filter", "--input", "-"]) == 0
        kept = parse_instances(capsys.readouterr().out)
        assert len(kept) == 1
        assert kept[0].known_solution == (0, 1, 0, 1)

    def test_gen_to_file_reloads_through_repository(self, temp_data_dir):
        """gen 이 쓴 파일은 인스턴스 저장소로 다시 읽을 수 있습니다."""
        target = temp_data_dir / "nested" / "raw.txt"
        argv = ["gen", "--family", "locked-2in4", "--n", "20", "--count", "3", "--seed", "5", "--output", str(target)]
        assert main(argv) == 0
        loaded = FileInstanceRepository(target).load_instances()
        assert len(loaded) == 3
        assert all(instance.n_clauses == 14 for instance in loaded)

    def test_index_out_of_range(self, tiny_usa_xorsat, temp_data_dir):
        """없는 인스턴스 번호는 일반 실패(1)입니다."""
        path = _write(temp_data_dir / "tiny.txt", format_instances([tiny_usa_xorsat]))
        assert main(["solve", "--input", path, "--index", "3"]) == 1

    def test_fit_command(self, temp_data_dir):
        """집계 CSV 를 피팅해 JSON 으로 씁니다."""
        lines = ["N,median,censored"]
        lines += [f"{n},{repr(4.0 * math.exp(0.08 * n))},0" for n in (10, 20, 30, 40)]
        source = _write(temp_data_dir / "summary.csv", "\n".join(lines) + "\n")
        target = temp_data_dir / "fit.json"
        assert main(["fit", "--input", source, "--fit-window", "10,20,30,40", "--output", str(target)]) == 0
        document = json.loads(target.read_text(encoding="utf-8"))
        assert document["mu"] == pytest.approx(0.08)
        assert document["A"] == pytest.approx(4.0)
        assert document["window"] == [10, 20, 30, 40]

    def test_study_reproducible_with_workers(self, temp_data_dir):
        """같은 시드의 연구는 작업자 수와 무관하게 같은 파일을 만듭니다."""
        base = ["study", "--family", "xorsat-3reg", "--sizes", "12:20:4", "--per-size", "3", "--seed", "5"]
        assert main(base + ["--output-dir", str(temp_data_dir / "a")]) == 0
        assert main(base + ["--output-dir", str(temp_data_dir / "b"), "--workers", "2"]) == 0
        names = sorted(p.name for p in (temp_data_dir / "a").iterdir())
        assert "xorsat-3reg_summary.csv" in names
        for name in names:
            assert (temp_data_dir / "a" / name).read_bytes() == (temp_data_dir / "b" / name).read_bytes()

    def test_output_dir_from_environment(self, temp_data_dir, monkeypatch):
        """--output-dir 가 없으면 환경 변수의 디렉토리를 씁니다."""
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(temp_data_dir / "env"))
        argv = ["usa-curve", "--family", "xorsat-3reg", "--sizes", "12,16", "--trials", "5"]
        assert main(argv) == 0
        assert (temp_data_dir / "env" / "xorsat-3reg_usa_curve.csv").exists()
