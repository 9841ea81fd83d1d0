import json
import pytest
from domain.entities.run_record import WalkSatParams
from domain.entities.study import StudyConfig
from domain.value_objects.types import CountClass, ModelFamily, NoiseMode
from infrastructure.persistence.dimacs import parse_dimacs
from infrastructure.persistence.native_instance_file import FileInstanceRepository
from main import main


class TestScenario01:
    """시나리오 1: 인스턴스 생성부터 WalkSAT 실행까지 전체 흐름 테스트"""

    def test_generate_filter_encode_solve(self, benchmark_commands, temp_data_dir):
        """XORSAT 인스턴스를 생성, 필터링, 변환한 뒤 WalkSAT 으로 풉니다.

        Args:
            benchmark_commands: BenchmarkCommands 픽스처
            temp_data_dir: 임시 데이터 디렉토리 픽스처

        시나리오:
            1. 3-regular 3-XORSAT 후보 40개 생성 (무작위 패리티)
            2. USA 필터와 게이지 변환
            3. 파일 저장 후 다시 읽기
            4. DIMACS 변환 및 재해석
            5. WalkSAT 이 전부 0인 유일해를 찾는지 확인
        """
        candidates = benchmark_commands.generate(
            ModelFamily.XORSAT_3REG, 16, None, 40, seed=21, rejection_budget=1000, random_parity=True
        )
        assert len(candidates) == 40

        usa = benchmark_commands.filter_instances(candidates, node_budget=10**6, gauge=True)
        assert usa
        assert all(instance.known_solution == (0,) * 16 for instance in usa)

        repository = FileInstanceRepository(temp_data_dir / "usa.txt")
        repository.save_instances(usa)
        loaded = repository.load_instances()
        assert loaded == usa

        formula = parse_dimacs(benchmark_commands.encode(loaded[0]))
        assert formula.n_clauses == 4 * loaded[0].n_clauses

        record = benchmark_commands.walksat(formula, WalkSatParams(seed=8), instance_id="scenario")
        assert record.solved
        assert benchmark_commands.solve(formula, node_budget=10**6).count_class is CountClass.ONE

    def test_keep_all_preserves_order(self, benchmark_commands):
        """keep_all 이면 모든 후보를 순서대로 남기고 USA 만 해를 기록합니다."""
        candidates = benchmark_commands.generate(ModelFamily.LOCKED_2IN4, 12, None, 10, seed=2, rejection_budget=1000)
        kept = benchmark_commands.filter_instances(candidates, node_budget=10**6, keep_all=True)
        assert kept == candidates
        for instance in kept:
            outcome = benchmark_commands.solve(instance, node_budget=10**6)
            assert (instance.known_solution is not None) == (outcome.count_class is CountClass.ONE)


class TestScenario02:
    """시나리오 2: 명령행 파이프라인 테스트"""

    def test_cli_pipeline(self, temp_data_dir, capsys):
        """gen → filter → encode → walksat 을 파일로 연결합니다."""
        raw = temp_data_dir / "raw.txt"
        usa = temp_data_dir / "usa.txt"
        cnf = temp_data_dir / "first.cnf"
        assert main(["gen", "--family", "locked-1in3", "--n", "14", "--count", "60", "--seed", "4",
                     "--output", str(raw)]) == 0
        assert main(["filter", "--input", str(raw), "--output", str(usa)]) == 0
        assert usa.read_text(encoding="utf-8").count("p native") >= 1
        assert main(["encode", "--input", str(usa), "--output", str(cnf)]) == 0
        assert cnf.read_text(encoding="ascii").startswith("p cnf 14 ")

        capsys.readouterr()
        assert main(["walksat", "--input", str(cnf), "--seed", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["solved"]

        assert main(["walksat", "--input", str(usa), "--format", "native", "--seed", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["solved"]


class TestScenario03:
    """시나리오 3: 스케일링 연구 결과 재피팅"""

    def test_study_then_fit(self, benchmark_commands, temp_data_dir):
        """연구 집계 파일을 fit 명령으로 다시 피팅하면 같은 mu 가 나옵니다."""
        config = StudyConfig(
            family=ModelFamily.XORSAT_POISSON,
            sizes=(12, 16, 20, 24),
            instances_per_size=5,
            base_params=WalkSatParams(),
            noise_mode=NoiseMode.DEFAULT,
            master_seed=13,
            output_dir=temp_data_dir,
            fit_window=(16, 20, 24),
        )
        result = benchmark_commands.study(config)
        if result.fit is None:
            assert result.fit_error
            return

        target = temp_data_dir / "refit.json"
        argv = ["fit", "--input", str(temp_data_dir / "xorsat-poisson_summary.csv"),
                "--fit-window", "16,20,24", "--output", str(target)]
        assert main(argv) == 0
        document = json.loads(target.read_text(encoding="utf-8"))
        assert document["mu"] == pytest.approx(result.fit.mu)
