import csv
import json
import math
from pathlib import Path
from domain.entities.run_record import RunRecord
from domain.entities.study import ScalingFit, SizeSummary, UsaCurvePoint
from domain.repositories.study_repository import StudyRepository
from domain.value_objects.types import ModelFamily

SUMMARY_FIELDS = ["N", "median", "q25", "q75", "solved_fraction", "censored", "usa_instances", "insufficient", "skipped"]
PLOT_FIELDS = ["N", "ln_median", "censored"]
USA_CURVE_FIELDS = ["N", "inv_n", "trials", "usa_count", "p_usa", "err", "degenerate", "skipped"]


def read_summary_table(path: Path) -> list[dict[str, str]]:
    """집계 CSV 를 읽습니다.

    Args:
        path: summary CSV 경로

    Returns:
        행 딕셔너리 목록
    """
    with open(path, "r", newline="", encoding="utf-8-sig") as f:
        return list(csv.DictReader(f))


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict[str, str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8-sig") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def fit_to_dict(fit: ScalingFit | None, error: str | None = None) -> dict:
    if fit is None:
        return {"A": None, "mu": None, "stderr": None, "window": [], "residuals": [], "excluded": [], "error": error}
    return {
        "A": fit.prefactor,
        "mu": fit.mu,
        "stderr": fit.mu_stderr,
        "window": list(fit.fit_window),
        "residuals": list(fit.residuals),
        "excluded": list(fit.excluded_sizes),
        "error": error,
    }


class CsvStudyRepository(StudyRepository):
    """파일 기반 스케일링 연구 결과 저장소입니다.

    파일 이름은 모두 계열 이름으로 시작합니다: ``{family}_summary.csv``,
    ``{family}_fit.json``, ``{family}_plot.csv``, ``{family}_runs.jsonl``,
    ``{family}_probe_runs.jsonl``, ``{family}_usa_curve.csv``.

    Attributes:
        data_dir: 결과 디렉토리 경로
    """

    def __init__(self, data_dir: Path):
        """저장소를 초기화합니다.

        Args:
            data_dir: 결과 디렉토리 경로 (없으면 생성)
        """
        self.data_dir = data_dir
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, family: ModelFamily, suffix: str) -> Path:
        return self.data_dir / f"{family.value}_{suffix}"

    def save_run_records(self, family: ModelFamily, records: list[RunRecord], name: str = "runs") -> None:
        """실행 기록을 JSON Lines 로 저장합니다 (한 줄에 한 실행)."""
        with open(self.path_for(family, f"{name}.jsonl"), "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")

    def load_run_records(self, family: ModelFamily, name: str = "runs") -> list[RunRecord]:
        with open(self.path_for(family, f"{name}.jsonl"), "r", encoding="utf-8") as f:
            return [RunRecord.from_dict(json.loads(line)) for line in f if line.strip()]

    def save_summary(self, family: ModelFamily, summaries: list[SizeSummary]) -> None:
        _write_csv(self.path_for(family, "summary.csv"), SUMMARY_FIELDS, [s.to_dict() for s in summaries])

    def load_summary(self, family: ModelFamily) -> list[dict[str, str]]:
        return read_summary_table(self.path_for(family, "summary.csv"))

    def save_fit(self, family: ModelFamily, fit: ScalingFit | None, error: str | None = None) -> None:
        """피팅 결과를 JSON 으로 저장합니다.

        Args:
            family: 모델 계열
            fit: 피팅 결과 (불가능했으면 None)
            error: 피팅을 거부한 사유
        """
        with open(self.path_for(family, "fit.json"), "w", encoding="utf-8") as f:
            json.dump(fit_to_dict(fit, error), f, indent=2, sort_keys=True)
            f.write("\n")

    def save_plot_data(self, family: ModelFamily, summaries: list[SizeSummary]) -> None:
        rows = []
        for summary in summaries:
            median = summary.statistics.median
            ln_median = math.log(median) if math.isfinite(median) and median > 0 else math.inf
            if median == 0:
                ln_median = -math.inf
            rows.append({
                "N": str(summary.n_vars),
                "ln_median": repr(ln_median),
                "censored": str(int(summary.statistics.censored)),
            })
        _write_csv(self.path_for(family, "plot.csv"), PLOT_FIELDS, rows)

    def save_usa_curve(self, family: ModelFamily, points: list[UsaCurvePoint]) -> None:
        _write_csv(self.path_for(family, "usa_curve.csv"), USA_CURVE_FIELDS, [p.to_dict() for p in points])
