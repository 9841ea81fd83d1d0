from abc import ABC, abstractmethod
from domain.entities.run_record import RunRecord
from domain.entities.study import ScalingFit, SizeSummary, UsaCurvePoint
from domain.value_objects.types import ModelFamily


class StudyRepository(ABC):
    """스케일링 연구 결과 저장소 인터페이스입니다."""

    @abstractmethod
    def save_run_records(self, family: ModelFamily, records: list[RunRecord], name: str = "runs") -> None:
        """실행 기록을 저장합니다.

        Args:
            family: 모델 계열
            records: 실행 기록 목록
            name: 기록 묶음 이름
        """
        pass

    @abstractmethod
    def save_summary(self, family: ModelFamily, summaries: list[SizeSummary]) -> None:
        """크기별 집계 표를 저장합니다.

        Args:
            family: 모델 계열
            summaries: 크기별 집계 목록
        """
        pass

    @abstractmethod
    def save_fit(self, family: ModelFamily, fit: ScalingFit | None, error: str | None = None) -> None:
        """지수 피팅 결과를 저장합니다.

        Args:
            family: 모델 계열
            fit: 피팅 결과
            error: 피팅을 거부한 사유
        """
        pass

    @abstractmethod
    def save_plot_data(self, family: ModelFamily, summaries: list[SizeSummary]) -> None:
        """(N, ln median) 플롯 데이터를 저장합니다.

        Args:
            family: 모델 계열
            summaries: 크기별 집계 목록
        """
        pass

    @abstractmethod
    def save_usa_curve(self, family: ModelFamily, points: list[UsaCurvePoint]) -> None:
        """USA 확률 곡선을 저장합니다.

        Args:
            family: 모델 계열
            points: 크기별 USA 확률
        """
        pass
