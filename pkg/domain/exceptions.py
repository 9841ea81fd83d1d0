class InfeasibleParametersError(ValueError):
    """요청한 파라미터로는 유효한 객체를 만들 수 없을 때 발생합니다."""


class FormatError(ValueError):
    """파일 형식이 올바르지 않을 때 발생합니다.

    Attributes:
        line_number: 문제가 된 줄 번호 (알 수 없으면 None)
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"{message} (줄 {line_number})"
        super().__init__(message)


class DimacsFormatError(FormatError):
    """DIMACS CNF 파일 파싱 오류입니다."""


class NativeFormatError(FormatError):
    """네이티브 인스턴스 파일 파싱 오류입니다."""


class SizeLimitError(ValueError):
    """전수 열거가 허용 크기를 넘을 때 발생합니다."""


class FitError(ValueError):
    """지수 피팅을 수행할 수 없을 때 발생합니다."""


class BudgetExhaustedError(RuntimeError):
    """설정된 계산 예산을 모두 사용했을 때 발생합니다."""


class RejectionBudgetExceeded(BudgetExhaustedError):
    """기각 샘플링이 허용 횟수 안에 성공하지 못했을 때 발생합니다."""


class NoiseOptimizationError(RuntimeError):
    """모든 노이즈 탐색 지점이 예산 안에 해를 찾지 못했을 때 발생합니다.

    Attributes:
        records: 탐색 중 수행한 실행 기록
    """

    def __init__(self, message: str, records: tuple = ()):
        self.records = records
        super().__init__(message)
