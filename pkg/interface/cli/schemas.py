from pydantic import BaseModel, Field


class RunRecordDocument(BaseModel):
    """WalkSAT 실행 기록 JSON 스키마입니다.

    Attributes:
        instance_id: 인스턴스 식별자
        noise: 사용한 노이즈
        flips: 누적 플립 수 (찾지 못하면 null)
        tries: 사용한 시도 수
        seed: 실행 시드
        solved: 해를 찾았는지 여부
    """
    instance_id: str = Field(..., description="인스턴스 식별자")
    noise: float = Field(..., ge=0.0, le=1.0, description="사용한 노이즈")
    flips: int | None = Field(..., description="누적 플립 수")
    tries: int = Field(..., ge=0, description="사용한 시도 수")
    seed: int = Field(..., ge=0, description="실행 시드")
    solved: bool = Field(..., description="해를 찾았는지 여부")


class SolveDocument(BaseModel):
    """해 개수 판정 결과 JSON 스키마입니다.

    할당은 변수 0부터의 0/1 문자열로 씁니다.
    """
    count_class: str = Field(..., description="zero, one, two-or-more, budget-exceeded")
    witness: str | None = Field(None, description="첫 번째 만족 할당")
    second_witness: str | None = Field(None, description="두 번째 만족 할당")
    nodes: int = Field(0, ge=0, description="DPLL 분기 노드 수")


class FitDocument(BaseModel):
    """지수 피팅 결과 JSON 스키마입니다.

    Attributes:
        A: 앞 계수
        mu: 변수당 성장률
        stderr: mu 의 표준오차
        window: 피팅에 사용한 N
        residuals: ln(median) 잔차
        excluded: 검열되어 제외한 N
    """
    A: float = Field(..., gt=0.0, description="앞 계수")
    mu: float = Field(..., description="변수당 성장률")
    stderr: float = Field(..., description="mu 의 표준오차")
    window: list[int] = Field(..., min_length=3, description="피팅에 사용한 N")
    residuals: list[float] = Field(default_factory=list, description="ln(median) 잔차")
    excluded: list[int] = Field(default_factory=list, description="검열되어 제외한 N")


class ErrorDocument(BaseModel):
    """--json-errors 사용 시 표준 오류로 내보내는 오류 스키마입니다."""
    error: str = Field(..., description="오류 종류")
    message: str = Field(..., description="오류 메시지")
    exit_code: int = Field(..., description="프로세스 종료 코드")
    line_number: int | None = Field(None, description="형식 오류가 난 줄 번호")
