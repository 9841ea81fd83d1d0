import logging
import math
from collections import Counter
from collections.abc import Sequence
import numpy as np
from application.degree_sampling import sample_truncated_poisson_degrees
from application.exact_solver import solve_instance
from domain.entities.instance import DegreeSequence, Instance, NativeClause
from domain.entities.model_spec import ModelSpec
from domain.exceptions import InfeasibleParametersError, RejectionBudgetExceeded
from domain.value_objects.types import (
    DEFAULT_DPLL_NODE_BUDGET,
    DEFAULT_REJECTION_BUDGET,
    CandidateVerdict,
    ClauseKind,
    CountClass,
    ModelFamily,
)


logger = logging.getLogger(__name__)


def _require_family(spec: ModelSpec, *families: ModelFamily) -> None:
    if spec.family not in families:
        names = ", ".join(f.value for f in families)
        raise ValueError(f"{spec.family.value} 명세는 이 생성기에서 지원하지 않습니다 (허용: {names})")


def prune_exact_cover(instance: Instance) -> Instance:
    """Exact Cover 인스턴스를 가지치기합니다.

    나머지 절들과 변수를 하나 이하로 공유하는 절을 더 이상 없을 때까지
    제거한 뒤, 어떤 절에도 속하지 않는 변수를 지우고 번호를 다시 매깁니다.
    제거 조건은 단조적이므로 고정점은 제거 순서와 무관합니다.

    Args:
        instance: UNLOCKED_1IN3 인스턴스

    Returns:
        가지치기된 인스턴스 (비어 있을 수 있음)
    """
    clauses = [clause.vars for clause in instance.clauses]
    while True:
        degree = Counter(v for clause in clauses for v in clause)
        kept = [clause for clause in clauses if sum(degree[v] >= 2 for v in clause) >= 2]
        if len(kept) == len(clauses):
            break
        clauses = kept

    used = sorted({v for clause in clauses for v in clause})
    relabel = {old: new for new, old in enumerate(used)}
    return Instance(
        n_vars=len(used),
        clauses=tuple(
            NativeClause(tuple(relabel[v] for v in clause), ClauseKind.EXACTLY_1_OF_3) for clause in clauses
        ),
        family=ModelFamily.UNLOCKED_1IN3,
    )


def generate_unlocked_1in3(
    spec: ModelSpec, rng: np.random.Generator, max_attempts: int = DEFAULT_REJECTION_BUDGET
) -> Instance:
    """Exact Cover (unlocked 1-in-3) 인스턴스를 생성합니다.

    서로 다른 3-부분집합 M 개를 균등하게 뽑은 뒤 가지치기합니다.

    Args:
        spec: UNLOCKED_1IN3 명세
        rng: 난수 생성기
        max_attempts: 중복 절 재추첨 상한

    Returns:
        가지치기된 인스턴스

    Raises:
        InfeasibleParametersError: 서로 다른 절 M 개를 만들 수 없는 경우
        RejectionBudgetExceeded: 중복 재추첨이 상한을 넘은 경우
    """
    _require_family(spec, ModelFamily.UNLOCKED_1IN3)
    if spec.n_clauses > math.comb(spec.n_vars, 3):
        raise InfeasibleParametersError(f"N={spec.n_vars}에서는 서로 다른 절 {spec.n_clauses}개를 만들 수 없습니다")

    seen: set[tuple[int, ...]] = set()
    triples: list[tuple[int, ...]] = []
    rejections = 0
    while len(triples) < spec.n_clauses:
        triple = tuple(sorted(rng.choice(spec.n_vars, size=3, replace=False).tolist()))
        if triple in seen:
            rejections += 1
            if rejections > max_attempts:
                raise RejectionBudgetExceeded("중복 절 재추첨 횟수가 상한을 넘었습니다")
            continue
        seen.add(triple)
        triples.append(triple)

    raw = Instance(
        n_vars=spec.n_vars,
        clauses=tuple(NativeClause(t, ClauseKind.EXACTLY_1_OF_3) for t in triples),
        family=ModelFamily.UNLOCKED_1IN3,
    )
    return prune_exact_cover(raw)


def match_stubs(
    degrees: Sequence[int], arity: int, rng: np.random.Generator, max_attempts: int = DEFAULT_REJECTION_BUDGET
) -> list[tuple[int, ...]]:
    """configuration model 로 변수 스텁을 절 슬롯에 배정합니다.

    한 절 안에 같은 변수가 두 번 들어가면 배정 전체를 다시 합니다.

    Args:
        degrees: 변수별 차수
        arity: 절당 슬롯 수 K
        rng: 난수 생성기
        max_attempts: 전체 재배정 상한

    Returns:
        정렬된 변수 튜플의 절 목록

    Raises:
        InfeasibleParametersError: 차수 합이 K 의 배수가 아닌 경우
        RejectionBudgetExceeded: 상한 안에 단순 배정을 찾지 못한 경우
    """
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    if stubs.size % arity:
        raise InfeasibleParametersError(f"차수 합 {stubs.size}은 절 크기 {arity}의 배수가 아닙니다")
    for _ in range(max_attempts):
        slots = np.sort(rng.permutation(stubs).reshape(-1, arity), axis=1)
        if np.all(slots[:, 1:] != slots[:, :-1]):
            return [tuple(row) for row in slots.tolist()]
    raise RejectionBudgetExceeded(f"{max_attempts}회 안에 중복 없는 스텁 배정을 찾지 못했습니다")


def generate_locked(
    spec: ModelSpec, rng: np.random.Generator, max_attempts: int = DEFAULT_REJECTION_BUDGET
) -> Instance:
    """locked 1-in-3 / 2-in-4 인스턴스를 생성합니다.

    Args:
        spec: LOCKED_1IN3 또는 LOCKED_2IN4 명세
        rng: 난수 생성기
        max_attempts: 차수열/배정 기각 상한

    Returns:
        모든 변수의 차수가 2 이상인 인스턴스
    """
    _require_family(spec, ModelFamily.LOCKED_1IN3, ModelFamily.LOCKED_2IN4)
    degrees = sample_truncated_poisson_degrees(
        spec.n_vars, spec.clause_arity * spec.n_clauses, rng, max_attempts
    )
    kind = spec.family.clause_kind
    clauses = match_stubs(degrees.degrees, spec.clause_arity, rng, max_attempts)
    return Instance(
        n_vars=spec.n_vars,
        clauses=tuple(NativeClause(c, kind) for c in clauses),
        family=spec.family,
    )


def generate_xorsat(
    spec: ModelSpec,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_REJECTION_BUDGET,
    random_parity: bool = False,
) -> Instance:
    """3-XORSAT 인스턴스를 생성합니다.

    기본값은 모든 패리티가 0인 게이지 형태이며 전부 0인 할당이 항상 해입니다.
    random_parity 를 켜면 패리티를 무작위로 뽑습니다.

    Args:
        spec: XORSAT_3REG 또는 XORSAT_POISSON 명세
        rng: 난수 생성기
        max_attempts: 차수열/배정 기각 상한
        random_parity: 무작위 패리티 사용 여부

    Returns:
        XORSAT 인스턴스
    """
    _require_family(spec, ModelFamily.XORSAT_3REG, ModelFamily.XORSAT_POISSON)
    target_sum = spec.clause_arity * spec.n_clauses
    if spec.family is ModelFamily.XORSAT_3REG:
        degrees = DegreeSequence(degrees=(spec.clause_arity,) * spec.n_vars, target_sum=target_sum)
    else:
        degrees = sample_truncated_poisson_degrees(spec.n_vars, target_sum, rng, max_attempts)
    clauses = match_stubs(degrees.degrees, spec.clause_arity, rng, max_attempts)
    if random_parity:
        parities = rng.integers(0, 2, size=len(clauses)).tolist()
    else:
        parities = [0] * len(clauses)
    return Instance(
        n_vars=spec.n_vars,
        clauses=tuple(NativeClause(c, ClauseKind.XOR_PARITY, p) for c, p in zip(clauses, parities)),
        family=spec.family,
    )


def generate_instance(
    spec: ModelSpec,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_REJECTION_BUDGET,
    random_parity: bool = False,
) -> Instance:
    """모델 계열에 맞는 생성기를 호출합니다."""
    if spec.family is ModelFamily.UNLOCKED_1IN3:
        return generate_unlocked_1in3(spec, rng, max_attempts)
    if spec.family.is_locked:
        return generate_locked(spec, rng, max_attempts)
    return generate_xorsat(spec, rng, max_attempts, random_parity)


def gauge_transform(instance: Instance, solution: Sequence[int], require_solution: bool = True) -> Instance:
    """XORSAT 인스턴스를 주어진 할당으로 게이지 변환합니다.

    각 절의 패리티에 절 위에서의 solution 패리티를 XOR 합니다. 변환된
    인스턴스의 해 집합은 원래 해 집합을 solution 만큼 XOR 이동한 것이므로
    solution 이 해이면 전부 0인 할당이 변환 결과의 해가 됩니다.

    Args:
        instance: XORSAT 계열 인스턴스
        solution: 길이 n_vars 의 0/1 할당
        require_solution: solution 이 해인지 확인할지 여부

    Returns:
        절 구조가 같은 새 인스턴스

    Raises:
        ValueError: XORSAT 이 아니거나 solution 이 해가 아닌 경우
    """
    if not instance.family.is_xorsat:
        raise ValueError(f"{instance.family.value} 인스턴스는 게이지 변환할 수 없습니다")
    if len(solution) != instance.n_vars:
        raise ValueError("할당 길이가 변수 개수와 다릅니다")
    if require_solution and not instance.is_satisfied_by(solution):
        raise ValueError("게이지 변환에 사용한 할당이 인스턴스의 해가 아닙니다")

    clauses = tuple(
        NativeClause(clause.vars, clause.kind, clause.parity ^ (sum(solution[v] for v in clause.vars) & 1))
        for clause in instance.clauses
    )
    known = None
    if instance.known_solution is not None:
        known = tuple(a ^ b for a, b in zip(instance.known_solution, solution))
    return Instance(n_vars=instance.n_vars, clauses=clauses, family=instance.family, known_solution=known)


def _judge_usa(instance: Instance, node_budget: int) -> CandidateVerdict:
    outcome = solve_instance(instance, node_budget)
    if outcome.count_class is CountClass.BUDGET_EXCEEDED:
        logger.warning("DPLL 노드 예산을 넘겨 USA 판정을 건너뜁니다", extra={"nodes": outcome.nodes})
        return CandidateVerdict.SKIPPED
    if not outcome.is_unique:
        return CandidateVerdict.NOT_USA
    instance.attach_solution(outcome.witness)
    return CandidateVerdict.USA


def filter_usa(instance: Instance, node_budget: int = DEFAULT_DPLL_NODE_BUDGET) -> bool:
    """인스턴스가 유일한 만족 할당(USA)을 갖는지 판정합니다.

    XORSAT 계열은 GF(2) 랭크로, 나머지는 CNF 에 대한 DPLL 로 판정합니다.
    유일해이면 known_solution 에 저장합니다. DPLL 예산을 넘기면 False 를
    반환하고 경고를 남깁니다.

    Args:
        instance: 판정할 인스턴스
        node_budget: DPLL 노드 상한

    Returns:
        유일해 여부
    """
    return _judge_usa(instance, node_budget) is CandidateVerdict.USA


def screen_candidate(instance: Instance, node_budget: int = DEFAULT_DPLL_NODE_BUDGET) -> CandidateVerdict:
    """앙상블 후보를 판정합니다.

    절이 남지 않은 인스턴스는 USA 가 아니며, DPLL 예산을 넘긴 후보는
    SKIPPED 입니다.
    """
    if instance.n_clauses == 0:
        return CandidateVerdict.NOT_USA
    return _judge_usa(instance, node_budget)


def is_usa_candidate(instance: Instance, node_budget: int = DEFAULT_DPLL_NODE_BUDGET) -> bool:
    """절이 하나 이상 남아 있고 USA 인 인스턴스인지 확인합니다."""
    return screen_candidate(instance, node_budget) is CandidateVerdict.USA
