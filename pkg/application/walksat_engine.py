"""SKC WalkSAT 엔진.

절별 참 리터럴 개수와 변수별 break 값을 플립마다 증분 갱신합니다.
미충족 절 집합은 위치 배열을 둔 리스트로 유지하여 삽입, 삭제, 균등 추출이
모두 O(1) 입니다.
"""
import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass
import numpy as np
from application.random_streams import UniformBuffer, generator_from_seed
from domain.entities.cnf_formula import CnfFormula
from domain.entities.run_record import FlipStatistics, RunRecord, WalkSatParams


logger = logging.getLogger(__name__)


class IndexedSet:
    """0..capacity-1 정수의 집합입니다 (O(1) 삽입/삭제/임의 접근)."""

    def __init__(self, capacity: int):
        self.members: list[int] = []
        self._position = [-1] * capacity

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, item: int) -> bool:
        return self._position[item] >= 0

    def add(self, item: int) -> None:
        if self._position[item] >= 0:
            return
        self._position[item] = len(self.members)
        self.members.append(item)

    def remove(self, item: int) -> None:
        index = self._position[item]
        if index < 0:
            return
        last = self.members.pop()
        if last != item:
            self.members[index] = last
            self._position[last] = index
        self._position[item] = -1

    def clear(self) -> None:
        for item in self.members:
            self._position[item] = -1
        self.members.clear()


class SearchState:
    """WalkSAT 탐색 상태입니다.

    Attributes:
        value: 변수별 현재 값 (0/1)
        true_count: 절별 참 리터럴 개수
        break_count: 변수별 break 값 (뒤집으면 거짓이 되는 충족 절 수)
        unsat: 참 리터럴이 없는 절의 집합
    """

    def __init__(self, formula: CnfFormula):
        """식에서 출현 목록을 만듭니다.

        Args:
            formula: 절이 하나 이상인 CNF 식

        Raises:
            ValueError: 절이 없는 경우
        """
        if formula.n_clauses == 0:
            raise ValueError("WalkSAT 은 절이 하나 이상인 식이 필요합니다")
        self.n_vars = formula.n_vars
        self.clauses = [tuple(dict.fromkeys(clause)) for clause in formula.literal_codes()]
        self.clause_vars = [tuple(lit >> 1 for lit in clause) for clause in self.clauses]
        # occurrences[lit]: lit 이 들어 있는 절 번호
        self.occurrences: list[list[int]] = [[] for _ in range(2 * self.n_vars)]
        for index, clause in enumerate(self.clauses):
            for lit in clause:
                self.occurrences[lit].append(index)
        self.value = [0] * self.n_vars
        self.true_count = [0] * len(self.clauses)
        self.break_count = [0] * self.n_vars
        self.unsat = IndexedSet(len(self.clauses))

    def reset(self, assignment: Sequence[int]) -> None:
        """할당을 설정하고 모든 보조 구조를 처음부터 계산합니다."""
        if len(assignment) != self.n_vars:
            raise ValueError("할당 길이가 변수 개수와 다릅니다")
        self.value = [int(bit) for bit in assignment]
        self.true_count, self.break_count, unsat = self.recompute()
        self.unsat.clear()
        for index in unsat:
            self.unsat.add(index)

    def _lit_true(self, lit: int) -> bool:
        return self.value[lit >> 1] != (lit & 1)

    def recompute(self) -> tuple[list[int], list[int], list[int]]:
        """현재 할당에서 보조 구조를 새로 계산합니다.

        Returns:
            (절별 참 리터럴 개수, 변수별 break 값, 미충족 절 목록)
        """
        true_count = [0] * len(self.clauses)
        break_count = [0] * self.n_vars
        unsat = []
        for index, clause in enumerate(self.clauses):
            true_lits = [lit for lit in clause if self._lit_true(lit)]
            true_count[index] = len(true_lits)
            if not true_lits:
                unsat.append(index)
            elif len(true_lits) == 1:
                break_count[true_lits[0] >> 1] += 1
        return true_count, break_count, unsat

    def audit(self) -> None:
        """증분 갱신 값이 재계산 값과 같은지 확인합니다.

        Raises:
            RuntimeError: 불일치가 있는 경우
        """
        true_count, break_count, unsat = self.recompute()
        if true_count != self.true_count:
            raise RuntimeError("절별 참 리터럴 개수가 재계산 값과 다릅니다")
        if break_count != self.break_count:
            raise RuntimeError("break 값이 재계산 값과 다릅니다")
        if sorted(unsat) != sorted(self.unsat.members):
            raise RuntimeError("미충족 절 집합이 재계산 값과 다릅니다")

    def _sole_true_var(self, index: int) -> int:
        for lit in self.clauses[index]:
            if self._lit_true(lit):
                return lit >> 1
        raise RuntimeError(f"절 {index}에 참 리터럴이 없습니다")

    def flip(self, var: int) -> None:
        """변수 하나를 뒤집고 보조 구조를 증분 갱신합니다."""
        new_value = 1 - self.value[var]
        self.value[var] = new_value
        made_true = self.occurrences[2 * var + (1 - new_value)]
        made_false = self.occurrences[2 * var + new_value]
        true_count = self.true_count
        break_count = self.break_count

        for index in made_true:
            count = true_count[index]
            if count == 0:
                self.unsat.remove(index)
                break_count[var] += 1
            elif count == 1:
                for lit in self.clauses[index]:
                    if lit >> 1 != var and self._lit_true(lit):
                        break_count[lit >> 1] -= 1
                        break
            true_count[index] = count + 1

        for index in made_false:
            count = true_count[index] - 1
            true_count[index] = count
            if count == 0:
                self.unsat.add(index)
                break_count[var] -= 1
            elif count == 1:
                break_count[self._sole_true_var(index)] += 1


@dataclass(frozen=True, slots=True)
class SearchOutcome:
    """엔진 실행 결과입니다.

    Attributes:
        flips: 누적 플립 수 (찾지 못하면 None)
        tries: 사용한 시도 수
        assignment: 찾은 만족 할당 (찾지 못하면 None)
    """
    flips: int | None
    tries: int
    assignment: tuple[int, ...] | None


class WalkSatEngine:
    """SKC 변형 WalkSAT 입니다.

    매 스텝 미충족 절 하나를 균등하게 고릅니다. break 값이 0인 변수가 있으면
    그중 하나를 균등하게 뒤집고(프리비), 없으면 확률 noise 로 절 안의 임의
    변수를, 그렇지 않으면 break 값이 최소인 변수 중 하나를 뒤집습니다.
    """

    def __init__(self, formula: CnfFormula, audit_interval: int | None = None):
        """엔진을 초기화합니다.

        Args:
            formula: 절이 하나 이상인 CNF 식
            audit_interval: 이 플립 수마다 보조 구조를 재계산해 대조 (None 이면 생략)
        """
        self._formula = formula
        self._state = SearchState(formula)
        self._audit_interval = audit_interval

    def _pick_variable(self, clause_vars: tuple[int, ...], noise: float, buffer: UniformBuffer) -> int:
        breaks = self._state.break_count
        best = min(breaks[v] for v in clause_vars)
        if best == 0:
            freebies = [v for v in clause_vars if breaks[v] == 0]
            return freebies[0] if len(freebies) == 1 else freebies[buffer.below(len(freebies))]
        if buffer.uniform() < noise:
            return clause_vars[buffer.below(len(clause_vars))]
        candidates = [v for v in clause_vars if breaks[v] == best]
        return candidates[0] if len(candidates) == 1 else candidates[buffer.below(len(candidates))]

    def search(
        self,
        params: WalkSatParams,
        rng: np.random.Generator,
        initial_assignment: Sequence[int] | None = None,
    ) -> SearchOutcome:
        """재시작을 포함한 탐색을 수행합니다.

        플립 수는 모든 시도에 걸쳐 누적합니다. 전역 예산에 닿으면 즉시
        중단합니다.

        Args:
            params: 실행 파라미터
            rng: 난수 생성기
            initial_assignment: 첫 시도에 사용할 초기 할당 (None 이면 무작위)

        Returns:
            SearchOutcome
        """
        state = self._state
        buffer = UniformBuffer(rng)
        flips = 0
        tries = 0
        while tries < params.max_tries and flips <= params.total_flip_budget:
            tries += 1
            if tries == 1 and initial_assignment is not None:
                state.reset(initial_assignment)
            else:
                state.reset(rng.integers(0, 2, size=state.n_vars).tolist())

            try_flips = 0
            while True:
                if not state.unsat:
                    assignment = tuple(state.value)
                    if not self._formula.is_satisfied_by(assignment):
                        raise RuntimeError("WalkSAT 이 만족하지 않는 할당을 해로 보고하려 했습니다")
                    return SearchOutcome(flips=flips, tries=tries, assignment=assignment)
                if try_flips >= params.max_flips or flips >= params.total_flip_budget:
                    break
                members = state.unsat.members
                clause = members[buffer.below(len(members))]
                var = self._pick_variable(state.clause_vars[clause], params.noise, buffer)
                state.flip(var)
                flips += 1
                try_flips += 1
                if self._audit_interval and flips % self._audit_interval == 0:
                    state.audit()
            if flips >= params.total_flip_budget:
                break
        return SearchOutcome(flips=None, tries=tries, assignment=None)


def walksat_run(
    formula: CnfFormula,
    params: WalkSatParams,
    rng: np.random.Generator | None = None,
    instance_id: str = "",
    initial_assignment: Sequence[int] | None = None,
) -> RunRecord:
    """WalkSAT 을 한 번 실행하고 RunRecord 를 반환합니다.

    Args:
        formula: 절이 하나 이상인 CNF 식
        params: 실행 파라미터
        rng: 난수 생성기 (None 이면 params.seed 로 생성)
        instance_id: 기록에 남길 인스턴스 식별자
        initial_assignment: 첫 시도의 초기 할당

    Returns:
        RunRecord (해를 찾지 못하면 flips_to_solution=None)

    Raises:
        ValueError: 식에 절이 없는 경우
    """
    if rng is None:
        rng = generator_from_seed(params.seed)
    started = time.perf_counter()
    outcome = WalkSatEngine(formula).search(params, rng, initial_assignment)
    record = RunRecord(
        instance_id=instance_id,
        noise=params.noise,
        flips_to_solution=outcome.flips,
        tries=outcome.tries,
        wall_time=time.perf_counter() - started,
        seed=params.seed,
    )
    if not record.solved:
        logger.info("WalkSAT 이 예산 안에 해를 찾지 못했습니다", extra={"instance_id": instance_id, "tries": outcome.tries})
    return record


def median_flips(records: Sequence[RunRecord]) -> FlipStatistics:
    """실행 기록의 플립 수 중앙값과 사분위수를 계산합니다.

    NOT_FOUND 는 모든 유한값보다 큰 값(inf)으로 취급합니다. 절반 이상이
    NOT_FOUND 이면 검열(censored)로 표시합니다.

    Args:
        records: 하나 이상의 실행 기록

    Returns:
        FlipStatistics

    Raises:
        ValueError: 기록이 비어 있는 경우
    """
    return flip_statistics([record.cost for record in records])


def flip_statistics(values: Sequence[float]) -> FlipStatistics:
    """플립 수 목록(해 없음은 inf)의 중앙값과 사분위수를 계산합니다.

    Raises:
        ValueError: 목록이 비어 있는 경우
    """
    if not values:
        raise ValueError("중앙값을 계산할 실행 기록이 없습니다")
    costs = np.array(values, dtype=np.float64)
    finite = np.isfinite(costs)
    ceiling = float(costs[finite].max()) if finite.any() else -math.inf
    # inf 는 보간 중 nan 을 만들므로 최대 유한 실수로 바꿔 계산한 뒤 되돌립니다
    filled = np.where(finite, costs, np.finfo(np.float64).max)
    with np.errstate(over="ignore", invalid="ignore"):
        median = float(np.median(filled))
        q25, q75 = (float(q) for q in np.percentile(filled, [25, 75]))

    def restore(value: float) -> float:
        return math.inf if value > ceiling else value

    not_found = int((~finite).sum())
    return FlipStatistics(
        median=restore(median),
        q25=restore(q25),
        q75=restore(q75),
        solved_fraction=(len(values) - not_found) / len(values),
        censored=2 * not_found >= len(values),
        count=len(values),
    )
