"""재현 가능한 난수 스트림.

모든 난수는 numpy 의 SeedSequence/PCG64 에서 나옵니다. 스트림은
(기준 시드, 키...) 로만 결정되므로 작업 순서나 작업자 수와 무관합니다.
"""
import numpy as np
from domain.value_objects.types import ModelFamily

FAMILY_KEYS: dict[ModelFamily, int] = {family: index for index, family in enumerate(ModelFamily)}


class RandomStreams:
    """키 경로로 분할되는 64비트 난수 스트림 팩토리입니다.

    Attributes:
        master_seed: 기준 시드
        prefix: 이 팩토리가 덧붙이는 키 경로
    """

    def __init__(self, master_seed: int, *prefix: int):
        """팩토리를 초기화합니다.

        Args:
            master_seed: 음이 아닌 기준 시드
            prefix: 기본 키 경로

        Raises:
            ValueError: 시드나 키가 음수인 경우
        """
        if master_seed < 0 or any(key < 0 for key in prefix):
            raise ValueError("시드와 키는 음이 아닌 정수여야 합니다")
        self.master_seed = master_seed
        self.prefix = tuple(prefix)

    def child(self, *keys: int) -> "RandomStreams":
        return RandomStreams(self.master_seed, *self.prefix, *keys)

    def sequence(self, *keys: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(*self.prefix, *keys))

    def generator(self, *keys: int) -> np.random.Generator:
        """키 경로에 대응하는 독립 생성기를 만듭니다.

        Args:
            keys: 추가 키 (예: 인스턴스 번호, 탐색 번호, 실행 번호)

        Returns:
            PCG64 기반 Generator
        """
        return np.random.Generator(np.random.PCG64(self.sequence(*keys)))

    def seed_for(self, *keys: int) -> int:
        """키 경로에서 64비트 실행 시드를 유도합니다."""
        return int(self.sequence(*keys).generate_state(1, dtype=np.uint64)[0])


def generator_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class UniformBuffer:
    """Generator 에서 균등 난수를 블록 단위로 꺼내 쓰는 버퍼입니다.

    WalkSAT 의 매 스텝마다 numpy 스칼라 호출을 하지 않도록 미리 뽑아 둡니다.
    소비 순서가 고정되어 있으므로 결과는 결정적입니다.
    """

    def __init__(self, rng: np.random.Generator, block_size: int = 4096):
        self._rng = rng
        self._block_size = block_size
        self._block: list[float] = []
        self._position = 0

    def uniform(self) -> float:
        if self._position >= len(self._block):
            self._block = self._rng.random(self._block_size).tolist()
            self._position = 0
        value = self._block[self._position]
        self._position += 1
        return value

    def below(self, bound: int) -> int:
        """[0, bound) 범위의 균등 정수를 반환합니다."""
        return min(int(self.uniform() * bound), bound - 1)
