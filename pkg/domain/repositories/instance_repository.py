from abc import ABC, abstractmethod
from domain.entities.instance import Instance


class InstanceRepository(ABC):
    """네이티브 인스턴스 저장소 인터페이스입니다."""

    @abstractmethod
    def save_instances(self, instances: list[Instance]) -> None:
        """인스턴스 목록을 저장합니다.

        Args:
            instances: 저장할 인스턴스 목록
        """
        pass

    @abstractmethod
    def load_instances(self) -> list[Instance]:
        """저장된 인스턴스를 모두 읽습니다.

        Returns:
            인스턴스 목록
        """
        pass
