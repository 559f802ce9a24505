import json
import logging
from typing import (
    Generic,
    Iterable,
    Iterator,
    Optional,
    TypeVar,
)

from pydantic import (
    BaseModel,
    ValidationError,
)

from src.domain.models.records import (
    TweetRecord,
    UserProfile,
)
from src.infrastructure.adapters.repositories.base import BaseRepository

logger = logging.getLogger(__name__)

RecordT = TypeVar('RecordT', bound=BaseModel)


class JsonlRepository(BaseRepository, Generic[RecordT]):
    """JSONL: один объект на строку. Битые строки пропускаются и считаются."""

    record_model: type[RecordT]

    def __init__(self, path, record_model: Optional[type[RecordT]] = None) -> None:
        super().__init__(path)
        if record_model is not None:
            self.record_model = record_model
        self.malformed = 0

    def read_raw(self) -> Iterator[Optional[dict]]:
        """Разобранные объекты; None на месте строки, не являющейся JSON-объектом в UTF-8."""
        for number, line in self.raw_lines():
            if line is None:
                yield None
                continue
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                logger.debug(f'{self.path}:{number}: invalid JSON: {e.msg}')
                yield None
                continue
            yield obj if isinstance(obj, dict) else None

    def read(self) -> Iterator[RecordT]:
        self.malformed = 0
        for obj in self.read_raw():
            if obj is None:
                self.malformed += 1
                continue
            try:
                yield self.record_model.model_validate(obj)
            except ValidationError as e:
                self.malformed += 1
                logger.debug(f'{self.path}: skipped record: {e.errors()[0]["msg"]}')
        if self.malformed:
            logger.warning(f'{self.path}: skipped {self.malformed} malformed rows')

    def write(self, records: Iterable[BaseModel]) -> int:
        count = 0
        with self.open_write() as f:
            for record in records:
                f.write(record.model_dump_json())
                f.write('\n')
                count += 1
        logger.info(f'Wrote {count} records to {self.path}')
        return count


class TweetRepository(JsonlRepository[TweetRecord]):
    record_model = TweetRecord


class ProfileRepository(JsonlRepository[UserProfile]):
    record_model = UserProfile
