from pydantic import (
    Field,
    field_validator,
)

from src.domain.models.base import RecordModel


class TweetRecord(RecordModel):
    """Твит из JSONL-корпуса"""

    id: str = Field(min_length=1)
    user_id: str = Field(min_length=1)
    text: str

    @field_validator('id', 'user_id', mode='before')
    def coerce_identifier(cls, v):
        # выгрузки часто хранят идентификаторы числами
        if isinstance(v, int) and not isinstance(v, bool):
            return str(v)
        return v


class UserProfile(RecordModel):
    """Профиль пользователя: описание и число подписчиков"""

    user_id: str = Field(min_length=1)
    description: str = ''
    followers_count: int = Field(default=0, ge=0)

    @field_validator('user_id', mode='before')
    def coerce_identifier(cls, v):
        if isinstance(v, int) and not isinstance(v, bool):
            return str(v)
        return v

    @field_validator('description', mode='before')
    def empty_description(cls, v):
        return '' if v is None else v
