from pydantic import (
    BaseModel,
    ConfigDict,
)


class RecordModel(BaseModel):
    """Базовая модель записей корпуса"""

    model_config = ConfigDict(frozen=True, extra='ignore', str_strip_whitespace=False)


class MutableRecordModel(BaseModel):
    model_config = ConfigDict(extra='forbid', validate_assignment=True)
