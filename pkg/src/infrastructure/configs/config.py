import logging
import os
import tomllib
from enum import Enum
from pathlib import Path
from typing import (
    Any,
    Dict,
    Optional,
    Union,
)

from pydantic import Field
from pydantic.fields import FieldInfo
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from src.domain.exceptions import ConfigurationError
from src.domain.lintext.features import FeatureConfig
from src.domain.lintext.model import TrainConfig
from src.domain.lintext.presets import (
    apply_overrides,
    resolve_preset,
)
from src.domain.models.enums import (
    DistanceMetricEnum,
    LinkageEnum,
    PresetEnum,
)
from src.domain.pipeline import FilterConfig
from src.domain.textnorm import NormalizationConfig

logger = logging.getLogger(__name__)


class ConfigModelField(str, Enum):
    MODEL_FIELDS = 'model_fields'
    ENV_PREFIX = 'env_prefix'


class RunFileFields(str, Enum):
    RUN_CONFIG_FILE = 'RUN_CONFIG_FILE'


class RunFileSettingsSource(PydanticBaseSettingsSource):
    """
    Настройки из TOML-файла запуска. Таблицы разворачиваются в ключи
    <таблица>_<ключ> и сопоставляются с env_prefix вложенных секций.
    Переменные окружения секции перекрывают значения файла.
    """

    def __init__(
        self,
        settings_cls: type[BaseSettings],
        path: Optional[Path] = None,
        case_sensitive: bool = False,
    ) -> None:
        super().__init__(settings_cls)
        if path is None and os.environ.get(RunFileFields.RUN_CONFIG_FILE):
            path = Path(os.environ[RunFileFields.RUN_CONFIG_FILE])
        self.path = path
        self.case_sensitive = case_sensitive
        self.file_vars: Optional[dict] = None

    def __call__(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {}
        # для каждого поля в классе конфига
        for field_name, field in self.settings_cls.model_fields.items():
            field_value, field_key, _ = self.get_field_value(field, field_name)
            if field_value is not None:
                result[field_key] = field_value
        return result

    def get_field_value(self, field: FieldInfo, field_name: str) -> tuple[Any, str, bool]:
        file_vars = self._read_run_file()
        # обработка вложенных секций
        if hasattr(field.annotation, ConfigModelField.MODEL_FIELDS):
            prefix = field.annotation.model_config.get(ConfigModelField.ENV_PREFIX, '')
            environ = self._environ()
            nested_values = {}
            for nested_field in field.annotation.model_fields:
                key = self._key(f'{prefix}{nested_field}')
                if key in environ:
                    nested_values[nested_field] = environ[key]
                elif key in file_vars:
                    nested_values[nested_field] = file_vars[key]
            return nested_values or None, field_name, True

        # обработка обычных полей конфига
        return file_vars.get(self._key(field_name)), field_name, False

    def _key(self, name: str) -> str:
        return name if self.case_sensitive else name.lower()

    def _environ(self) -> dict[str, str]:
        return {self._key(key): value for key, value in os.environ.items()}

    def flatten_toml(self, toml_obj: dict, prefix: str = '') -> dict:
        items = {}
        for key, value in toml_obj.items():
            key_with_prefix = f'{prefix}_{key}' if prefix else key
            # таблица overrides остаётся словарём
            if isinstance(value, dict) and key != 'overrides':
                items.update(self.flatten_toml(value, prefix=key_with_prefix))
            else:
                items[key_with_prefix] = value
        return items

    def _read_run_file(self) -> dict:
        if self.file_vars is not None:
            return self.file_vars
        if self.path is None:
            self.file_vars = {}
            return self.file_vars
        try:
            with open(self.path, 'rb') as f:
                data = tomllib.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f'Run config file {self.path} does not exist')
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f'Run config file {self.path} is not valid TOML: {e}')
        logger.info(f'Using run config {self.path}')
        self.file_vars = {self._key(k): v for k, v in self.flatten_toml(data).items()}
        return self.file_vars


class BaseConfig(BaseSettings):
    model_config = SettingsConfigDict(case_sensitive=False, extra='ignore')


class PathsConfig(BaseConfig):
    TWEETS: Optional[Path] = None
    PROFILES: Optional[Path] = None
    GAZETTEER: Path = Field(default=Path('data/gazetteer.tsv'))
    OBSCENE: Optional[Path] = None
    MODEL: Optional[Path] = None
    CORPUS: Optional[Path] = None
    MSA_CORPUS: Optional[Path] = None
    TEST: Optional[Path] = None
    VALENCE: Optional[Path] = None
    REGIONS: Optional[Path] = None
    OUTPUT_DIR: Path = Field(default=Path('out'))

    model_config = SettingsConfigDict(env_prefix='PATHS_')


class NormalizationSection(BaseConfig):
    REPLACE_MENTIONS: bool = True
    REPLACE_URLS: bool = True
    REPLACE_DIGITS: bool = True
    REPLACE_EMOJI: bool = True
    REPLACE_NEWLINES: bool = True
    REPLACE_RELATIVE_PRONOUNS: bool = False
    SEGMENT_HASHTAGS: bool = True

    model_config = SettingsConfigDict(env_prefix='NORMALIZATION_')

    def to_config(self) -> NormalizationConfig:
        return NormalizationConfig(**{key.lower(): value for key, value in self.model_dump().items()})


class WeakLabelSection(BaseConfig):
    BALANCE: bool = False
    # 0: без отложенной выборки
    HOLDOUT_PER_CLASS: int = Field(default=0, ge=0)

    model_config = SettingsConfigDict(env_prefix='WEAKLABEL_')


class TrainSection(BaseConfig):
    PRESET: PresetEnum = PresetEnum.MSA_DA
    OVERRIDES: dict[str, Union[bool, int, float, str]] = Field(default_factory=dict)

    model_config = SettingsConfigDict(env_prefix='TRAIN_')

    def resolve(self, seed: int) -> tuple[FeatureConfig, TrainConfig]:
        fc, tc = resolve_preset(self.PRESET.value)
        return apply_overrides(fc, tc, {'seed': seed, **self.OVERRIDES})


class FilterSection(BaseConfig):
    TOP_N_PER_COUNTRY: int = Field(default=200, ge=1)
    DIALECTAL_RATIO: float = Field(default=0.5, ge=0, le=1)
    VULGAR_RATIO: float = Field(default=0.5, ge=0, le=1)
    MIN_CONFIDENCE: float = Field(default=0.98, gt=0, le=1)

    model_config = SettingsConfigDict(env_prefix='FILTER_')

    def to_config(self) -> FilterConfig:
        return FilterConfig(**{key.lower(): value for key, value in self.model_dump().items()})


class AnalysisSection(BaseConfig):
    TOP_K: int = Field(default=10000, ge=1)
    MIN_COUNT: int = Field(default=1, ge=1)
    # 0: список слов по группам не строится
    TOP_WORDS: int = Field(default=0, ge=0)
    TOP_WORDS_MIN_COUNT: int = Field(default=10, ge=1)
    LINKAGE: LinkageEnum = LinkageEnum.AVERAGE
    METRIC: DistanceMetricEnum = DistanceMetricEnum.COSINE

    model_config = SettingsConfigDict(env_prefix='ANALYSIS_')


class EvalSection(BaseConfig):
    BIN_WIDTH: int = Field(default=5, ge=1)

    model_config = SettingsConfigDict(env_prefix='EVAL_')


class RunConfig(BaseConfig):
    SEED: int = Field(default=0, ge=0, lt=1 << 64)
    JOBS: int = Field(default=1, ge=1)

    PATHS: PathsConfig = Field(default_factory=PathsConfig)
    NORMALIZATION: NormalizationSection = Field(default_factory=NormalizationSection)
    WEAKLABEL: WeakLabelSection = Field(default_factory=WeakLabelSection)
    TRAIN: TrainSection = Field(default_factory=TrainSection)
    FILTER: FilterSection = Field(default_factory=FilterSection)
    ANALYSIS: AnalysisSection = Field(default_factory=AnalysisSection)
    EVAL: EvalSection = Field(default_factory=EvalSection)

    # файл запуска; из окружения читается как RUN_CONFIG_FILE
    CONFIG_FILE: Optional[Path] = None

    model_config = SettingsConfigDict(env_prefix='RUN_')

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # файл запуска из аргументов этого вызова
        run_file = getattr(init_settings, 'init_kwargs', {}).get('CONFIG_FILE')
        return (
            init_settings,
            env_settings,
            RunFileSettingsSource(settings_cls, path=Path(run_file) if run_file else None),
        )

    def require_paths(self, *fields: str) -> None:
        """Проверяет, что входные пути заданы и существуют."""
        for name in fields:
            value = getattr(self.PATHS, name)
            if value is None:
                raise ConfigurationError(f'PATHS.{name} is required but not set')
            if not Path(value).exists():
                raise ConfigurationError(f'PATHS.{name}: {value} does not exist')


def load_run_config(path: Optional[Path] = None, **overrides: Any) -> RunConfig:
    """Конфиг запуска: явные значения > окружение > файл запуска."""
    if path is not None:
        overrides['CONFIG_FILE'] = Path(path)
    return RunConfig(**overrides)
