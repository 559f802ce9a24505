from typing import Mapping

from pydantic import ValidationError

from src.domain.exceptions import ConfigurationError
from src.domain.lintext.features import FeatureConfig
from src.domain.lintext.model import TrainConfig
from src.domain.models.enums import (
    LossEnum,
    PresetEnum,
)

# классификатор MSA/DA для слабо размеченного корпуса
MSA_DA_FEATURES = FeatureConfig(char_ngram_min=3, char_ngram_max=6, embed_dim=100)
MSA_DA_TRAINING = TrainConfig(learning_rate=0.05, epochs=50, loss=LossEnum.SOFTMAX)

# классификаторы стран
COUNTRY_TRAINING = TrainConfig(
    learning_rate=0.05, epochs=20, loss=LossEnum.HINGE, l2=1e-4
)
C37_FEATURES = FeatureConfig(char_ngram_min=3, char_ngram_max=7, embed_dim=100)
CW26_FEATURES = FeatureConfig(
    char_ngram_min=3,
    char_ngram_max=7,
    use_word=True,
    word_ngram_min=2,
    word_ngram_max=6,
    embed_dim=100,
)

PRESETS: dict[PresetEnum, tuple[FeatureConfig, TrainConfig]] = {
    PresetEnum.MSA_DA: (MSA_DA_FEATURES, MSA_DA_TRAINING),
    PresetEnum.C37: (C37_FEATURES, COUNTRY_TRAINING),
    PresetEnum.CW26: (CW26_FEATURES, COUNTRY_TRAINING),
}


def resolve_preset(name: str) -> tuple[FeatureConfig, TrainConfig]:
    try:
        return PRESETS[PresetEnum(name)]
    except ValueError:
        known = ', '.join(preset.value for preset in PresetEnum)
        raise ConfigurationError(f'Unknown preset {name!r}, expected one of: {known}')


def apply_overrides(
    fc: FeatureConfig, tc: TrainConfig, overrides: Mapping[str, object]
) -> tuple[FeatureConfig, TrainConfig]:
    """Переопределяет поля пресета; значения-строки приводятся pydantic."""
    feature_updates: dict[str, object] = {}
    train_updates: dict[str, object] = {}
    for key, value in overrides.items():
        if key in FeatureConfig.model_fields:
            feature_updates[key] = value
        elif key in TrainConfig.model_fields:
            train_updates[key] = value
        else:
            raise ConfigurationError(f'Unknown training parameter {key!r}')
    try:
        fc = FeatureConfig.model_validate({**fc.model_dump(), **feature_updates})
        tc = TrainConfig.model_validate({**tc.model_dump(), **train_updates})
    except ValidationError as e:
        raise ConfigurationError(f'Invalid training parameters: {e}') from e
    return fc, tc
