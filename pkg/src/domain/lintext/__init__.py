from src.domain.lintext.features import (
    FeatureConfig,
    extract_features,
    fnv1a_64,
)
from src.domain.lintext.model import (
    LinearTextModel,
    Prediction,
    TextClassifier,
    TrainConfig,
    predict,
    predict_with_threshold,
)
from src.domain.lintext.presets import (
    PRESETS,
    apply_overrides,
    resolve_preset,
)
from src.domain.lintext.serialization import (
    load_model,
    save_model,
)
from src.domain.lintext.training import (
    TrainReport,
    fit,
    train,
)

__all__ = [
    'FeatureConfig',
    'LinearTextModel',
    'PRESETS',
    'Prediction',
    'TextClassifier',
    'TrainConfig',
    'TrainReport',
    'apply_overrides',
    'extract_features',
    'fit',
    'fnv1a_64',
    'load_model',
    'predict',
    'predict_with_threshold',
    'resolve_preset',
    'save_model',
    'train',
]
