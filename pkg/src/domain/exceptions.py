class DialectKitError(Exception):
    """Базовая ошибка инструментария"""


class ConfigurationError(DialectKitError):
    """Неверные входные данные или конфигурация (код выхода 1)"""


class GazetteerError(ConfigurationError):
    pass


class LabelSetError(ConfigurationError):
    """Набор меток не подходит для операции"""


class ValenceError(ConfigurationError):
    pass


class EvaluationError(ConfigurationError):
    pass


class ModelFormatError(DialectKitError):
    """Файл не является моделью или повреждён"""


class ModelVersionError(ModelFormatError):
    pass


class ModelTruncatedError(ModelFormatError):
    pass
