from enum import Enum


class CountryEnum(str, Enum):
    """Страны корпуса (ISO 3166-1 alpha-2), в порядке таблицы статистики"""

    IQ = 'IQ'  # Ирак
    BH = 'BH'  # Бахрейн
    KW = 'KW'  # Кувейт
    SA = 'SA'  # Саудовская Аравия
    AE = 'AE'  # ОАЭ
    OM = 'OM'  # Оман
    QA = 'QA'  # Катар
    YE = 'YE'  # Йемен
    SY = 'SY'  # Сирия
    JO = 'JO'  # Иордания
    PL = 'PL'  # Палестина
    LB = 'LB'  # Ливан
    EG = 'EG'  # Египет
    SD = 'SD'  # Судан
    LY = 'LY'  # Ливия
    TN = 'TN'  # Тунис
    DZ = 'DZ'  # Алжир
    MA = 'MA'  # Марокко

    @property
    def display_name(self) -> str:
        cls = type(self)
        return {
            cls.IQ: 'Iraq',
            cls.BH: 'Bahrain',
            cls.KW: 'Kuwait',
            cls.SA: 'Saudi Arabia',
            cls.AE: 'United Arab Emirates',
            cls.OM: 'Oman',
            cls.QA: 'Qatar',
            cls.YE: 'Yemen',
            cls.SY: 'Syria',
            cls.JO: 'Jordan',
            cls.PL: 'Palestine',
            cls.LB: 'Lebanon',
            cls.EG: 'Egypt',
            cls.SD: 'Sudan',
            cls.LY: 'Libya',
            cls.TN: 'Tunisia',
            cls.DZ: 'Algeria',
            cls.MA: 'Morocco',
        }[self]

    @classmethod
    def codes(cls) -> tuple[str, ...]:
        return tuple(member.value for member in cls)


class RegionEnum(str, Enum):
    """Диалектные регионы"""

    GULF = 'Gulf'
    LEVANT = 'Levant'
    MAGHREB = 'Maghreb'
    NILE = 'Nile'
    IRAQ = 'Iraq'  # отдельная группа
    YEMEN = 'Yemen'  # отдельная группа


class VariantLabelEnum(str, Enum):
    """Вариант арабского: литературный или диалект"""

    MSA = 'MSA'
    DA = 'DA'


class GazetteerCategoryEnum(str, Enum):
    """Категория записи газеттира"""

    COUNTRY_NAME = 'country_name'
    CITY = 'city'
    NATIONALITY_ADJ = 'nationality_adj'


class LanguageEnum(str, Enum):
    AR = 'ar'
    EN = 'en'
    FR = 'fr'


class RejectionReasonEnum(str, Enum):
    """Причина отсева пользователя в каскаде фильтров"""

    NO_COUNTRY = 'no_country'
    AMBIGUOUS_COUNTRY = 'ambiguous_country'
    MOSTLY_MSA = 'mostly_msa'
    VULGAR = 'vulgar'
    BELOW_RANK_CUTOFF = 'below_rank_cutoff'


class LossEnum(str, Enum):
    """Функция потерь линейного классификатора"""

    SOFTMAX = 'softmax'
    HINGE = 'hinge'

    @property
    def code(self) -> int:
        return {LossEnum.SOFTMAX: 0, LossEnum.HINGE: 1}[self]

    @classmethod
    def from_code(cls, code: int) -> 'LossEnum':
        return {0: cls.SOFTMAX, 1: cls.HINGE}[code]


class PresetEnum(str, Enum):
    """Готовые конфигурации признаков и обучения"""

    MSA_DA = 'msa-da'
    C37 = 'c37'
    CW26 = 'cw26'


class LinkageEnum(str, Enum):
    AVERAGE = 'average'
    COMPLETE = 'complete'
    SINGLE = 'single'


class DistanceMetricEnum(str, Enum):
    COSINE = 'cosine'
    EUCLIDEAN = 'euclidean'


class FixtureKindEnum(str, Enum):
    """Тип синтетического набора данных"""

    CASCADE = 'cascade'
    DIALECT = 'dialect'
    VARIANT = 'variant'


MSA_GROUP = 'MSA'

# порядок групп в матрицах частот: 18 стран, затем MSA
GROUP_ORDER: tuple[str, ...] = CountryEnum.codes() + (MSA_GROUP,)
