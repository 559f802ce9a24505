"""
Нормализация, токенизация и сегментация хэштегов твитов.

Все функции чистые: применяются перед любой другой стадией конвейера.
"""

import regex as re

from src.domain.models.base import RecordModel

MENTION_TOKEN = '@USER'
URL_TOKEN = 'URL'
NUM_TOKEN = 'NUM'
EMOJI_TOKEN = 'EMOJI'
NEWLINE_TOKEN = 'NEWLINE'
RELATIVE_TOKEN = 'RELATIVE'
# составляющая пустого хэштега; нормализация такие теги не трогает
HASHTAG_TOKEN = 'HASHTAG'

PLACEHOLDERS = frozenset(
    {MENTION_TOKEN, URL_TOKEN, NUM_TOKEN, EMOJI_TOKEN, NEWLINE_TOKEN, RELATIVE_TOKEN}
)

MSA_RELATIVE_PRONOUNS: tuple[str, ...] = ('الذي', 'الذى', 'التي', 'التى', 'الذين')
DA_RELATIVE_PRONOUNS: tuple[str, ...] = ('اللي', 'اللى')
TRIGGER_PRONOUNS = frozenset(MSA_RELATIVE_PRONOUNS + DA_RELATIVE_PRONOUNS)

# Таблица диапазонов эмодзи: пиктограммы и символы эмодзи-представления.
# Последовательность начинается с пиктограммы и может продолжаться
# модификаторами (ZWJ, VS16, keycap), которые сами по себе эмодзи не считаются.
EMOJI_RANGES: tuple[tuple[int, int], ...] = (
    (0x1F000, 0x1F02F),  # маджонг
    (0x1F0A0, 0x1F0FF),  # карты
    (0x1F100, 0x1F1FF),  # буквы в рамках, флаги (regional indicators)
    (0x1F200, 0x1F2FF),
    (0x1F300, 0x1F5FF),  # символы и пиктограммы, тона кожи
    (0x1F600, 0x1F64F),  # смайлы
    (0x1F680, 0x1F6FF),  # транспорт и карты
    (0x1F700, 0x1F77F),
    (0x1F780, 0x1F7FF),  # геометрические фигуры
    (0x1F800, 0x1F8FF),
    (0x1F900, 0x1F9FF),  # дополнительные пиктограммы
    (0x1FA00, 0x1FA6F),
    (0x1FA70, 0x1FAFF),  # пиктограммы, расширение A
    (0x2600, 0x26FF),  # разные символы
    (0x2700, 0x27BF),  # дингбаты
    (0x231A, 0x231B),
    (0x23E9, 0x23F3),
    (0x23F8, 0x23FA),
    (0x2B50, 0x2B50),
    (0x2B55, 0x2B55),
)
EMOJI_MODIFIERS = '\u200d\ufe0f\u20e3'


def _char_class(ranges: tuple[tuple[int, int], ...]) -> str:
    parts = []
    for low, high in ranges:
        if low == high:
            parts.append(f'\\U{low:08x}')
        else:
            parts.append(f'\\U{low:08x}-\\U{high:08x}')
    return ''.join(parts)


_EMOJI_CLASS = _char_class(EMOJI_RANGES)

FLAGS = re.UNICODE
# str.split() считает \x1c-\x1f пробелами, по свойству White_Space они не пробелы
SPACE = r'\s\x1c-\x1f'
URL_RE = re.compile(rf'(?:https?://|www\.)[^{SPACE}]*', FLAGS | re.IGNORECASE)
HASHTAG_RE = re.compile(r'#(?=\w*[^\W_])\w+', FLAGS)
HASHTAG_SEPARATOR_RE = re.compile(r'[#_]', FLAGS)
EMOJI_RE = re.compile(f'[{_EMOJI_CLASS}][{_EMOJI_CLASS}{EMOJI_MODIFIERS}]*', FLAGS)
EMOJI_CHAR_RE = re.compile(f'[{_EMOJI_CLASS}]', FLAGS)
DIGITS_RE = re.compile(r'[0-9\u0660-\u0669]+', FLAGS)
MENTION_RE = re.compile(r'(?<![A-Za-z0-9_])@[A-Za-z0-9_]{1,15}(?![A-Za-z0-9_])', FLAGS)
NEWLINE_RE = re.compile(r'\r\n|[\r\n\x85\u2028\u2029]', FLAGS)
WHITESPACE_RE = re.compile(f'[{SPACE}]+', FLAGS)
# Границы токена совпадают с tokenize: токен есть максимальная последовательность
# символов, не являющихся пробелом или пунктуацией.
RELATIVE_RE = re.compile(
    rf'(?<![^{SPACE}\p{{P}}])(?:'
    + '|'.join(sorted(TRIGGER_PRONOUNS, key=len, reverse=True))
    + rf')(?![^{SPACE}\p{{P}}])',
    FLAGS,
)
TOKEN_RE = re.compile(r'@USER(?![^\p{P}])|\p{P}|[^\p{P}]+', FLAGS)
CAMEL_SPLIT_RE = re.compile(r'(?<=[\p{Ll}&&\p{Latin}])(?=[\p{Lu}&&\p{Latin}])', FLAGS | re.V1)

TokenStream = list[str]


class NormalizationConfig(RecordModel):
    """Флаги нормализации твита"""

    replace_mentions: bool = True
    replace_urls: bool = True
    replace_digits: bool = True
    replace_emoji: bool = True
    replace_newlines: bool = True
    # включается только при построении слабо размеченного корпуса
    replace_relative_pronouns: bool = False
    segment_hashtags: bool = True


DEFAULT_CONFIG = NormalizationConfig()
WEAK_CORPUS_CONFIG = NormalizationConfig(replace_relative_pronouns=True)


def _padded(token: str) -> str:
    return f' {token} '


def segment_hashtag(tag: str) -> list[str]:
    """
    Разбивает хэштег на составляющие: по '#' и подчёркиваниям и по переходу
    строчная→прописная в латинице. Арабский текст делится только по '_'.
    Тег без составляющих ('#', '#___') даёт [HASHTAG_TOKEN].
    """
    if not tag.startswith('#'):
        return [tag]
    tokens: list[str] = []
    for chunk in HASHTAG_SEPARATOR_RE.split(tag):
        if not chunk:
            continue
        tokens.extend(part for part in CAMEL_SPLIT_RE.split(chunk) if part)
    return tokens or [HASHTAG_TOKEN]


def _replace_hashtag(match) -> str:
    return _padded(' '.join(segment_hashtag(match.group())))


def _replace_mentions(text: str) -> str:
    # Замены идут слева направо по уже изменённой строке: граница упоминания
    # проверяется по плейсхолдеру предыдущего упоминания, а не по исходному нику.
    replacement = _padded(MENTION_TOKEN)
    position = 0
    while match := MENTION_RE.search(text, position):
        text = text[: match.start()] + replacement + text[match.end() :]
        position = match.start() + len(replacement)
    return text


def normalize_tweet(text: str, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Заменяет платформенные элементы твита плейсхолдерами. Идемпотентна."""
    if not text:
        return ''
    if cfg.replace_urls:
        text = URL_RE.sub(_padded(URL_TOKEN), text)
    if cfg.segment_hashtags:
        text = HASHTAG_RE.sub(_replace_hashtag, text)
    if cfg.replace_emoji:
        text = EMOJI_RE.sub(_padded(EMOJI_TOKEN), text)
    # цифры до упоминаний: иначе укороченный ник стал бы упоминанием
    # при повторном применении
    if cfg.replace_digits:
        text = DIGITS_RE.sub(_padded(NUM_TOKEN), text)
    if cfg.replace_mentions:
        text = _replace_mentions(text)
    if cfg.replace_relative_pronouns:
        text = RELATIVE_RE.sub(_padded(RELATIVE_TOKEN), text)
    if cfg.replace_newlines:
        text = NEWLINE_RE.sub(_padded(NEWLINE_TOKEN), text)
    return WHITESPACE_RE.sub(' ', text).strip()


def tokenize(text: str) -> TokenStream:
    """Делит по пробелам и выделяет знаки пунктуации в отдельные токены."""
    tokens: list[str] = []
    for chunk in text.split():
        if chunk in PLACEHOLDERS:
            tokens.append(chunk)
            continue
        tokens.extend(TOKEN_RE.findall(chunk))
    return tokens


def contains_emoji(text: str) -> bool:
    return EMOJI_CHAR_RE.search(text) is not None


def contains_url(text: str) -> bool:
    return URL_RE.search(text) is not None
