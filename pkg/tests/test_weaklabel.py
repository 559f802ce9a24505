import pytest
from pydantic import ValidationError

from src.domain.evalkit import (
    accuracy,
    confusion,
)
from src.domain.exceptions import (
    ConfigurationError,
    LabelSetError,
)
from src.domain.fixtures import variant_corpus
from src.domain.lintext import (
    TrainConfig,
    fit,
    resolve_preset,
)
from src.domain.models.enums import VariantLabelEnum
from src.domain.models.records import TweetRecord
from src.domain.textnorm import (
    DEFAULT_CONFIG,
    TRIGGER_PRONOUNS,
    tokenize,
)
from src.domain.weaklabel import (
    RowStatus,
    WeakLabelDiagnostics,
    WeakLabeledRecord,
    audit_variant_share,
    balance_classes,
    build_weak_corpus,
    label_by_pronoun,
    label_row,
    split_holdout,
)
from src.infrastructure.workers import OrderedPool
from tests.conftest import (
    SMALL_FEATURES,
    FixedClassifier,
)

MSA = VariantLabelEnum.MSA
DA = VariantLabelEnum.DA


def tweet(index: int, text: str) -> TweetRecord:
    return TweetRecord(id=str(index), user_id='u1', text=text)


@pytest.mark.parametrize(
    'text, label',
    [
        ('هذا هو الشخص اللي قابلته', DA),
        ('هذا هو الرجل الذي قابلته', MSA),
        ('الذي قال و اللي سمع', None),
        ('لا يوجد ضمير هنا', None),
        ('والذي قال', None),
        ('اللى، قالها', DA),
    ],
)
def test_label_by_pronoun(text, label):
    assert label_by_pronoun(text) == label


def test_four_rows_give_two_records():
    rows = [
        tweet(1, 'الكتاب الذي قرأته'),
        tweet(2, 'الكتاب اللي قريته'),
        tweet(3, 'الذي و اللي'),
        tweet(4, 'بدون ضمائر'),
    ]
    diagnostics = WeakLabelDiagnostics()
    records = list(build_weak_corpus(rows, diagnostics=diagnostics))
    assert [record.label for record in records] == [MSA, DA]
    assert records[0].text == 'الكتاب RELATIVE قرأته'
    assert diagnostics.model_dump() == {
        'rows': 4,
        'malformed': 0,
        'msa': 1,
        'da': 1,
        'mixed': 1,
        'unlabeled': 1,
    }
    assert diagnostics.emitted == 2


def test_empty_stream():
    assert list(build_weak_corpus([])) == []


def test_malformed_rows_are_counted_not_fatal():
    rows = [None, {'id': '1'}, {'id': '2', 'user_id': 'u', 'text': 'هو الذي جاء'}, 'اللي جاء']
    diagnostics = WeakLabelDiagnostics()
    records = list(build_weak_corpus(rows, diagnostics=diagnostics))
    assert len(records) == 2
    assert diagnostics.malformed == 2
    assert label_row(None) == (RowStatus.MALFORMED, None)


def test_requires_relative_replacement():
    with pytest.raises(ConfigurationError):
        list(build_weak_corpus([tweet(1, 'الذي')], DEFAULT_CONFIG))


def test_record_rejects_trigger_tokens():
    with pytest.raises(ValidationError):
        WeakLabeledRecord(text='هو اللي جاء', label=DA)


def test_no_emitted_record_leaks_a_trigger():
    pronouns = sorted(TRIGGER_PRONOUNS)
    rows = []
    for index in range(500):
        first = pronouns[index % len(pronouns)]
        glue = ('', ' ', '،', '.', '\n')[index % 5]
        rows.append(tweet(index, f'{first}{glue}كلام @user{index} {index} #وسم_{first}'))
    for record in build_weak_corpus(rows):
        assert TRIGGER_PRONOUNS.isdisjoint(tokenize(record.text))


def test_pool_preserves_order():
    rows = [tweet(i, f'كلام {i} ' + ('الذي' if i % 3 else 'اللي')) for i in range(50)]
    serial = list(build_weak_corpus(rows))
    with OrderedPool(jobs=2, chunksize=4) as pool:
        parallel = list(build_weak_corpus(rows, mapper=pool.map))
    assert parallel == serial


def records(n_msa: int, n_da: int) -> list[WeakLabeledRecord]:
    result = [WeakLabeledRecord(text=f'msa {i}', label=MSA) for i in range(n_msa)]
    result += [WeakLabeledRecord(text=f'da {i}', label=DA) for i in range(n_da)]
    return result


def test_balance_classes_downsamples_majority():
    balanced = balance_classes(records(10, 4), seed=1)
    assert sum(r.label == MSA for r in balanced) == 4
    assert sum(r.label == DA for r in balanced) == 4
    assert balance_classes(records(10, 4), seed=1) == balanced


def test_balance_needs_both_classes():
    with pytest.raises(LabelSetError):
        balance_classes(records(3, 0), seed=0)


def test_split_holdout():
    train, holdout = split_holdout(records(10, 6), per_class=2, seed=5)
    assert len(holdout) == 4
    assert len(train) == 12
    assert {r.label for r in holdout} == {MSA, DA}
    assert not set(r.text for r in train) & set(r.text for r in holdout)
    with pytest.raises(LabelSetError):
        split_holdout(records(10, 2), per_class=2, seed=5)


def test_audit_counts_dialectal_predictions():
    audit = audit_variant_share(FixedClassifier(0.9), ['a', 'b', 'c'])
    assert (audit.total, audit.dialectal, audit.dialectal_share) == (3, 3, 1.0)
    assert audit_variant_share(FixedClassifier(0.1), []).dialectal_share == 0.0


def test_audit_rejects_country_models():
    model, _ = fit([('aaaa', 'SA'), ('bbbb', 'EG')], SMALL_FEATURES, TrainConfig(epochs=1))
    with pytest.raises(LabelSetError):
        audit_variant_share(model, ['aaaa'])


@pytest.mark.slow
def test_msa_da_preset_on_variant_corpus():
    corpus = variant_corpus(n_docs=20_000, seed=11)
    train_part, test_part = corpus[:16_000], corpus[16_000:]
    fc, tc = resolve_preset('msa-da')
    fc = fc.model_copy(update={'hash_buckets': 1 << 18, 'embed_dim': 32})
    model, _ = fit(train_part, fc, tc.model_copy(update={'seed': 11}))
    gold = [label for _, label in test_part]
    pred = [model.predict(text).label for text, _ in test_part]
    assert accuracy(confusion(gold, pred)) >= 0.95
