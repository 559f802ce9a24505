import json

import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage as scipy_linkage

from src.domain.analysis import (
    Dendrogram,
    TermCounts,
    ValenceMatrix,
    cluster_dialects,
    count_terms,
    export_projection_matrix,
    load_valence_csv,
    merge_counts,
    top_valence_words,
    top_words_by_group,
    valence,
    valence_matrix,
    valence_vectors,
)
from src.domain.exceptions import ValenceError
from src.domain.models.enums import (
    GROUP_ORDER,
    DistanceMetricEnum,
    LinkageEnum,
)


def test_count_terms_skips_placeholders_and_orders_groups():
    counts = count_terms(
        {
            'MSA': ['كتب', 'NUM', 'كتب'],
            'EG': ['كتب', 'ازيك', '@USER', 'URL'],
        }
    )
    assert counts.groups == ('EG', 'MSA')
    assert counts.terms == ('ازيك', 'كتب')
    assert counts.counts.tolist() == [[1, 0], [1, 2]]
    assert counts.totals.tolist() == [2, 2]


def test_count_terms_rejects_unknown_group():
    with pytest.raises(ValenceError, match='XX'):
        count_terms({'XX': ['a']})


def test_merge_counts_equals_counting_everything():
    first = {'EG': ['a', 'b'], 'SA': ['a']}
    second = {'EG': ['b', 'c'], 'MSA': ['a', 'a']}
    whole = count_terms(
        {'EG': first['EG'] + second['EG'], 'SA': first['SA'], 'MSA': second['MSA']}
    )
    assert merge_counts(count_terms(first), count_terms(second)) == whole


def test_valence_exclusive_and_absent_terms():
    counts = count_terms({'EG': ['ازيك', 'كتب'], 'SA': ['كتب', 'شلونك'], 'MSA': ['كتب']})
    assert valence('ازيك', counts, 'EG') == 1.0
    assert valence('ازيك', counts, 'SA') == -1.0
    assert valence('ازيك', counts, 'MSA') == -1.0


def test_uniform_term_over_all_groups():
    counts = count_terms({group: ['مشترك', f'w{index}'] for index, group in enumerate(GROUP_ORDER)})
    assert len(counts.groups) == 19
    for group in GROUP_ORDER:
        assert valence('مشترك', counts, group) == pytest.approx(2 / 19 - 1)


def test_valence_uses_relative_frequencies():
    # в EG термин в 4 раза чаще по абсолютному числу, но корпус EG в 4 раза больше
    counts = count_terms({'EG': ['x'] * 4 + ['y'] * 36, 'SA': ['x'] + ['z'] * 9})
    assert valence('x', counts, 'EG') == pytest.approx(0.0)
    assert valence('x', counts, 'SA') == pytest.approx(0.0)


def test_valence_is_scale_invariant():
    rng = np.random.default_rng(3)
    counters = {}
    for group in ('IQ', 'EG', 'MA', 'MSA'):
        counters[group] = [f't{i}' for i in rng.integers(0, 30, size=200)]
    scaled = {group: tokens * 3 if group == 'EG' else tokens for group, tokens in counters.items()}
    np.testing.assert_allclose(
        valence_matrix(count_terms(counters)), valence_matrix(count_terms(scaled)), atol=1e-12
    )


def test_valence_matrix_bounds_and_empty_groups():
    counts = count_terms({'EG': ['a', 'b', 'a'], 'SA': [], 'MSA': ['b', 'c']})
    matrix = valence_matrix(counts)
    assert matrix.shape == (3, 3)
    assert (matrix >= -1).all() and (matrix <= 1).all()
    # пустая группа не участвует в знаменателе
    assert matrix[counts.terms.index('c'), counts.groups.index('MSA')] == 1.0
    assert matrix[counts.terms.index('c'), counts.groups.index('SA')] == -1.0


def test_valence_of_unknown_term_or_group():
    counts = count_terms({'EG': ['a'], 'SA': ['b']})
    with pytest.raises(ValenceError, match='undefined'):
        valence('c', counts, 'EG')
    with pytest.raises(ValenceError):
        valence('a', counts, 'MA')


def test_term_counts_validates_shape():
    with pytest.raises(ValenceError):
        TermCounts(groups=('EG',), terms=('a', 'b'), counts=np.zeros((1, 1)), totals=np.zeros(1))


def test_top_valence_words():
    counts = count_terms(
        {
            'EG': ['ازيك'] * 12 + ['قوي'] * 15 + ['نادر'] * 2 + ['عام'] * 20,
            'MSA': ['عام'] * 20 + ['قوي'] * 5,
        }
    )
    top = top_valence_words(counts, 'EG', k=3, min_count=10)
    assert [term for term, _ in top] == ['ازيك', 'قوي', 'عام']
    assert top[0][1] == 1.0
    assert top[1][1] > 0 > top[2][1]
    # редкий термин проходит только при низком пороге
    assert ('نادر', 1.0) in top_valence_words(counts, 'EG', k=5, min_count=1)
    assert list(top_words_by_group(counts, k=1)) == ['EG', 'MSA']
    with pytest.raises(ValenceError):
        top_valence_words(counts, 'EG', k=0)


def test_valence_ties_break_by_frequency_then_term():
    counts = count_terms({'EG': ['b', 'a', 'c', 'c'], 'MSA': ['z']})
    assert [term for term, _ in top_valence_words(counts, 'EG', k=3, min_count=1)] == ['c', 'a', 'b']


def test_valence_vectors_selects_by_max_valence():
    counts = count_terms(
        {
            'EG': ['eg'] * 5 + ['common'] * 5,
            'SA': ['sa'] * 3 + ['common'] * 5,
            'MSA': ['common'] * 5 + ['rare'],
        }
    )
    vm = valence_vectors(counts, top_k=3)
    assert vm.terms == ('eg', 'sa', 'rare')
    assert vm.values.dtype == np.float32
    assert vm.values.shape == (3, 3)
    np.testing.assert_array_equal(vm.column('EG'), np.array([1, -1, -1], dtype=np.float32))
    assert valence_vectors(counts, top_k=10, min_count=5).terms == ('eg', 'common')


def test_valence_vectors_on_empty_vocabulary():
    with pytest.raises(ValenceError):
        valence_vectors(count_terms({'EG': [], 'SA': []}))


def test_projection_csv(tmp_path):
    vm = ValenceMatrix(
        terms=('أهلا', 'x,y'),
        groups=('EG', 'MSA'),
        values=np.array([[0.1, -0.1], [1.0, -1.0]], dtype=np.float32),
    )
    path = tmp_path / 'out' / 'valence.csv'
    export_projection_matrix(vm, path)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'term,EG,MSA'
    assert lines[2] == '"x,y",1,-1'
    assert load_valence_csv(path) == vm


def test_load_valence_csv_errors(tmp_path):
    path = tmp_path / 'valence.csv'
    path.write_text('word,EG\n', encoding='utf-8')
    with pytest.raises(ValenceError, match='header'):
        load_valence_csv(path)
    path.write_text('term,EG,MSA\na,1\n', encoding='utf-8')
    with pytest.raises(ValenceError, match=':2:'):
        load_valence_csv(path)
    path.write_text('term,XX\na,1\n', encoding='utf-8')
    with pytest.raises(ValenceError):
        load_valence_csv(path)


def random_matrix(n_groups: int, seed: int, n_terms: int = 40) -> ValenceMatrix:
    rng = np.random.default_rng(seed)
    return ValenceMatrix(
        terms=tuple(f't{i}' for i in range(n_terms)),
        groups=GROUP_ORDER[:n_groups],
        values=rng.uniform(-1, 1, size=(n_terms, n_groups)).astype(np.float32),
    )


@pytest.mark.parametrize('method', list(LinkageEnum))
@pytest.mark.parametrize('metric', list(DistanceMetricEnum))
@pytest.mark.parametrize('n_groups, seed', [(3, 0), (5, 1), (8, 2)])
def test_clustering_matches_scipy(method, metric, n_groups, seed):
    vm = random_matrix(n_groups, seed)
    dendrogram = cluster_dialects(vm, method, metric)
    reference = scipy_linkage(
        vm.values.T.astype(np.float64), method=method.value, metric=metric.value
    )
    np.testing.assert_allclose(dendrogram.heights, reference[:, 2], rtol=1e-9, atol=1e-12)
    for merge, row in zip(dendrogram.merges, reference):
        assert {merge.left, merge.right} == {int(row[0]), int(row[1])}
        assert merge.size == int(row[3])


def test_four_blocks_are_recovered():
    rng = np.random.default_rng(7)
    centers = rng.uniform(-1, 1, size=(4, 60))
    groups = GROUP_ORDER[:8]
    columns = [centers[index // 2] + rng.normal(0, 0.05, size=60) for index in range(8)]
    vm = ValenceMatrix(
        terms=tuple(f't{i}' for i in range(60)),
        groups=groups,
        values=np.array(columns, dtype=np.float32).T,
    )
    dendrogram = cluster_dialects(vm)
    assert dendrogram.cut(4) == [tuple(groups[i : i + 2]) for i in range(0, 8, 2)]
    assert dendrogram.cut(1) == [groups]
    assert dendrogram.heights == sorted(dendrogram.heights)


def test_two_groups_newick_and_json():
    vm = ValenceMatrix(
        terms=('a', 'b'),
        groups=('IQ', 'BH'),
        values=np.array([[0, 3], [0, 4]], dtype=np.float32),
    )
    dendrogram = cluster_dialects(vm, LinkageEnum.AVERAGE, DistanceMetricEnum.EUCLIDEAN)
    assert dendrogram.to_newick() == '(BH:5,IQ:5);'
    document = json.loads(dendrogram.dumps())
    assert document['leaves'] == ['IQ', 'BH']
    assert document['metric'] == 'euclidean'
    assert document['merges'] == [
        {'left': 1, 'right': 0, 'height': 5.0, 'size': 2, 'members': ['BH', 'IQ']}
    ]


def test_newick_branch_lengths():
    vm = random_matrix(5, seed=4)
    newick = cluster_dialects(vm).to_newick()
    assert newick.endswith(';')
    assert newick.count('(') == newick.count(')') == 4
    for group in vm.groups:
        assert newick.count(group) == 1


def test_identical_columns_merge_first_at_zero():
    vm = random_matrix(4, seed=5)
    values = vm.values.copy()
    values[:, 2] = values[:, 0]
    dendrogram = cluster_dialects(ValenceMatrix(terms=vm.terms, groups=vm.groups, values=values))
    first = dendrogram.merges[0]
    assert {first.left, first.right} == {0, 2}
    assert first.height == pytest.approx(0.0, abs=1e-9)


def test_clustering_errors():
    with pytest.raises(ValenceError, match='at least 2'):
        cluster_dialects(random_matrix(1, seed=0))
    vm = random_matrix(3, seed=0)
    values = vm.values.copy()
    values[:, 1] = 0
    with pytest.raises(ValenceError, match='all-zero'):
        cluster_dialects(ValenceMatrix(terms=vm.terms, groups=vm.groups, values=values))
    with pytest.raises(ValenceError):
        Dendrogram(leaves=('EG', 'SA'), merges=())
    with pytest.raises(ValenceError):
        cluster_dialects(vm).cut(0)


def direct_valence(counts: np.ndarray, row: int, column: int) -> float:
    relative = [
        counts[row, n] / counts[:, n].sum() for n in range(counts.shape[1]) if counts[:, n].sum()
    ]
    own = counts[row, column] / counts[:, column].sum()
    return 2 * own / sum(relative) - 1


def test_valence_matches_direct_formula_on_random_counts():
    rng = np.random.default_rng(12)
    for _ in range(5):
        n_terms = int(rng.integers(1, 51))
        counters = {}
        for group in GROUP_ORDER:
            tokens = [f't{i}' for i in rng.integers(0, n_terms, size=int(rng.integers(1, 80)))]
            counters[group] = tokens
        counts = count_terms(counters)
        matrix = valence_matrix(counts)
        for row in range(len(counts.terms)):
            for column in range(len(counts.groups)):
                expected = direct_valence(counts.counts, row, column)
                assert abs(matrix[row, column] - expected) <= 1e-12
                assert abs(valence(counts.terms[row], counts, column) - expected) <= 1e-12
