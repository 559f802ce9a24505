from src.domain.analysis.clustering import (
    Dendrogram,
    Merge,
    cluster_dialects,
)
from src.domain.analysis.valence import (
    TermCounts,
    ValenceMatrix,
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

__all__ = [
    'Dendrogram',
    'Merge',
    'TermCounts',
    'ValenceMatrix',
    'cluster_dialects',
    'count_terms',
    'export_projection_matrix',
    'load_valence_csv',
    'merge_counts',
    'top_valence_words',
    'top_words_by_group',
    'valence',
    'valence_matrix',
    'valence_vectors',
]
