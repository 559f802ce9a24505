"""
Командная строка: каждая команда является тонкой обёрткой над доменными модулями.

Коды выхода: 0 успех, 1 ошибка входных данных или конфигурации,
2 ошибка выполнения. В stdout печатается одна JSON-строка с итогом,
логи идут в stderr.
"""

import argparse
import json
import logging
import sys
from functools import partial
from itertools import chain
from pathlib import Path
from typing import (
    Any,
    Callable,
    Optional,
    Sequence,
)

from pydantic import ValidationError
from tqdm import tqdm

from src.domain.analysis import (
    cluster_dialects,
    count_terms,
    export_projection_matrix,
    load_valence_csv,
    top_words_by_group,
    valence_vectors,
)
from src.domain.evalkit import evaluate
from src.domain.exceptions import (
    ConfigurationError,
    DialectKitError,
)
from src.domain.fixtures import (
    cascade_fixture,
    dialect_corpus,
    variant_corpus,
)
from src.domain.lintext import (
    fit,
    load_model,
    save_model,
)
from src.domain.lintext.model import FORMAT_VERSION
from src.domain.models.enums import (
    MSA_GROUP,
    FixtureKindEnum,
)
from src.domain.models.records import TweetRecord
from src.domain.pipeline import (
    FilterCascade,
    UserVerdict,
    init_worker,
)
from src.domain.textnorm import (
    NormalizationConfig,
    normalize_tweet,
    tokenize,
)
from src.domain.weaklabel import (
    WeakLabelDiagnostics,
    audit_variant_share,
    balance_classes,
    build_weak_corpus,
    split_holdout,
)
from src.infrastructure.adapters.repositories import (
    CountryCorpusRepository,
    CsvRepository,
    GazetteerRepository,
    JsonRepository,
    JsonlRepository,
    LabeledCorpusRepository,
    ObsceneRepository,
    PredictionRepository,
    ProfileRepository,
    TweetRepository,
    read_labeled_corpus,
)
from src.infrastructure.configs.config import (
    RunConfig,
    load_run_config,
)
from src.infrastructure.configs.log_config import setup_logging
from src.infrastructure.workers import OrderedPool

logger = logging.getLogger(__name__)

TOOLKIT_NAME = 'dialect-corpus-toolkit'
TOOLKIT_VERSION = '0.1.0'

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

# флаг командной строки → (секция конфига, поле)
CONFIG_FLAGS: dict[str, tuple[str, str]] = {
    'tweets': ('PATHS', 'TWEETS'),
    'profiles': ('PATHS', 'PROFILES'),
    'gazetteer': ('PATHS', 'GAZETTEER'),
    'obscene': ('PATHS', 'OBSCENE'),
    'model': ('PATHS', 'MODEL'),
    'corpus': ('PATHS', 'CORPUS'),
    'msa_corpus': ('PATHS', 'MSA_CORPUS'),
    'test': ('PATHS', 'TEST'),
    'valence': ('PATHS', 'VALENCE'),
    'regions': ('PATHS', 'REGIONS'),
    'output_dir': ('PATHS', 'OUTPUT_DIR'),
    'preset': ('TRAIN', 'PRESET'),
    'balance': ('WEAKLABEL', 'BALANCE'),
    'holdout_per_class': ('WEAKLABEL', 'HOLDOUT_PER_CLASS'),
    'top_n': ('FILTER', 'TOP_N_PER_COUNTRY'),
    'min_confidence': ('FILTER', 'MIN_CONFIDENCE'),
    'top_k': ('ANALYSIS', 'TOP_K'),
    'min_count': ('ANALYSIS', 'MIN_COUNT'),
    'top_words': ('ANALYSIS', 'TOP_WORDS'),
    'linkage': ('ANALYSIS', 'LINKAGE'),
    'metric': ('ANALYSIS', 'METRIC'),
    'bin_width': ('EVAL', 'BIN_WIDTH'),
}

NORMALIZATION_SWITCHES = {
    'mentions': 'REPLACE_MENTIONS',
    'urls': 'REPLACE_URLS',
    'digits': 'REPLACE_DIGITS',
    'emoji': 'REPLACE_EMOJI',
    'newlines': 'REPLACE_NEWLINES',
    'hashtags': 'SEGMENT_HASHTAGS',
}


class CliArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise ConfigurationError(message)


def parse_overrides(items: Optional[Sequence[str]]) -> dict[str, str]:
    overrides = {}
    for item in items or ():
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ConfigurationError(f'Override {item!r} must look like key=value')
        overrides[key.strip()] = value.strip()
    return overrides


def config_values(args: argparse.Namespace) -> dict[str, Any]:
    """Значения конфига из флагов: перекрывают окружение и файл запуска."""
    values: dict[str, Any] = {}
    if args.seed is not None:
        values['SEED'] = args.seed
    if args.jobs is not None:
        values['JOBS'] = args.jobs
    for flag, (section, field) in CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values.setdefault(section, {})[field] = value
    overrides = parse_overrides(getattr(args, 'override', None))
    if overrides:
        values.setdefault('TRAIN', {})['OVERRIDES'] = overrides
    for switch in getattr(args, 'disable', None) or ():
        values.setdefault('NORMALIZATION', {})[NORMALIZATION_SWITCHES[switch]] = False
    if getattr(args, 'relative', False):
        values.setdefault('NORMALIZATION', {})['REPLACE_RELATIVE_PRONOUNS'] = True
    return values


def output_path(explicit: Optional[Path], config: RunConfig, default_name: str) -> Path:
    return Path(explicit) if explicit is not None else config.PATHS.OUTPUT_DIR / default_name


def normalize_record(record: TweetRecord, cfg: NormalizationConfig) -> TweetRecord:
    return record.model_copy(update={'text': normalize_tweet(record.text, cfg)})


def cmd_normalize(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('TWEETS')
    cfg = config.NORMALIZATION.to_config()
    source = TweetRepository(config.PATHS.TWEETS)
    output = output_path(args.output, config, 'normalized.jsonl')
    with OrderedPool(config.JOBS) as pool:
        records = pool.map(partial(normalize_record, cfg=cfg), source.read())
        count = TweetRepository(output).write(records)
    return {'records': count, 'malformed': source.malformed, 'output': str(output)}


def cmd_weaklabel(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('TWEETS')
    cfg = config.NORMALIZATION.to_config().model_copy(update={'replace_relative_pronouns': True})
    rows = TweetRepository(config.PATHS.TWEETS).read_raw()
    rows = tqdm(rows, desc='weaklabel', unit='tweet', disable=not args.progress)
    diagnostics = WeakLabelDiagnostics()
    with OrderedPool(config.JOBS) as pool:
        records = list(build_weak_corpus(rows, cfg, diagnostics, mapper=pool.map))

    if config.WEAKLABEL.BALANCE:
        records = balance_classes(records, config.SEED)
    output = output_path(args.output, config, 'weak.tsv')
    summary = diagnostics.model_dump()
    if config.WEAKLABEL.HOLDOUT_PER_CLASS:
        records, holdout = split_holdout(records, config.WEAKLABEL.HOLDOUT_PER_CLASS, config.SEED)
        holdout_path = output.with_suffix('.holdout.tsv')
        LabeledCorpusRepository(holdout_path).write((r.text, r.label.value) for r in holdout)
        summary.update(holdout=len(holdout), holdout_output=str(holdout_path))
    written = LabeledCorpusRepository(output).write((r.text, r.label.value) for r in records)
    summary.update(records=written, output=str(output))
    return summary


def cmd_train(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('CORPUS')
    fc, tc = config.TRAIN.resolve(config.SEED)
    corpus = read_labeled_corpus(config.PATHS.CORPUS)
    model, report = fit(corpus, fc, tc, progress=args.progress)
    output = output_path(args.model_out, config, f'{config.TRAIN.PRESET.value}.model')
    save_model(model, output)
    return {
        'preset': config.TRAIN.PRESET.value,
        'labels': list(model.labels),
        'documents': report.documents,
        'empty_feature_documents': report.empty_feature_documents,
        'model': str(output),
    }


def cmd_filter(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('PROFILES', 'TWEETS', 'GAZETTEER', 'MODEL', 'OBSCENE')
    paths = config.PATHS
    cascade = FilterCascade(
        gazetteer=GazetteerRepository(paths.GAZETTEER).load(),
        msa_da_model=load_model(paths.MODEL),
        obscene_terms=ObsceneRepository(paths.OBSCENE).load(),
        cfg=config.FILTER.to_config(),
        progress=args.progress,
    )
    profiles = list(ProfileRepository(paths.PROFILES).read())
    tweets = TweetRepository(paths.TWEETS).read()
    with OrderedPool(config.JOBS, initializer=init_worker, initargs=cascade.worker_args) as pool:
        result = cascade.run(profiles, tweets, mapper=pool.map)

    output_dir = paths.OUTPUT_DIR
    JsonlRepository(output_dir / 'verdicts.jsonl', UserVerdict).write(result.verdicts)
    CountryCorpusRepository(output_dir / 'corpus.tsv').write(result.corpus)
    JsonRepository(output_dir / 'stats.json').write(result.stats.as_dict())
    JsonRepository(output_dir / 'stages.json').write(result.stages.model_dump())
    return {
        'users': result.stages.profiles,
        'retained': result.stages.retained,
        'tweets': result.stages.corpus_tweets,
        'output_dir': str(output_dir),
    }


def cmd_valence(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('CORPUS')
    streams: dict[str, list] = {}
    for row in CountryCorpusRepository(config.PATHS.CORPUS).read():
        streams.setdefault(row.country, []).append(row.text)
    if config.PATHS.MSA_CORPUS is not None:
        config.require_paths('MSA_CORPUS')
        streams[MSA_GROUP] = [
            text for text, label in read_labeled_corpus(config.PATHS.MSA_CORPUS) if label == MSA_GROUP
        ]
    counts = count_terms(
        {group: chain.from_iterable(map(tokenize, texts)) for group, texts in streams.items()}
    )
    analysis = config.ANALYSIS
    vm = valence_vectors(counts, top_k=analysis.TOP_K, min_count=analysis.MIN_COUNT)
    output = output_path(args.output, config, 'valence.csv')
    export_projection_matrix(vm, output)
    summary = {'groups': list(vm.groups), 'terms': len(vm.terms), 'output': str(output)}
    if analysis.TOP_WORDS:
        top_words = top_words_by_group(counts, analysis.TOP_WORDS, analysis.TOP_WORDS_MIN_COUNT)
        top_words_path = output.with_suffix('.top_words.json')
        JsonRepository(top_words_path).write(
            {
                group: [{'term': term, 'valence': score} for term, score in words]
                for group, words in top_words.items()
            }
        )
        summary['top_words_output'] = str(top_words_path)
    return summary


def cmd_cluster(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('VALENCE')
    vm = load_valence_csv(config.PATHS.VALENCE)
    dendrogram = cluster_dialects(vm, config.ANALYSIS.LINKAGE, config.ANALYSIS.METRIC)
    prefix = output_path(args.output, config, 'dendrogram')
    newick_path = prefix.with_suffix('.nwk')
    newick_path.parent.mkdir(parents=True, exist_ok=True)
    newick_path.write_text(dendrogram.to_newick() + '\n', encoding='utf-8')
    JsonRepository(prefix.with_suffix('.json')).write(dendrogram.to_json())
    return {
        'leaves': len(dendrogram.leaves),
        'linkage': dendrogram.linkage.value,
        'metric': dendrogram.metric.value,
        'newick': str(newick_path),
        'json': str(prefix.with_suffix('.json')),
    }


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('MODEL', 'TEST')
    model = load_model(config.PATHS.MODEL)
    pairs = read_labeled_corpus(config.PATHS.TEST)
    texts = [text for text, _ in pairs]
    gold = [label for _, label in pairs]
    pred = [prediction.label for prediction in model.predict_batch(texts)]
    regions = None
    if config.PATHS.REGIONS is not None:
        config.require_paths('REGIONS')
        regions = JsonRepository(config.PATHS.REGIONS).read()
    cm, report = evaluate(
        gold, pred, texts, labels=model.labels, regions=regions, bin_width=config.EVAL.BIN_WIDTH
    )
    output = output_path(args.report_out, config, 'report.json')
    JsonRepository(output).write(report.model_dump(mode='json'))
    CsvRepository(output.with_suffix('.confusion.csv')).write(cm.rows())
    PredictionRepository(output.with_suffix('.predictions.tsv')).write(gold, pred, texts)
    return {
        'examples': report.examples,
        'accuracy': report.accuracy,
        'macro_f1': report.macro_f1,
        'report': str(output),
    }


def cmd_audit(args: argparse.Namespace, config: RunConfig) -> dict:
    config.require_paths('MODEL', 'TWEETS')
    model = load_model(config.PATHS.MODEL)
    audit = audit_variant_share(
        model, (record.text for record in TweetRepository(config.PATHS.TWEETS).read())
    )
    return {
        'tweets': audit.total,
        'dialectal': audit.dialectal,
        'dialectal_share': audit.dialectal_share,
    }


def cmd_fixture_generate(args: argparse.Namespace, config: RunConfig) -> dict:
    kind = FixtureKindEnum(args.kind)
    output_dir = Path(args.fixture_dir) if args.fixture_dir else config.PATHS.OUTPUT_DIR / 'fixture'
    if kind == FixtureKindEnum.CASCADE:
        fixture = cascade_fixture(n_users=args.users, seed=config.SEED)
        ProfileRepository(output_dir / 'profiles.jsonl').write(fixture.profiles)
        TweetRepository(output_dir / 'tweets.jsonl').write(fixture.tweets)
        ObsceneRepository(output_dir / 'obscene.txt').write(fixture.obscene)
        return {
            'kind': kind.value,
            'users': len(fixture.profiles),
            'tweets': len(fixture.tweets),
            'output_dir': str(output_dir),
        }
    if kind == FixtureKindEnum.DIALECT:
        corpus = dialect_corpus(
            n_classes=args.classes,
            docs_per_class=args.docs_per_class,
            seed=config.SEED,
            skew=args.skew,
        )
        output = output_dir / 'dialect.tsv'
    else:
        corpus = variant_corpus(n_docs=args.docs, seed=config.SEED)
        output = output_dir / 'variant.tsv'
    LabeledCorpusRepository(output).write(corpus)
    return {'kind': kind.value, 'documents': len(corpus), 'output': str(output)}


def common_parser() -> argparse.ArgumentParser:
    common = CliArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='TOML run config (or RUN_CONFIG_FILE)')
    common.add_argument('--seed', type=int, help='global seed for every stochastic stage')
    common.add_argument('--jobs', type=int, help='worker processes, default 1')
    common.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING, ERROR')
    common.add_argument('--progress', action='store_true', help='show progress bars on stderr')
    common.add_argument('--output-dir', type=Path, help='directory for default outputs')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = common_parser()
    parser = CliArgumentParser(prog=TOOLKIT_NAME, description=__doc__.strip().splitlines()[0])
    parser.add_argument(
        '--version',
        action='version',
        version=f'{TOOLKIT_NAME} {TOOLKIT_VERSION} (model format {FORMAT_VERSION})',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    normalize = commands.add_parser('normalize', parents=[common], help='normalize tweets JSONL')
    normalize.add_argument('--tweets', type=Path)
    normalize.add_argument('--output', type=Path)
    normalize.add_argument('--disable', action='append', choices=sorted(NORMALIZATION_SWITCHES))
    normalize.add_argument('--relative', action='store_true', default=None)
    normalize.set_defaults(handler=cmd_normalize)

    weaklabel = commands.add_parser('weaklabel', parents=[common], help='build the MSA/DA corpus')
    weaklabel.add_argument('--tweets', type=Path)
    weaklabel.add_argument('--output', type=Path)
    weaklabel.add_argument('--balance', action='store_true', default=None)
    weaklabel.add_argument('--holdout-per-class', type=int)
    weaklabel.set_defaults(handler=cmd_weaklabel)

    train = commands.add_parser('train', parents=[common], help='train a linear text classifier')
    train.add_argument('--corpus', type=Path)
    train.add_argument('--preset')
    train.add_argument('--override', action='append', metavar='KEY=VALUE')
    train.add_argument('--model-out', type=Path)
    train.set_defaults(handler=cmd_train)

    filter_ = commands.add_parser('filter', parents=[common], help='run the user filter cascade')
    filter_.add_argument('--profiles', type=Path)
    filter_.add_argument('--tweets', type=Path)
    filter_.add_argument('--gazetteer', type=Path)
    filter_.add_argument('--model', type=Path)
    filter_.add_argument('--obscene', type=Path)
    filter_.add_argument('--top-n', type=int)
    filter_.add_argument('--min-confidence', type=float)
    filter_.set_defaults(handler=cmd_filter)

    valence = commands.add_parser('valence', parents=[common], help='export valence vectors')
    valence.add_argument('--corpus', type=Path)
    valence.add_argument('--msa-corpus', type=Path)
    valence.add_argument('--top-k', type=int)
    valence.add_argument('--min-count', type=int)
    valence.add_argument('--top-words', type=int)
    valence.add_argument('--output', type=Path)
    valence.set_defaults(handler=cmd_valence)

    cluster = commands.add_parser('cluster', parents=[common], help='cluster dialects')
    cluster.add_argument('--valence', type=Path)
    cluster.add_argument('--linkage')
    cluster.add_argument('--metric')
    cluster.add_argument('--output', type=Path, help='output prefix (.nwk and .json)')
    cluster.set_defaults(handler=cmd_cluster)

    eval_ = commands.add_parser('eval', parents=[common], help='evaluate a model on a TSV')
    eval_.add_argument('--model', type=Path)
    eval_.add_argument('--test', type=Path)
    eval_.add_argument('--regions', type=Path)
    eval_.add_argument('--bin-width', type=int)
    eval_.add_argument('--report-out', type=Path)
    eval_.set_defaults(handler=cmd_eval)

    audit = commands.add_parser('audit', parents=[common], help='share of dialectal tweets')
    audit.add_argument('--model', type=Path)
    audit.add_argument('--tweets', type=Path)
    audit.set_defaults(handler=cmd_audit)

    fixture = commands.add_parser('fixture', help='synthetic datasets')
    fixture_commands = fixture.add_subparsers(dest='fixture_command', required=True)
    generate = fixture_commands.add_parser('generate', parents=[common])
    generate.add_argument('--kind', required=True, choices=[kind.value for kind in FixtureKindEnum])
    generate.add_argument('--fixture-dir', type=Path)
    generate.add_argument('--users', type=int, default=200)
    generate.add_argument('--classes', type=int, default=6)
    generate.add_argument('--docs-per-class', type=int, default=1000)
    generate.add_argument('--skew', type=float, default=1.0)
    generate.add_argument('--docs', type=int, default=20000)
    generate.set_defaults(handler=cmd_fixture_generate)
    return parser


def print_summary(summary: dict) -> None:
    print(json.dumps(summary, ensure_ascii=False, sort_keys=True), flush=True)


def command_name(args: Optional[argparse.Namespace]) -> str:
    if args is None:
        return 'unknown'
    if getattr(args, 'fixture_command', None):
        return f'{args.command} {args.fixture_command}'
    return args.command


def main(argv: Optional[Sequence[str]] = None) -> int:
    args: Optional[argparse.Namespace] = None
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        config = load_run_config(args.config, **config_values(args))
        handler: Callable[[argparse.Namespace, RunConfig], dict] = args.handler
        summary = handler(args, config)
    except (ConfigurationError, ValidationError) as e:
        logger.error(f'Invalid input: {e}')
        print_summary(
            {'command': command_name(args), 'status': 'error', 'exit_code': EXIT_INVALID, 'error': str(e)}
        )
        return EXIT_INVALID
    except (DialectKitError, OSError) as e:
        logger.error(f'Run failed: {e}')
        print_summary(
            {'command': command_name(args), 'status': 'error', 'exit_code': EXIT_RUNTIME, 'error': str(e)}
        )
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f'Unexpected failure: {e!r}')
        print_summary(
            {'command': command_name(args), 'status': 'error', 'exit_code': EXIT_RUNTIME, 'error': repr(e)}
        )
        return EXIT_RUNTIME
    print_summary({'command': command_name(args), 'status': 'ok', **summary})
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
