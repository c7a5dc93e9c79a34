"""
Batch command-line front end:

    kstarmis gen      simulate labeled engine signals
    kstarmis extract  window signals and extract statistical features
    kstarmis rank     rank features with a decision tree
    kstarmis sweep    K* accuracy against number of ranked features
    kstarmis eval     cross-validated K* confusion matrix

Exit codes: 0 success, 1 usage error, 2 data error.
"""
import argparse
import logging
import os
import sys
from datetime import datetime

from . import utils, io, ingest, features, dataset, dtree, evaluation
from .version import version

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    """Bad command-line usage"""


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises instead of exiting on bad usage"""
    def error(self, message):
        raise UsageError("{}: {}".format(self.prog, message))


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer, got {}".format(s))
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer, got {}".format(s))
    return v


def _blend(s):
    v = float(s)
    if not 0 <= v <= 100:
        raise argparse.ArgumentTypeError("must be a percentage in [0, 100], got {}".format(s))
    return v


def _emit(out, report, text):
    """
    Write a json report to out and its text rendering next to it
    (same stem, .txt), and print the text to stdout
    """
    if out is not None:
        io.write_json(out, report)
        with open(os.path.splitext(out)[0] + '.txt', 'w') as f:
            f.write(text)
    sys.stdout.write(text)


def cmd_gen(args):
    """Simulate --windows signals for each condition into --out"""
    overrides = {'seed': args.seed, 'n_samples': args.samples}
    for key, value in [('rpm', args.rpm), ('sample_rate_hz', args.sample_rate),
                       ('noise_sigma', args.noise), ('misfire_attenuation', args.attenuation)]:
        if value is not None:
            overrides[key] = value
    try:
        config = ingest.EngineSimConfig(**overrides)
    except ValueError as err:
        raise UsageError(str(err))

    os.makedirs(args.out, exist_ok=True)
    start = datetime.now().timestamp()
    manifest = {}
    conditions = utils.CONDITIONS if args.condition is None else (args.condition,)
    for source_id, sig, seed in ingest.synth_dataset(config, conditions=conditions,
                                                     n_per_condition=args.windows):
        fname = source_id + '.sig'
        ingest.write_signal(sig, os.path.join(args.out, fname))
        manifest[fname] = {'condition': sig.condition, 'seed': seed,
                           'sample_rate_hz': config.sample_rate_hz,
                           'config': config.update(seed=seed).to_dict()}
    io.write_manifest(args.out, manifest)
    utils.log("wrote {} signals to {} in {}".format(len(manifest), args.out,
              utils.elapsed_time(start)), verbose=args.verbose)

    return EXIT_OK


def cmd_extract(args):
    """Window every signal of a manifest and write the feature dataset"""
    manifest = io.read_manifest(args.input)
    fvs = []
    for fname, entry in manifest.items():
        rate = entry.get('sample_rate_hz', args.sample_rate or 24000.)
        sig = ingest.load_signal(os.path.join(args.input, fname),
                                 condition=entry['condition'], sample_rate_hz=rate)
        windows = ingest.window_signal(sig, window_len=args.window, hop=args.hop)
        if not windows:
            logger.warning("skipping {}: {} samples is shorter than the {}-sample window".format(
                fname, len(sig), args.window))
            continue
        fvs.extend(features.extract_features(w) for w in windows)

    d = dataset.Dataset.from_feature_vectors(fvs)
    dataset.write_dataset(d, args.out)
    utils.log("extracted {} windows {}".format(len(d), d.class_counts()), verbose=args.verbose)

    return EXIT_OK


def cmd_rank(args):
    """Rank the features of a dataset with a decision tree"""
    d = dataset.read_dataset(args.input)
    tree = dtree.build_tree(d, min_leaf=args.min_leaf, max_depth=args.max_depth)
    ranking = dtree.rank_features(tree, d)
    utils.log("tree of depth {} uses {}".format(tree.depth(), dtree.tree_features(tree)),
              verbose=args.verbose)
    if args.out is not None:
        ranking.write(args.out)
    for name, score in ranking:
        sys.stdout.write('{},{!r}\n'.format(name, score))

    return EXIT_OK


def cmd_sweep(args):
    """Cross-validated accuracy for the top 1..N ranked features"""
    if args.ranking is None:
        raise UsageError("sweep: --ranking is required")
    d = dataset.read_dataset(args.input)
    ranking = dtree.FeatureRanking.read(args.ranking)
    result = evaluation.feature_sweep(d, ranking, k=args.folds, blend=args.blend,
                                      seed=args.seed, verbose=args.verbose)
    m, acc, best = result.best()
    report = {'sweep': result.to_dict(),
              'best': {'n_features': m, 'accuracy': acc, 'features': best},
              'folds': args.folds, 'blend': args.blend, 'seed': args.seed}
    text = result.render() + 'best: {} features, {:.1f}%\n'.format(m, acc)
    _emit(args.out, report, text)

    return EXIT_OK


def _eval_features(args, d):
    if args.features is not None:
        names = [n.strip() for n in args.features.split(',') if n.strip()]
        unknown = [n for n in names if n not in d.feature_names]
        if not names or unknown:
            raise UsageError("--features: unknown feature(s) {}, expected names from {}".format(
                unknown, d.feature_names))
        return names
    if args.ranking is not None:
        ranking = dtree.FeatureRanking.read(args.ranking)
        ranking.check(d.feature_names)
        m = len(ranking) if args.top is None else args.top
        if not 1 <= m <= len(ranking):
            raise UsageError("--top: {} not in [1, {}]".format(m, len(ranking)))
        return ranking.top(m)
    return list(d.feature_names)


def cmd_eval(args):
    """Confusion matrix and metrics, from a dataset or a stored matrix"""
    if args.from_confusion is not None:
        cm = evaluation.read_confusion(args.from_confusion)
        report = evaluation.evaluation_report(cm, normal_class=args.normal_class)
    else:
        if args.input is None:
            raise UsageError("eval: --in or --from-confusion is required")
        d = dataset.read_dataset(args.input)
        names = _eval_features(args, d)
        cm = evaluation.cross_validate(d.project(names), k=args.folds, blend=args.blend,
                                       seed=args.seed, resubstitution=args.resubstitution)
        report = evaluation.evaluation_report(cm, normal_class=args.normal_class,
                                              features=names)
        report.update({'folds': args.folds, 'blend': args.blend, 'seed': args.seed,
                       'resubstitution': args.resubstitution})
    _emit(args.out, report, evaluation.render_report(report))

    return EXIT_OK


def build_parser():
    """
    Build the argument parser

    Returns
    -------
    ArgumentParser
    """
    parser = ArgumentParser(prog='kstarmis', description=__doc__.split('\n\n')[0].strip())
    parser.add_argument('--version', action='version', version=version())
    sub = parser.add_subparsers(dest='command', parser_class=ArgumentParser)

    common = ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true', help='log progress to stderr')

    cv = ArgumentParser(add_help=False)
    cv.add_argument('--folds', type=_positive_int, default=10, help='cross-validation folds')
    cv.add_argument('--blend', type=_blend, default=20., help='K* blend percentage')
    cv.add_argument('--seed', type=_nonneg_int, default=0, help='fold seed')

    p = sub.add_parser('gen', parents=[common], help='simulate engine signals')
    p.add_argument('--out', required=True, help='output signal directory')
    p.add_argument('--windows', type=_positive_int, default=100,
                   help='signals per condition')
    p.add_argument('--condition', choices=utils.CONDITIONS, default=None,
                   help='simulate only this condition')
    p.add_argument('--seed', type=_nonneg_int, default=0, help='base noise seed')
    p.add_argument('--samples', type=_positive_int, default=8192, help='samples per signal')
    p.add_argument('--rpm', type=float, default=None)
    p.add_argument('--sample-rate', type=float, default=None, help='[Hz]')
    p.add_argument('--noise', type=float, default=None, help='noise standard deviation')
    p.add_argument('--attenuation', type=float, default=None,
                   help='misfiring-cylinder burst amplitude multiplier')
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser('extract', parents=[common], help='extract statistical features')
    p.add_argument('--in', dest='input', required=True, help='signal directory')
    p.add_argument('--out', required=True, help='dataset file (.csv, or .h5 for hdf5)')
    p.add_argument('--window', type=_positive_int, default=8192, help='window length')
    p.add_argument('--hop', type=_positive_int, default=None,
                   help='window hop, default the window length')
    p.add_argument('--sample-rate', type=float, default=None,
                   help='[Hz] for manifest entries without one')
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser('rank', parents=[common], help='rank features with a decision tree')
    p.add_argument('--in', dest='input', required=True, help='dataset file')
    p.add_argument('--out', default=None, help='ranking file')
    p.add_argument('--min-leaf', type=_positive_int, default=2)
    p.add_argument('--max-depth', type=_nonneg_int, default=20)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser('sweep', parents=[common, cv], help='accuracy vs number of features')
    p.add_argument('--in', dest='input', required=True, help='dataset file')
    p.add_argument('--ranking', default=None, help='ranking file from rank')
    p.add_argument('--out', default=None, help='json report; text goes next to it')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('eval', parents=[common, cv], help='cross-validated confusion matrix')
    p.add_argument('--in', dest='input', default=None, help='dataset file')
    p.add_argument('--features', default=None, help='comma-separated feature subset')
    p.add_argument('--ranking', default=None, help='ranking file from rank')
    p.add_argument('--top', type=_positive_int, default=None,
                   help='use the top ranked features only')
    p.add_argument('--from-confusion', default=None,
                   help='report on a stored confusion matrix instead')
    p.add_argument('--normal-class', default=utils.NORMAL)
    p.add_argument('--resubstitution', action='store_true',
                   help='train and test on the whole dataset')
    p.add_argument('--out', default=None, help='json report; text goes next to it')
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    """
    Run the command line

    Parameters
    ----------
    argv : list of str, optional
        Arguments, default sys.argv[1:]

    Returns
    -------
    int
        Exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: gen, extract, rank, sweep or eval")
    except UsageError as err:
        parser.print_usage(sys.stderr)
        sys.stderr.write('{}\n'.format(err))
        return EXIT_USAGE

    logging.basicConfig(stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s',
                        level=logging.INFO if args.verbose else logging.WARNING)

    try:
        return args.func(args)
    except UsageError as err:
        sys.stderr.write('error: {}\n'.format(err))
        return EXIT_USAGE
    except (utils.DataError, OSError) as err:
        sys.stderr.write('data error: {}\n'.format(err))
        return EXIT_DATA
    except ValueError as err:
        sys.stderr.write('error: {}\n'.format(err))
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
