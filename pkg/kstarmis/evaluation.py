"""
Module for cross-validated evaluation: confusion matrices,
their derived metrics, and the feature-count sweep
"""
import torch
import logging
from datetime import datetime

from . import utils, io, kstar
from .dataset import stratified_folds

logger = logging.getLogger(__name__)

FAULT = 'Fault'


class ConfusionMatrix:
    """
    Prediction counts: rows are true classes,
    columns are predicted classes
    """
    def __init__(self, class_names, counts=None):
        """
        Parameters
        ----------
        class_names : list of str
            Ordered class names
        counts : array_like, optional
            Non-negative integer counts of shape (Nclasses, Nclasses).
            Default is all zeros.
        """
        self.class_names = list(class_names)
        n = len(self.class_names)
        if counts is None:
            counts = torch.zeros((n, n), dtype=torch.long)
        self.counts = torch.as_tensor(counts, dtype=torch.long).clone()
        self.check()

    def check(self):
        """Check invariants"""
        n = len(self.class_names)
        if len(set(self.class_names)) != n:
            raise utils.SchemaError("duplicate class names {}".format(self.class_names))
        if tuple(self.counts.shape) != (n, n):
            raise utils.DataError("counts of shape {} for {} classes".format(
                tuple(self.counts.shape), n))
        if (self.counts < 0).any():
            raise utils.DataError("negative confusion counts")

    @classmethod
    def from_predictions(cls, class_names, true, predicted):
        """
        Tally predictions

        Parameters
        ----------
        class_names : list of str
        true : list of str
        predicted : list of str

        Returns
        -------
        ConfusionMatrix
        """
        cm = cls(class_names)
        cm.add(true, predicted)
        return cm

    def add(self, true, predicted):
        """Accumulate (true, predicted) label pairs in place"""
        idx = {c: i for i, c in enumerate(self.class_names)}
        for t, p in zip(true, predicted):
            self.counts[idx[t], idx[p]] += 1

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def row_sums(self):
        return self.counts.sum(1)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.class_names == other.class_names and torch.equal(self.counts, other.counts)

    def to_dict(self):
        return {'class_names': list(self.class_names), 'counts': self.counts.tolist()}

    def render(self, corner='TESTING'):
        """
        Plain-text table: a header of predicted classes,
        then one row per true class

        Parameters
        ----------
        corner : str, optional
            Top-left header cell

        Returns
        -------
        str
        """
        cells = [[corner] + self.class_names]
        for name, row in zip(self.class_names, self.counts.tolist()):
            cells.append([name] + [str(v) for v in row])
        width = max(len(c) for row in cells for c in row)
        return '\n'.join(' '.join(c.rjust(width) for c in row) for row in cells) + '\n'


def read_confusion(path):
    """
    Read a confusion matrix, either a json report holding
    'class_names' and 'counts' (optionally under 'confusion'),
    or the whitespace table written by ConfusionMatrix.render

    Parameters
    ----------
    path : str

    Returns
    -------
    ConfusionMatrix
    """
    with open(path) as f:
        text = f.read()
    if text.lstrip().startswith('{'):
        obj = io.read_json(path)
        obj = obj.get('confusion', obj)
        try:
            return ConfusionMatrix(obj['class_names'], obj['counts'])
        except KeyError as err:
            raise utils.DataError("{}: missing {}".format(path, err))

    rows = [l.split() for l in text.splitlines() if l.strip()]
    if len(rows) < 2:
        raise utils.DataError("{}: expected a header and at least one row".format(path))
    class_names = rows[0][1:]
    if len(rows) - 1 != len(class_names):
        raise utils.DataError("{}: {} rows for {} classes".format(
            path, len(rows) - 1, len(class_names)))
    counts = []
    for i, row in enumerate(rows[1:]):
        if row[0] != class_names[i] or len(row) != len(class_names) + 1:
            raise utils.DataError("{}: malformed row {}".format(path, ' '.join(row)))
        try:
            counts.append([int(v) for v in row[1:]])
        except ValueError:
            raise utils.DataError("{}: non-integer count in row {}".format(path, row[0]))

    return ConfusionMatrix(class_names, counts)


def accuracy(cm):
    """
    Overall accuracy, 100 * trace / total

    Parameters
    ----------
    cm : ConfusionMatrix

    Returns
    -------
    float
        Percentage
    """
    total = cm.total
    if total == 0:
        raise ValueError("accuracy of an empty confusion matrix")
    return 100 * int(torch.diagonal(cm.counts).sum()) / total


def per_class_recall(cm):
    """
    Fraction of each true class predicted correctly

    Parameters
    ----------
    cm : ConfusionMatrix

    Returns
    -------
    dict
        class name -> percentage
    """
    rows = cm.row_sums.tolist()
    diag = torch.diagonal(cm.counts).tolist()
    zero = [c for c, r in zip(cm.class_names, rows) if r == 0]
    if zero:
        raise utils.DataError("recall undefined for classes with no instances: {}".format(zero))
    return {c: 100 * d / r for c, d, r in zip(cm.class_names, diag, rows)}


def per_class_precision(cm):
    """
    Fraction of each predicted class that is correct.
    Classes never predicted map to None.

    Parameters
    ----------
    cm : ConfusionMatrix

    Returns
    -------
    dict
        class name -> percentage or None
    """
    cols = cm.counts.sum(0).tolist()
    diag = torch.diagonal(cm.counts).tolist()
    return {c: (100 * d / s if s > 0 else None) for c, d, s in zip(cm.class_names, diag, cols)}


def fault_vs_normal_collapse(cm, normal_class=utils.NORMAL):
    """
    Merge every non-normal class into one Fault class

    Parameters
    ----------
    cm : ConfusionMatrix
    normal_class : str, optional

    Returns
    -------
    ConfusionMatrix
        Classes [Fault, normal_class]
    """
    if normal_class not in cm.class_names:
        raise ValueError("normal class {!r} not in {}".format(normal_class, cm.class_names))
    j = cm.class_names.index(normal_class)
    # 0 -> Fault, 1 -> Normal
    group = torch.zeros(len(cm.class_names), dtype=torch.long)
    group[j] = 1
    onehot = torch.nn.functional.one_hot(group, 2)
    counts = onehot.T @ cm.counts @ onehot
    return ConfusionMatrix([FAULT, normal_class], counts)


def cross_validate(d, k=10, blend=20., seed=0, resubstitution=False, **model_kwargs):
    """
    Stratified k-fold cross-validation of the K* classifier.
    Folds are evaluated in order and their counts summed.

    Parameters
    ----------
    d : Dataset
    k : int, optional
        Number of folds
    blend : float, optional
        K* blend percentage
    seed : int, optional
        Fold seed
    resubstitution : bool, optional
        If True, train and test on all of d instead
    model_kwargs : dict
        Extra KStarModel kwargs

    Returns
    -------
    ConfusionMatrix
    """
    cm = ConfusionMatrix(d.class_names)
    if resubstitution:
        model = kstar.KStarModel(d, blend=blend, **model_kwargs)
        pred = [p for p, _ in kstar.predict_dataset(model, d)]
        cm.add(d.labels, pred)
        return cm

    folds = stratified_folds(d, k=k, seed=seed)
    for f in range(folds.k):
        train, test = folds.split(f)
        model = kstar.KStarModel(d.select(train), blend=blend, **model_kwargs)
        test_d = d.select(test)
        pred = [p for p, _ in kstar.predict_dataset(model, test_d)]
        cm.add(test_d.labels, pred)
        logger.debug("fold {}/{}: {} train, {} test".format(f + 1, folds.k, len(train), len(test)))

    return cm


class SweepResult:
    """
    Accuracy against the number of top-ranked features used
    """
    def __init__(self, rows):
        """
        Parameters
        ----------
        rows : list of (int, float, list of str)
            (feature count, accuracy percentage, features used)
        """
        self.rows = [(int(m), float(a), list(f)) for m, a, f in rows]
        self.check()

    def check(self):
        counts = [m for m, _, _ in self.rows]
        if any(b <= a for a, b in zip(counts[:-1], counts[1:])):
            raise ValueError("feature counts must be strictly increasing")
        for (_, _, f1), (_, _, f2) in zip(self.rows[:-1], self.rows[1:]):
            if f2[:len(f1)] != f1:
                raise ValueError("feature subsets must be prefixes of one ranking")

    def __len__(self):
        return len(self.rows)

    @property
    def accuracies(self):
        return [a for _, a, _ in self.rows]

    def best(self):
        """
        Smallest feature count reaching the maximum accuracy

        Returns
        -------
        (int, float, list of str)
        """
        top = max(self.accuracies)
        for row in self.rows:
            if row[1] == top:
                return row

    def to_dict(self):
        return [{'n_features': m, 'accuracy': a, 'features': f} for m, a, f in self.rows]

    def render(self):
        """Plain-text table, one row per feature count, one decimal place"""
        lines = ['{:>15} {:>13}'.format('No. of features', 'accuracy (%)')]
        for m, a, _ in self.rows:
            lines.append('{:>15d} {:>13.1f}'.format(m, a))
        return '\n'.join(lines) + '\n'


def feature_sweep(d, ranking, k=10, blend=20., seed=0, verbose=False, **model_kwargs):
    """
    Cross-validated accuracy using the top 1, 2, ... ranked
    features. Every run shares the same fold seed.

    Parameters
    ----------
    d : Dataset
    ranking : FeatureRanking
        Covers every feature of d
    k : int, optional
    blend : float, optional
    seed : int, optional
    verbose : bool, optional
        Log progress
    model_kwargs : dict
        Extra KStarModel kwargs

    Returns
    -------
    SweepResult
    """
    ranking.check(d.feature_names)
    start = datetime.now().timestamp()
    rows = []
    for m in range(1, len(ranking) + 1):
        keep = ranking.top(m)
        cm = cross_validate(d.project(keep), k=k, blend=blend, seed=seed, **model_kwargs)
        rows.append((m, accuracy(cm), keep))
        utils.log("{} features: {:.1f}% ({})".format(m, rows[-1][1], utils.elapsed_time(start)),
                  verbose=verbose)

    return SweepResult(rows)


def evaluation_report(cm, normal_class=utils.NORMAL, features=None):
    """
    Machine-readable summary of a confusion matrix

    Parameters
    ----------
    cm : ConfusionMatrix
    normal_class : str, optional
        If present in cm, a fault/normal collapse is included
    features : list of str, optional
        Features the classifier used

    Returns
    -------
    dict
    """
    report = {
        'confusion': cm.to_dict(),
        'accuracy': accuracy(cm),
        'recall': per_class_recall(cm),
        'precision': per_class_precision(cm),
    }
    if features is not None:
        report['features'] = list(features)
    if normal_class in cm.class_names:
        col = fault_vs_normal_collapse(cm, normal_class)
        report['collapse'] = col.to_dict()
        report['collapse_accuracy'] = accuracy(col)

    return report


def render_report(report):
    """
    Plain-text rendering of evaluation_report output,
    accuracies to one decimal place

    Parameters
    ----------
    report : dict

    Returns
    -------
    str
    """
    cm = ConfusionMatrix(**report['confusion'])
    lines = [cm.render(), 'accuracy (%): {:.1f}'.format(report['accuracy'])]
    lines.append('recall (%): ' + ', '.join('{} {:.1f}'.format(c, report['recall'][c])
                                           for c in cm.class_names))
    if 'features' in report:
        lines.append('features ({}): {}'.format(len(report['features']),
                                                ', '.join(report['features'])))
    if 'collapse' in report:
        lines.append('')
        lines.append(ConfusionMatrix(**report['collapse']).render())
        lines.append('fault/normal accuracy (%): {:.1f}'.format(report['collapse_accuracy']))

    return '\n'.join(lines) + '\n'
