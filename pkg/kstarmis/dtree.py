"""
Module for a C4.5-style decision tree on numeric features,
used to rank features before classification
"""
import torch
import numpy as np
import logging
from collections import deque

from . import utils, io

logger = logging.getLogger(__name__)

LN2 = np.log(2)

# gains at or below this are treated as zero
GAIN_ATOL = 1e-12


def _entropy(counts):
    """Entropy [bits] along the last axis of a count tensor"""
    counts = torch.as_tensor(counts, dtype=utils._float())
    total = counts.sum(-1, keepdim=True)
    p = counts / total.clamp(min=1)
    return torch.special.entr(p).sum(-1) / LN2


def entropy(class_counts):
    """
    Shannon entropy of a class distribution

    Parameters
    ----------
    class_counts : array_like
        Non-negative integer count per class

    Returns
    -------
    float
        -sum_c p_c log2 p_c [bits]
    """
    counts = torch.as_tensor(class_counts, dtype=utils._float())
    if (counts < 0).any():
        raise ValueError("class counts must be non-negative")
    if counts.sum() < 1:
        raise ValueError("entropy of all-zero class counts")
    return float(_entropy(counts))


class SplitResult:
    """
    Best binary split of one feature: value <= threshold goes left
    """
    def __init__(self, threshold, gain_ratio, info_gain):
        self.threshold = float(threshold)
        self.gain_ratio = float(gain_ratio)
        self.info_gain = float(info_gain)

    def __iter__(self):
        return iter((self.threshold, self.gain_ratio, self.info_gain))

    def __repr__(self):
        return "SplitResult(threshold={}, gain_ratio={}, info_gain={})".format(
            self.threshold, self.gain_ratio, self.info_gain)


def _best_split_values(x, y, Nclasses, min_leaf=1):
    """
    Scan every midpoint between consecutive distinct values of x

    Parameters
    ----------
    x : tensor
        Feature values, shape (N,)
    y : tensor
        Class indices, shape (N,)
    Nclasses : int
    min_leaf : int, optional
        Minimum instances on each side

    Returns
    -------
    SplitResult
    """
    n = len(x)
    order = torch.argsort(x, stable=True)
    xs, ys = x[order], y[order]
    onehot = torch.nn.functional.one_hot(ys, Nclasses).to(utils._float())
    total = onehot.sum(0)

    # candidate i splits after sorted position i
    left = onehot.cumsum(0)[:-1]
    right = total - left
    nl = torch.arange(1, n, dtype=utils._float())
    nr = n - nl
    valid = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return SplitResult(xs[0], 0.0, 0.0)

    gain = _entropy(total) - (nl * _entropy(left) + nr * _entropy(right)) / n
    gain = torch.where(valid, gain, torch.full_like(gain, -np.inf))
    # first maximal index -> smallest threshold on ties
    i = int(torch.argmax(gain))
    info_gain = max(float(gain[i]), 0.0)
    split_info = float(_entropy(torch.stack([nl[i], nr[i]])))
    gain_ratio = info_gain / split_info if split_info > 0 else 0.0

    return SplitResult((xs[i] + xs[i + 1]) / 2, gain_ratio, info_gain)


def best_split(d, feature, min_leaf=1):
    """
    Best information-gain threshold of one feature

    Parameters
    ----------
    d : Dataset
        >= 2 instances and >= 2 classes present
    feature : str
        Feature name
    min_leaf : int, optional
        Only consider thresholds leaving >= min_leaf
        instances on each side

    Returns
    -------
    SplitResult
        (threshold, gain_ratio, info_gain). A feature that
        is constant (or has no admissible threshold) returns
        gain 0 with its smallest value as threshold.
    """
    x = d.column(feature)
    if len(d) < 2:
        raise ValueError("best_split needs >= 2 instances, got {}".format(len(d)))
    if len(torch.unique(d.y)) < 2:
        raise ValueError("best_split needs >= 2 classes present")

    return _best_split_values(x, d.y, d.Nclasses, min_leaf=min_leaf)


class TreeNode:
    """
    Base class of decision tree nodes
    """
    is_leaf = False

    def predict(self, x):
        """
        Predicted class name of one instance

        Parameters
        ----------
        x : FeatureVector or dict
            Indexable by feature name

        Returns
        -------
        str
        """
        raise NotImplementedError

    def depth(self):
        raise NotImplementedError


class Leaf(TreeNode):
    """
    Terminal node holding the class counts reaching it
    """
    is_leaf = True

    def __init__(self, counts, class_names):
        """
        Parameters
        ----------
        counts : tensor
            Instance count per class
        class_names : list of str
        """
        self.counts = torch.as_tensor(counts, dtype=torch.long)
        self.class_names = class_names

    @property
    def Ninstances(self):
        return int(self.counts.sum())

    @property
    def label(self):
        # ties -> class_names order
        return self.class_names[int(torch.argmax(self.counts))]

    def predict(self, x):
        return self.label

    def depth(self):
        return 0

    def __repr__(self):
        return "Leaf({})".format(dict(zip(self.class_names, self.counts.tolist())))


class Split(TreeNode):
    """
    Internal node: feature <= threshold goes left, > threshold goes right
    """
    def __init__(self, feature, threshold, left, right, info_gain=0.0, gain_ratio=0.0):
        self.feature = feature
        self.threshold = float(threshold)
        self.left = left
        self.right = right
        self.info_gain = float(info_gain)
        self.gain_ratio = float(gain_ratio)

    @property
    def counts(self):
        return self.left.counts + self.right.counts

    @property
    def Ninstances(self):
        return self.left.Ninstances + self.right.Ninstances

    def predict(self, x):
        if float(x[self.feature]) <= self.threshold:
            return self.left.predict(x)
        return self.right.predict(x)

    def depth(self):
        return 1 + max(self.left.depth(), self.right.depth())

    def __repr__(self):
        return "Split({} <= {:.6g})".format(self.feature, self.threshold)


def build_tree(d, min_leaf=2, max_depth=20):
    """
    Top-down induction of an unpruned binary tree. Each node
    splits on the feature/threshold of maximum gain ratio among
    splits with positive information gain.

    Parameters
    ----------
    d : Dataset
        Non-empty training data
    min_leaf : int, optional
        Minimum instances per child
    max_depth : int, optional
        Maximum tree depth (root at depth 0)

    Returns
    -------
    TreeNode
    """
    if len(d) == 0:
        raise ValueError("build_tree needs a non-empty dataset")
    if min_leaf < 1 or max_depth < 0:
        raise ValueError("need min_leaf >= 1 and max_depth >= 0")

    def grow(inds, depth):
        y = d.y[inds]
        counts = torch.bincount(y, minlength=d.Nclasses)
        if (counts > 0).sum() < 2 or depth >= max_depth or len(inds) < 2 * min_leaf:
            return Leaf(counts, d.class_names)

        best, best_feature = None, None
        for j, name in enumerate(d.feature_names):
            res = _best_split_values(d.data[inds, j], y, d.Nclasses, min_leaf=min_leaf)
            if res.info_gain <= GAIN_ATOL:
                continue
            # strict > keeps the earliest feature on ties
            if best is None or res.gain_ratio > best.gain_ratio:
                best, best_feature = res, j

        if best is None:
            return Leaf(counts, d.class_names)

        go_left = d.data[inds, best_feature] <= best.threshold
        return Split(d.feature_names[best_feature], best.threshold,
                     grow(inds[go_left], depth + 1), grow(inds[~go_left], depth + 1),
                     info_gain=best.info_gain, gain_ratio=best.gain_ratio)

    tree = grow(torch.arange(len(d)), 0)
    logger.debug("built tree of depth {}".format(tree.depth()))

    return tree


def predict_dataset(tree, d):
    """
    Predicted class name of every instance of d

    Parameters
    ----------
    tree : TreeNode
    d : Dataset
        Must hold every feature the tree splits on

    Returns
    -------
    list of str
    """
    out = [None] * len(d)

    def descend(node, inds):
        if node.is_leaf:
            for i in inds.tolist():
                out[i] = node.label
            return
        go_left = d.column(node.feature)[inds] <= node.threshold
        descend(node.left, inds[go_left])
        descend(node.right, inds[~go_left])

    descend(tree, torch.arange(len(d)))
    return out


def _breadth_first(tree):
    queue = deque([tree])
    while queue:
        node = queue.popleft()
        yield node
        if not node.is_leaf:
            queue.append(node.left)
            queue.append(node.right)


def tree_features(tree):
    """
    Features the tree splits on, in breadth-first
    order of first appearance

    Parameters
    ----------
    tree : TreeNode

    Returns
    -------
    list of str
    """
    names = []
    for node in _breadth_first(tree):
        if not node.is_leaf and node.feature not in names:
            names.append(node.feature)
    return names


class FeatureRanking:
    """
    An ordered list of (feature name, score [bits])
    """
    def __init__(self, entries):
        """
        Parameters
        ----------
        entries : list of (str, float)
        """
        self.entries = [(str(n), float(s)) for n, s in entries]
        names = self.names
        if len(set(names)) != len(names):
            raise utils.SchemaError("ranking lists a feature twice")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self):
        return [n for n, _ in self.entries]

    @property
    def scores(self):
        return [s for _, s in self.entries]

    def top(self, m):
        """First m feature names"""
        if not 1 <= m <= len(self):
            raise ValueError("m = {} not in [1, {}]".format(m, len(self)))
        return self.names[:m]

    def check(self, feature_names):
        """Check the ranking is a permutation of feature_names"""
        if sorted(self.names) != sorted(feature_names):
            raise utils.SchemaError("ranking {} does not cover features {}".format(
                self.names, list(feature_names)))

    def write(self, fname):
        io.write_ranking(fname, self.entries)

    @classmethod
    def read(cls, fname):
        return cls(io.read_ranking(fname))

    def to_dict(self):
        return [{'feature': n, 'score_bits': s} for n, s in self.entries]


def rank_features(tree, d):
    """
    Rank features by the tree. Features the tree splits on
    come first, in breadth-first order of first appearance,
    scored by the information gain of that node. The rest
    follow by decreasing standalone information gain on d,
    then by schema order.

    Parameters
    ----------
    tree : TreeNode
        Tree built from d
    d : Dataset

    Returns
    -------
    FeatureRanking
    """
    entries = []
    for node in _breadth_first(tree):
        if not node.is_leaf and node.feature not in [n for n, _ in entries]:
            entries.append((node.feature, node.info_gain))

    used = {n for n, _ in entries}
    multiclass = len(d) >= 2 and len(torch.unique(d.y)) >= 2
    rest = []
    for j, name in enumerate(d.feature_names):
        if name in used:
            continue
        gain = best_split(d, name).info_gain if multiclass else 0.0
        rest.append((-gain, j, name, gain))
    rest.sort()
    entries.extend([(name, gain) for _, _, name, gain in rest])

    return FeatureRanking(entries)
