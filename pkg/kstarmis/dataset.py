"""
Module for feature-vector datasets: schema-aware projection,
text and hdf5 serialization, and stratified fold assignment
"""
import torch
import numpy as np
import os
import logging

from . import version, utils, io

logger = logging.getLogger(__name__)


def default_class_names(labels):
    """
    Class order for a set of labels: the condition order
    when every label is a condition, otherwise sorted order

    Parameters
    ----------
    labels : list of str

    Returns
    -------
    list of str
    """
    present = set(labels)
    if present <= set(utils.CONDITIONS):
        return [c for c in utils.CONDITIONS if c in present]
    return sorted(present)


class Dataset:
    """
    An ordered collection of feature vectors sharing a feature schema.

    Instances are rows of self.data, of shape (Ninstances, Nfeatures),
    and self.y holds the index of each instance's label in self.class_names.
    """
    def __init__(self, data, labels, feature_names, class_names=None):
        """
        Parameters
        ----------
        data : array_like
            Feature values of shape (Ninstances, Nfeatures)
        labels : list of str
            Class label of each instance
        feature_names : list of str
            Unique names of the data columns
        class_names : list of str, optional
            Ordered class names. Default is default_class_names(labels)
        """
        labels = list(labels)
        self.feature_names = list(feature_names)
        self.class_names = list(class_names) if class_names is not None \
            else default_class_names(labels)
        data = torch.as_tensor(np.asarray(data, dtype=utils._float(numpy=True)))
        self.data = data.reshape(len(labels), len(self.feature_names))
        cidx = {c: i for i, c in enumerate(self.class_names)}
        unknown = sorted(set(labels) - set(cidx))
        if unknown:
            raise utils.SchemaError("labels {} not in class_names {}".format(
                unknown, self.class_names))
        self.y = torch.as_tensor([cidx[l] for l in labels], dtype=torch.long)
        self.check()

    @classmethod
    def from_feature_vectors(cls, fvs, names=None, class_names=None):
        """
        Build a Dataset from features.FeatureVector objects

        Parameters
        ----------
        fvs : list of FeatureVector
        names : list of str, optional
            Features to keep. Default is features.FEATURE_NAMES
        class_names : list of str, optional

        Returns
        -------
        Dataset
        """
        from .features import FEATURE_NAMES
        names = list(FEATURE_NAMES) if names is None else list(names)
        data = torch.stack([fv.as_tensor(names) for fv in fvs]) if len(fvs) \
            else torch.zeros((0, len(names)), dtype=utils._float())
        return cls(data, [fv.condition for fv in fvs], names, class_names=class_names)

    def check(self):
        """Check invariants"""
        if len(set(self.feature_names)) != len(self.feature_names):
            dups = sorted({n for n in self.feature_names if self.feature_names.count(n) > 1})
            raise utils.SchemaError("duplicate feature names {}".format(dups))
        if len(set(self.class_names)) != len(self.class_names):
            raise utils.SchemaError("duplicate class names {}".format(self.class_names))
        if self.data.ndim != 2 or self.data.shape[1] != len(self.feature_names):
            raise utils.SchemaError("data of shape {} does not match {} features".format(
                tuple(self.data.shape), len(self.feature_names)))
        if not torch.isfinite(self.data).all():
            raise utils.DataError("non-finite feature values")

    def __len__(self):
        return len(self.y)

    @property
    def Nfeatures(self):
        return len(self.feature_names)

    @property
    def Nclasses(self):
        return len(self.class_names)

    @property
    def labels(self):
        """Label string of every instance"""
        return [self.class_names[i] for i in self.y.tolist()]

    def class_counts(self):
        """
        Number of instances per class

        Returns
        -------
        dict
            class name -> count, in class_names order
        """
        counts = torch.bincount(self.y, minlength=self.Nclasses)
        return {c: int(n) for c, n in zip(self.class_names, counts)}

    def feature_index(self, name):
        """Column index of a feature"""
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise utils.SchemaError("unknown feature {!r}, expected one of {}".format(
                name, self.feature_names))

    def column(self, name):
        """Values of one feature"""
        return self.data[:, self.feature_index(name)]

    def select(self, inds):
        """
        Return a new Dataset holding the instances inds,
        in the order given. class_names are kept.

        Parameters
        ----------
        inds : array_like of int

        Returns
        -------
        Dataset
        """
        inds = torch.as_tensor(inds, dtype=torch.long)
        out = Dataset.__new__(Dataset)
        out.feature_names = list(self.feature_names)
        out.class_names = list(self.class_names)
        out.data = self.data[inds]
        out.y = self.y[inds]
        return out

    def project(self, keep):
        """
        Restrict every instance to an ordered feature subset.
        Labels and instance order are unchanged.

        Parameters
        ----------
        keep : list of str
            Non-empty subset of feature_names

        Returns
        -------
        Dataset
        """
        keep = list(keep)
        if not keep:
            raise ValueError("project needs at least one feature")
        cols = [self.feature_index(k) for k in keep]
        out = Dataset.__new__(Dataset)
        out.feature_names = keep
        out.class_names = list(self.class_names)
        out.data = self.data[:, cols]
        out.y = self.y.clone()
        out.check()
        return out

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.feature_names == other.feature_names
                and self.class_names == other.class_names
                and torch.equal(self.y, other.y)
                and torch.equal(self.data, other.data))

    def allclose(self, other, rtol=1e-11):
        """Equality up to decimal formatting of the feature values"""
        return (self.feature_names == other.feature_names
                and self.class_names == other.class_names
                and torch.equal(self.y, other.y)
                and torch.allclose(self.data, other.data, rtol=rtol, atol=0))

    def write_csv(self, fname):
        """
        Write comma-separated text: a header of feature
        names plus 'label', then one row per instance with
        values at 12 significant digits

        Parameters
        ----------
        fname : str
        """
        with open(fname, 'w') as f:
            f.write(','.join(self.feature_names + ['label']) + '\n')
            labels = self.labels
            for row, label in zip(self.data.tolist(), labels):
                f.write(','.join([io.format_real(v) for v in row] + [label]) + '\n')

    @classmethod
    def read_csv(cls, fname, class_names=None):
        """
        Read a comma-separated dataset file

        Parameters
        ----------
        fname : str
        class_names : list of str, optional
            Closed label set. If given, any other label is an error.

        Returns
        -------
        Dataset
        """
        with open(fname) as f:
            lines = f.read().splitlines()
        if not lines:
            raise utils.DataError("{}: empty dataset file".format(fname))
        header = [h.strip() for h in lines[0].split(',')]
        if header[-1] != 'label' or len(header) < 2:
            raise utils.DataError("{}: last header column must be 'label'".format(fname))
        names = header[:-1]
        if len(set(names)) != len(names):
            raise utils.SchemaError("{}: duplicate feature names in header".format(fname))

        rows, labels = [], []
        for i, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            parts = line.split(',')
            if len(parts) != len(header):
                raise utils.DataError("{}: row at line {} has {} values, expected {}".format(
                    fname, i, len(parts) - 1, len(names)))
            try:
                rows.append([float(p) for p in parts[:-1]])
            except ValueError:
                raise utils.DataError("{}: row at line {} has a non-numeric value".format(
                    fname, i))
            label = parts[-1].strip()
            if class_names is not None and label not in class_names:
                raise utils.DataError("{}: row at line {} has unknown label {!r}".format(
                    fname, i, label))
            labels.append(label)

        data = np.array(rows, dtype=utils._float(numpy=True)).reshape(len(rows), len(names))
        return cls(data, labels, names, class_names=class_names)

    def write_hdf5(self, fname, overwrite=False):
        """
        Write Dataset to hdf5 file.

        Parameters
        ----------
        fname : str
            Output hdf5 filename
        overwrite : bool, optional
            If fname exists, overwrite it
        """
        import h5py
        if not os.path.exists(fname) or overwrite:
            with h5py.File(fname, 'w') as f:
                f.create_dataset('data', data=self.data.numpy())
                f.create_dataset('labels', data=self.y.numpy())
                f.attrs['feature_names'] = self.feature_names
                f.attrs['class_names'] = self.class_names
                f.attrs['obj'] = 'Dataset'
                f.attrs['version'] = version.__version__
        else:
            logger.warning("{} exists, not overwriting...".format(fname))

    @classmethod
    def read_hdf5(cls, fname):
        """
        Read an hdf5 Dataset

        Parameters
        ----------
        fname : str

        Returns
        -------
        Dataset
        """
        import h5py
        with h5py.File(fname, 'r') as f:
            if str(f.attrs.get('obj', '')) != 'Dataset':
                raise utils.DataError("{}: not a Dataset file".format(fname))
            data = f['data'][:]
            y = f['labels'][:]
            names = [_decode(n) for n in f.attrs['feature_names']]
            class_names = [_decode(c) for c in f.attrs['class_names']]
        return cls(data, [class_names[i] for i in y], names, class_names=class_names)


def _decode(s):
    return s.decode() if isinstance(s, bytes) else str(s)


def _is_hdf5(path):
    return os.path.splitext(path)[1].lower() in ['.h5', '.hdf5']


def read_dataset(path, class_names=None):
    """
    Read a dataset file; .h5/.hdf5 files are read
    as hdf5, everything else as comma-separated text

    Parameters
    ----------
    path : str
    class_names : list of str, optional
        Closed label set

    Returns
    -------
    Dataset
    """
    if _is_hdf5(path):
        d = Dataset.read_hdf5(path)
        if class_names is not None:
            unknown = sorted(set(d.class_names) - set(class_names))
            if unknown:
                raise utils.DataError("{}: unknown labels {}".format(path, unknown))
        return d
    return Dataset.read_csv(path, class_names=class_names)


def write_dataset(d, path):
    """
    Write a dataset file, format chosen by extension

    Parameters
    ----------
    d : Dataset
    path : str
    """
    if _is_hdf5(path):
        d.write_hdf5(path, overwrite=True)
    else:
        d.write_csv(path)


class FoldAssignment:
    """
    Per-instance fold index for k-fold cross-validation
    """
    def __init__(self, k, assignment):
        """
        Parameters
        ----------
        k : int
            Number of folds
        assignment : tensor
            Fold index in [0, k) for every instance
        """
        self.k = int(k)
        self.assignment = torch.as_tensor(assignment, dtype=torch.long)

    def __len__(self):
        return len(self.assignment)

    def split(self, fold):
        """
        Training and test instance indices of one fold

        Parameters
        ----------
        fold : int

        Returns
        -------
        train : tensor
        test : tensor
        """
        if not 0 <= fold < self.k:
            raise ValueError("fold {} not in [0, {})".format(fold, self.k))
        test = self.assignment == fold
        return torch.where(~test)[0], torch.where(test)[0]

    def fold_sizes(self):
        return torch.bincount(self.assignment, minlength=self.k)


def stratified_folds(d, k=10, seed=0):
    """
    Stratified fold assignment. Within each class the instances
    are shuffled by a seeded permutation and dealt to the folds
    round-robin, so per-class fold sizes differ by at most one.

    Parameters
    ----------
    d : Dataset
    k : int, optional
        Number of folds, 2 <= k <= smallest class count
    seed : int, optional

    Returns
    -------
    FoldAssignment
    """
    counts = [n for n in d.class_counts().values() if n > 0]
    kmax = min(counts) if counts else 0
    if not 2 <= k <= kmax:
        raise ValueError("k = {} folds out of range [2, {}] for class counts {}".format(
            k, kmax, d.class_counts()))

    gen = utils.make_generator(seed)
    assignment = torch.full((len(d),), -1, dtype=torch.long)
    for c in range(d.Nclasses):
        members = torch.where(d.y == c)[0]
        if len(members) == 0:
            continue
        perm = members[torch.randperm(len(members), generator=gen)]
        assignment[perm] = torch.arange(len(perm)) % k

    return FoldAssignment(k, assignment)
