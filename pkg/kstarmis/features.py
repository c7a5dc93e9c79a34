"""
Module for the descriptive statistics of a signal window
"""
import torch
import math

from . import utils

# dataset column order
FEATURE_NAMES = ('mean', 'standard_error', 'median', 'mode', 'standard_deviation',
                 'sample_variance', 'kurtosis', 'skewness', 'range', 'minimum',
                 'maximum', 'sum', 'count')


def _as_1d(x, min_len, name):
    x = torch.as_tensor(x, dtype=utils._float()).flatten()
    if len(x) < min_len:
        if len(x) == 0:
            raise ValueError("{} of an empty sequence".format(name))
        raise ValueError("{} needs at least {} values, got {}".format(name, min_len, len(x)))
    return x


def _deviations(x):
    """
    Mean-subtracted values. The mean is refined by a second
    pass over the residuals, which keeps moments accurate when
    the data sit on a large constant offset.
    """
    m = x.sum() / len(x)
    d = x - m
    m = m + d.sum() / len(x)
    return x - m


def mean(x):
    """
    Arithmetic mean

    Parameters
    ----------
    x : array_like
        1D real values, non-empty

    Returns
    -------
    float
    """
    x = _as_1d(x, 1, 'mean')
    return float(x.sum() / len(x))


def sample_std_dev(x):
    """
    Sample standard deviation with the n - 1 normalization

    Parameters
    ----------
    x : array_like
        1D real values, len >= 2

    Returns
    -------
    float
    """
    x = _as_1d(x, 2, 'sample_std_dev')
    d = _deviations(x)
    return float(torch.sqrt((d**2).sum() / (len(x) - 1)))


def standard_error(x):
    """
    Standard error of the mean, s / sqrt(n)

    Parameters
    ----------
    x : array_like
        1D real values, len >= 2

    Returns
    -------
    float
    """
    x = _as_1d(x, 2, 'standard_error')
    return sample_std_dev(x) / math.sqrt(len(x))


def median(x):
    """
    Median. Even-length input averages the two middle order statistics.

    Parameters
    ----------
    x : array_like
        1D real values, non-empty

    Returns
    -------
    float
    """
    x = _as_1d(x, 1, 'median')
    xs = torch.sort(x).values
    n = len(xs)
    if n % 2:
        return float(xs[n // 2])
    return float((xs[n // 2 - 1] + xs[n // 2]) / 2)


def mode(x):
    """
    Most frequent exact value, ties broken by the smallest value.
    All-distinct data therefore return the minimum.

    Parameters
    ----------
    x : array_like
        1D real values, non-empty

    Returns
    -------
    float
    """
    x = _as_1d(x, 1, 'mode')
    values, counts = torch.unique(x, sorted=True, return_counts=True)
    # argmax returns the first maximal index, i.e. the smallest value
    return float(values[torch.argmax(counts)])


def _standardized(x, name, min_len):
    x = _as_1d(x, min_len, name)
    d = _deviations(x)
    n = len(x)
    s = torch.sqrt((d**2).sum() / (n - 1))
    if s == 0:
        raise utils.ConstantWindowError("{} undefined for constant data".format(name))
    return d / s, n


def kurtosis(x):
    """
    Sample excess kurtosis with the bias-adjusted coefficients

    .. math::

        \\frac{n(n+1)}{(n-1)(n-2)(n-3)} \\sum z_i^4 - \\frac{3(n-1)^2}{(n-2)(n-3)}

    where z_i = (x_i - mean) / s.

    Parameters
    ----------
    x : array_like
        1D real values, len >= 4, not constant

    Returns
    -------
    float
    """
    z, n = _standardized(x, 'kurtosis', 4)
    a = n * (n + 1) / ((n - 1) * (n - 2) * (n - 3))
    b = 3 * (n - 1)**2 / ((n - 2) * (n - 3))
    return float(a * (z**4).sum() - b)


def skewness(x):
    """
    Sample skewness, n / ((n-1)(n-2)) sum z_i^3

    Parameters
    ----------
    x : array_like
        1D real values, len >= 3, not constant

    Returns
    -------
    float
    """
    z, n = _standardized(x, 'skewness', 3)
    return float(n / ((n - 1) * (n - 2)) * (z**3).sum())


class FeatureVector:
    """
    The descriptive statistics of one window plus its condition label
    """
    def __init__(self, mean, standard_error, median, mode, standard_deviation,
                 sample_variance, kurtosis, skewness, range, minimum, maximum,
                 sum, count, condition=utils.UNLABELED):
        self.mean = mean
        self.standard_error = standard_error
        self.median = median
        self.mode = mode
        self.standard_deviation = standard_deviation
        self.sample_variance = sample_variance
        self.kurtosis = kurtosis
        self.skewness = skewness
        self.range = range
        self.minimum = minimum
        self.maximum = maximum
        self.sum = sum
        self.count = int(count)
        self.condition = utils.check_condition(condition)

    def __getitem__(self, name):
        if name not in FEATURE_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def as_tensor(self, names=FEATURE_NAMES):
        """
        Feature values in the given name order

        Parameters
        ----------
        names : list of str, optional

        Returns
        -------
        tensor
        """
        unknown = [n for n in names if n not in FEATURE_NAMES]
        if unknown:
            raise utils.SchemaError("unknown features {}, expected names from {}".format(
                unknown, list(FEATURE_NAMES)))
        return torch.tensor([float(self[n]) for n in names], dtype=utils._float())

    def to_dict(self):
        d = {n: self[n] for n in FEATURE_NAMES}
        d['label'] = self.condition
        return d

    def check(self, rtol=1e-9):
        """Assert the internal consistency of the statistics"""
        def close(a, b):
            return abs(a - b) <= rtol * max(abs(a), abs(b), 1.0)
        assert self.minimum <= self.median <= self.maximum
        assert close(self.range, self.maximum - self.minimum)
        assert close(self.sample_variance, self.standard_deviation**2)
        assert close(self.standard_error, self.standard_deviation / math.sqrt(self.count))
        assert close(self.sum / self.count, self.mean)


def extract_features(window):
    """
    Compute every descriptive statistic of a window

    Parameters
    ----------
    window : SignalWindow or array_like
        Window of >= 4 non-constant samples. Plain arrays
        are treated as Unlabeled windows.

    Returns
    -------
    FeatureVector
    """
    condition = getattr(window, 'condition', utils.UNLABELED)
    x = _as_1d(getattr(window, 'samples', window), 4, 'extract_features')
    xmin, xmax = float(x.min()), float(x.max())
    if xmin == xmax:
        raise utils.ConstantWindowError("constant window ({} samples of {})".format(
            len(x), xmin))

    s = sample_std_dev(x)
    return FeatureVector(
        mean=mean(x),
        standard_error=s / math.sqrt(len(x)),
        median=median(x),
        mode=mode(x),
        standard_deviation=s,
        sample_variance=s**2,
        kurtosis=kurtosis(x),
        skewness=skewness(x),
        range=xmax - xmin,
        minimum=xmin,
        maximum=xmax,
        sum=float(x.sum()),
        count=len(x),
        condition=condition,
    )


def extract_dataset(windows, class_names=None):
    """
    Extract features from every window into a Dataset

    Parameters
    ----------
    windows : list of SignalWindow
    class_names : list of str, optional
        Class order of the Dataset. Default is the
        conditions present, in utils.CONDITIONS order.

    Returns
    -------
    dataset.Dataset
    """
    from .dataset import Dataset
    fvs = [extract_features(w) for w in windows]
    return Dataset.from_feature_vectors(fvs, class_names=class_names)
