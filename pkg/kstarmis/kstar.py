"""
Module for the K* instance-based classifier.

The probability of transforming a query a into a training
instance b is a product over attributes of exponential
densities exp(-|a_i - b_i| / x0_i) / (2 x0_i), normalized over
the training set. The scale x0_i is chosen per query and per
attribute so that the effective number of training instances
under the attribute's weights sits a blend fraction of the way
from the nearest instances (n0) to the whole training set (N).
"""
import torch
import numpy as np
import logging

from . import utils

logger = logging.getLogger(__name__)

LN2 = np.log(2)

# bisection bracket relative to the distance spread
X_LO = 1e-10
X_HI = 1e10

# class scores closer than this are ties
TIE_ATOL = 1e-9


def effective_count(distances, x0):
    """
    Effective number of equally weighted instances,
    (sum w)^2 / sum w^2 with w_b = exp(-d_b / x0)

    Parameters
    ----------
    distances : tensor
        Non-negative distances of shape (..., N)
    x0 : tensor or float
        Positive scale of shape (...)

    Returns
    -------
    tensor
        Shape (...)
    """
    distances = torch.as_tensor(distances, dtype=utils._float())
    x0 = torch.as_tensor(x0, dtype=utils._float())
    # weights relative to the nearest instance lie in (0, 1]
    r = distances - distances.min(-1, keepdim=True).values
    w = torch.exp(-r / x0[..., None])
    return w.sum(-1)**2 / (w**2).sum(-1)


class ScaleResult:
    """
    Outcome of the per-attribute scale search

    Attributes
    ----------
    x0 : tensor
        Selected scale
    target : tensor
        Target effective count
    converged : tensor
        True where |n_eff - target| <= tolerance * N
    degenerate : tensor
        True where every distance is equal, so the
        weights are uniform for any scale
    iterations : tensor
        Bisection steps taken
    """
    def __init__(self, x0, target, converged, degenerate, iterations):
        self.x0 = x0
        self.target = target
        self.converged = converged
        self.degenerate = degenerate
        self.iterations = iterations


def search_scales(distances, blend=20., max_iterations=100, tolerance=1e-6):
    """
    Batched scale search over the last axis of distances.
    Bisects on log x0 inside [X_LO * spread, X_HI * spread],
    valid because n_eff is non-decreasing in x0.

    Parameters
    ----------
    distances : tensor
        |query - b| of shape (..., N)
    blend : float, optional
        Percentage in [0, 100]
    max_iterations : int, optional
    tolerance : float, optional
        Allowed |n_eff - target| relative to N

    Returns
    -------
    ScaleResult
    """
    if not 0 <= blend <= 100:
        raise ValueError("blend must be in [0, 100], got {}".format(blend))
    d = torch.as_tensor(distances, dtype=utils._float())
    N = d.shape[-1]
    dmin = d.min(-1, keepdim=True).values
    spread = d.max(-1).values - dmin[..., 0]
    degenerate = spread <= 0
    n0 = (d == dmin).sum(-1).to(utils._float())
    target = n0 + (N - n0) * blend / 100
    atol = tolerance * N

    ref = torch.where(degenerate, torch.ones_like(spread), spread)
    lo, hi = X_LO * ref, X_HI * ref
    x0 = torch.sqrt(lo * hi)
    iterations = torch.zeros_like(spread, dtype=torch.long)

    # endpoints that already meet the target are returned as-is
    f_hi = effective_count(d, hi)
    f_lo = effective_count(d, lo)
    slack = 1e-12 * N
    take_hi = f_hi <= target + slack
    take_lo = (f_lo >= target - slack) & ~take_hi
    done = degenerate | take_hi | take_lo
    x0 = torch.where(take_hi, hi, x0)
    x0 = torch.where(take_lo | degenerate, lo, x0)
    converged = degenerate | ((take_hi | take_lo)
                              & (torch.abs(torch.where(take_hi, f_hi, f_lo) - target) <= atol))

    for i in range(max_iterations):
        if done.all():
            break
        mid = torch.sqrt(lo * hi)
        f = effective_count(d, mid)
        hit = ~done & (torch.abs(f - target) <= atol)
        x0 = torch.where(~done, mid, x0)
        iterations = torch.where(~done, iterations + 1, iterations)
        converged = converged | hit
        done = done | hit
        below = f < target
        lo = torch.where(below, mid, lo)
        hi = torch.where(below, hi, mid)

    return ScaleResult(x0, target, converged, degenerate, iterations)


def attribute_scale(query_value, training_values, blend=20., max_iterations=100,
                    tolerance=1e-6):
    """
    Scale x0 of one attribute for one query

    Parameters
    ----------
    query_value : float
    training_values : array_like
        >= 2 training values of the attribute
    blend : float, optional
        Percentage in [0, 100]
    max_iterations : int, optional
    tolerance : float, optional

    Returns
    -------
    ScaleResult
        With scalar x0, target, converged, degenerate, iterations
    """
    b = torch.as_tensor(training_values, dtype=utils._float()).flatten()
    if len(b) < 2:
        raise ValueError("attribute_scale needs >= 2 training values, got {}".format(len(b)))
    res = search_scales(torch.abs(float(query_value) - b), blend=blend,
                        max_iterations=max_iterations, tolerance=tolerance)
    return ScaleResult(float(res.x0), float(res.target), bool(res.converged),
                       bool(res.degenerate), int(res.iterations))


class QueryEvaluation:
    """
    Everything K* computes for one query
    """
    def __init__(self, log_probabilities, scores, class_names, scales, degenerate):
        """
        Parameters
        ----------
        log_probabilities : tensor
            log P*(b|a) for every training instance b, shape (N,)
        scores : tensor
            Summed P* per class, shape (Nclasses,)
        class_names : list of str
        scales : tensor
            Per-attribute x0, shape (Nfeatures,)
        degenerate : tensor
            Per-attribute degeneracy flags
        """
        self.log_probabilities = log_probabilities
        self.scores = scores
        self.class_names = class_names
        self.scales = scales
        self.degenerate = degenerate

    @property
    def probabilities(self):
        """P*(b|a) for every training instance b"""
        return torch.exp(self.log_probabilities)

    @property
    def predicted(self):
        # scores within TIE_ATOL of the maximum tie; the first in class_names order wins
        top = torch.where(self.scores >= self.scores.max() - TIE_ATOL)[0]
        return self.class_names[int(top[0])]

    @property
    def class_scores(self):
        return dict(zip(self.class_names, self.scores.tolist()))

    @property
    def distances(self):
        """K*(b|a) = -log2 P*(b|a) [bits]"""
        return (-self.log_probabilities / LN2).clamp(min=0)

    def check(self, atol=1e-9):
        """Assert the probability axioms"""
        assert abs(float(self.probabilities.sum()) - 1) <= atol
        assert (self.probabilities >= 0).all() and (self.probabilities <= 1).all()
        assert abs(float(self.scores.sum()) - 1) <= atol


class KStarModel:
    """
    Immutable training set plus blend setting
    """
    def __init__(self, training, blend=20., max_iterations=100, tolerance=1e-6,
                 batch_size=256):
        """
        Parameters
        ----------
        training : Dataset
            Non-empty numeric training instances
        blend : float, optional
            Percentage in [0, 100]
        max_iterations : int, optional
            Scale-search iteration cap
        tolerance : float, optional
            Scale-search tolerance on n_eff relative to N
        batch_size : int, optional
            Number of queries evaluated together
        """
        if len(training) == 0:
            raise ValueError("KStarModel needs a non-empty training set")
        if not 0 <= blend <= 100:
            raise ValueError("blend must be in [0, 100], got {}".format(blend))
        if not torch.isfinite(training.data).all():
            raise utils.DataError("training features must be finite")
        self.training = training
        self.blend = float(blend)
        self.max_iterations = int(max_iterations)
        self.tolerance = float(tolerance)
        self.batch_size = int(batch_size)

    @property
    def feature_names(self):
        return self.training.feature_names

    @property
    def class_names(self):
        return self.training.class_names

    def query_tensor(self, query):
        """
        Feature values of a query in the model schema

        Parameters
        ----------
        query : FeatureVector, dict or array_like
            Arrays must already be in feature_names order

        Returns
        -------
        tensor
            Shape (Nfeatures,)
        """
        names = self.feature_names
        if hasattr(query, 'as_tensor'):
            return query.as_tensor(names)
        if isinstance(query, dict):
            missing = [n for n in names if n not in query]
            if missing:
                raise utils.SchemaError("query lacks features {}".format(missing))
            return torch.tensor([float(query[n]) for n in names], dtype=utils._float())
        q = torch.as_tensor(query, dtype=utils._float()).flatten()
        if len(q) != len(names):
            raise utils.SchemaError("query has {} features, model has {}".format(
                len(q), len(names)))
        return q

    def scales(self, queries):
        """
        Per-query, per-attribute scale search

        Parameters
        ----------
        queries : tensor
            Shape (Nqueries, Nfeatures)

        Returns
        -------
        ScaleResult
            Fields of shape (Nqueries, Nfeatures)
        """
        dist = torch.abs(queries[:, :, None] - self.training.data.T[None, :, :])
        return search_scales(dist, blend=self.blend, max_iterations=self.max_iterations,
                             tolerance=self.tolerance)

    def log_probabilities(self, queries, x0=None):
        """
        log P*(b|a) for every query a and training instance b,
        computed in log space

        Parameters
        ----------
        queries : tensor
            Shape (Nqueries, Nfeatures)
        x0 : tensor, optional
            Scales of shape (Nqueries, Nfeatures). Searched if None.

        Returns
        -------
        tensor
            Shape (Nqueries, Ntraining)
        """
        if x0 is None:
            x0 = self.scales(queries).x0
        dist = torch.abs(queries[:, :, None] - self.training.data.T[None, :, :])
        # log(2 x0) is the same for every b and cancels on normalization
        logw = -(dist / x0[:, :, None]).sum(1) - torch.log(2 * x0).sum(1, keepdim=True)
        return logw - torch.logsumexp(logw, dim=-1, keepdim=True)

    def evaluate(self, queries):
        """
        Batched classification

        Parameters
        ----------
        queries : tensor
            Shape (Nqueries, Nfeatures)

        Returns
        -------
        list of QueryEvaluation
        """
        out = []
        for start in range(0, len(queries), self.batch_size):
            q = queries[start:start + self.batch_size]
            res = self.scales(q)
            logp = self.log_probabilities(q, x0=res.x0)
            prob = torch.exp(logp)
            scores = torch.zeros((len(q), len(self.class_names)), dtype=utils._float())
            scores.index_add_(1, self.training.y, prob)
            for i in range(len(q)):
                out.append(QueryEvaluation(logp[i], scores[i], self.class_names,
                                           res.x0[i], res.degenerate[i]))
            if not res.converged.all():
                logger.debug("scale search did not converge for {} query attributes".format(
                    int((~res.converged).sum())))
        return out


def transform_probability(model, query, b, scales):
    """
    P*(b|a): normalized transformation probability from
    query a to training instance b

    Parameters
    ----------
    model : KStarModel
    query : FeatureVector, dict or array_like
    b : int
        Training instance index
    scales : array_like
        Per-attribute x0 for this query

    Returns
    -------
    float
    """
    q = model.query_tensor(query)[None]
    x0 = torch.as_tensor(scales, dtype=utils._float()).reshape(1, -1)
    return float(torch.exp(model.log_probabilities(q, x0=x0)[0, b]))


def kstar_distance(model, query, b, scales):
    """
    K*(b|a) = -log2 P*(b|a) [bits], never negative

    Parameters
    ----------
    model : KStarModel
    query : FeatureVector, dict or array_like
    b : int
        Training instance index
    scales : array_like
        Per-attribute x0 for this query

    Returns
    -------
    float
    """
    q = model.query_tensor(query)[None]
    x0 = torch.as_tensor(scales, dtype=utils._float()).reshape(1, -1)
    logp = model.log_probabilities(q, x0=x0)[0, b]
    return max(float(-logp / LN2), 0.0)


def query_scales(model, query):
    """
    Per-attribute scales of one query

    Parameters
    ----------
    model : KStarModel
    query : FeatureVector, dict or array_like

    Returns
    -------
    tensor
        Shape (Nfeatures,)
    """
    return model.scales(model.query_tensor(query)[None]).x0[0]


def classify(model, query):
    """
    Classify one query: each class scores the summed
    P*(b|a) of its training instances

    Parameters
    ----------
    model : KStarModel
    query : FeatureVector, dict or array_like

    Returns
    -------
    QueryEvaluation
    """
    return model.evaluate(model.query_tensor(query)[None])[0]


def predict_dataset(model, test):
    """
    Classify every instance of a dataset, preserving order

    Parameters
    ----------
    model : KStarModel
    test : Dataset
        Must hold the model's features

    Returns
    -------
    list of (str, dict)
        (predicted class, class scores) per instance
    """
    if sorted(test.feature_names) != sorted(model.feature_names):
        raise utils.SchemaError("test features {} do not match model features {}".format(
            test.feature_names, model.feature_names))
    if len(test) == 0:
        return []
    queries = test.project(model.feature_names).data
    return [(ev.predicted, ev.class_scores) for ev in model.evaluate(queries)]
