"""
Initialization
"""
from . import utils
from . import io
from . import ingest
from . import features
from . import dataset
from . import dtree
from . import kstar
from . import evaluation
from . import cli

from .ingest import RawSignal, SignalWindow, EngineSimConfig
from .features import FeatureVector, FEATURE_NAMES
from .dataset import Dataset, FoldAssignment
from .dtree import FeatureRanking
from .kstar import KStarModel
from .evaluation import ConfusionMatrix, SweepResult
from .utils import CONDITIONS, _float

from .version import __version__
