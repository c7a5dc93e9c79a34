"""
Utility module
"""
import numpy as np
import torch
import logging
from datetime import datetime

# condition classes in confusion-matrix order
CONDITIONS = ('C1mis', 'C2mis', 'C3mis', 'C4mis', 'Normal')
UNLABELED = 'Unlabeled'
NORMAL = 'Normal'


def _float(numpy=False):
    """Working float type. All statistics are computed in double precision"""
    if numpy:
        return np.float64
    return torch.float64


def check_condition(condition, allow_unlabeled=True):
    """
    Validate a condition class name

    Parameters
    ----------
    condition : str
        One of CONDITIONS or UNLABELED
    allow_unlabeled : bool, optional
        If False, UNLABELED is rejected

    Returns
    -------
    str
    """
    valid = CONDITIONS + ((UNLABELED,) if allow_unlabeled else ())
    if condition not in valid:
        raise ValueError("condition {} not in {}".format(condition, valid))
    return condition


def cylinder_of(condition):
    """Misfiring cylinder number of a condition, or None for Normal"""
    check_condition(condition, allow_unlabeled=False)
    if condition == NORMAL:
        return None
    return int(condition[1])


def make_generator(seed):
    """
    Seeded cpu torch.Generator

    Parameters
    ----------
    seed : int
        Non-negative integer seed

    Returns
    -------
    torch.Generator
    """
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative, got {}".format(seed))
    gen = torch.Generator()
    gen.manual_seed(seed)
    return gen


######################################
############## Errors ################
######################################

class DataError(ValueError):
    """Malformed or inconsistent input data"""


class SignalParseError(DataError):
    """
    A signal file line that is not a real number

    Parameters
    ----------
    path : str
        Signal file path
    lineno : int
        1-based line number of the offending line
    line : str
        Offending line content
    """
    def __init__(self, path, lineno, line):
        self.path = path
        self.lineno = lineno
        self.line = line
        super().__init__("{}: line {}: could not parse {!r} as a real number".format(
            path, lineno, line))


class ConstantWindowError(DataError):
    """A window whose samples are all equal has no defined shape statistics"""


class SchemaError(DataError):
    """Feature names or class names do not match"""


######################################
############## Logging ###############
######################################

def log(message, verbose=False, style=1):
    """
    Log message at INFO level through the package logger

    Parameters
    ----------
    message : str

    verbose : bool, optional
        If True log, otherwise silence

    style : int, optional
        Style of message
    """
    if verbose:
        if style == 1:
            msg = "{}".format(message)
        elif style == 2:
            msg = "{}\n{}".format(message, '-'*30)
        else:
            msg = "\n{}\n{}\n{}".format('-'*30, message, '-'*30)
        logging.getLogger('kstarmis').info(msg)


def elapsed_time(start):
    """
    Get elapsed time in seconds or minutes

    Parameters
    ----------
    start : float
        Start time in seconds, i.e.
        datetime.now().timestamp()

    Returns
    -------
    str
    """
    t = datetime.now().timestamp() - start
    unit = 'sec'

    if t > 60000:
        t /= 3600
        unit = 'hrs'
    elif t > 1000:
        t /= 60
        unit = 'min'

    return "{:.3f} {}".format(t, unit)
