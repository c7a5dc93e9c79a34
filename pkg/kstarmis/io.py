"""
Module for generic input/output: yaml configs, json reports,
signal-directory manifests and feature-ranking files
"""
import numpy as np
import os
import json
import logging

from . import utils

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'


def load_yaml(yfile):
    """
    Load yaml dict

    Parameters
    ----------
    yfile : str

    Returns
    -------
    dict
    """
    import yaml
    with open(yfile) as f:
        out = yaml.load(f, Loader=yaml.FullLoader)

    return out


def write_json(fname, obj, overwrite=True):
    """
    Write a json-serializable object with sorted keys,
    so that repeated runs produce identical bytes

    Parameters
    ----------
    fname : str
        Output filepath
    obj : dict or list
    overwrite : bool, optional
        Overwrite output if it exists
    """
    if os.path.exists(fname) and not overwrite:
        logger.warning("{} exists, not overwriting".format(fname))
        return
    with open(fname, 'w') as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write('\n')


def read_json(fname):
    """
    Read a json file

    Parameters
    ----------
    fname : str

    Returns
    -------
    object
    """
    with open(fname) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as err:
            raise utils.DataError("{}: invalid json: {}".format(fname, err))


def write_manifest(outdir, entries):
    """
    Write a signal-directory manifest

    Parameters
    ----------
    outdir : str
        Signal directory
    entries : dict
        filename -> {'condition': str, 'seed': int, 'config': dict}
    """
    write_json(os.path.join(outdir, MANIFEST), entries)


def read_manifest(indir):
    """
    Read a signal-directory manifest

    Parameters
    ----------
    indir : str
        Signal directory holding manifest.json

    Returns
    -------
    dict
        filename -> entry dict, in sorted filename order
    """
    fname = os.path.join(indir, MANIFEST)
    if not os.path.exists(fname):
        raise utils.DataError("no {} found in {}".format(MANIFEST, indir))
    entries = read_json(fname)
    if not isinstance(entries, dict):
        raise utils.DataError("{}: expected a filename -> entry mapping".format(fname))
    for name, entry in entries.items():
        if 'condition' not in entry:
            raise utils.DataError("{}: entry {} has no condition".format(fname, name))
        utils.check_condition(entry['condition'])

    return {k: entries[k] for k in sorted(entries)}


def write_ranking(fname, ranking):
    """
    Write a feature ranking as a two-column csv

    Parameters
    ----------
    fname : str
    ranking : list of (str, float)
        Ordered (feature name, score in bits)
    """
    with open(fname, 'w') as f:
        f.write('feature,score_bits\n')
        for name, score in ranking:
            f.write('{},{!r}\n'.format(name, float(score)))


def read_ranking(fname):
    """
    Read a feature ranking written by write_ranking

    Parameters
    ----------
    fname : str

    Returns
    -------
    list of (str, float)
    """
    with open(fname) as f:
        lines = [l.strip() for l in f.read().splitlines()]
    if not lines or lines[0] != 'feature,score_bits':
        raise utils.DataError("{}: missing 'feature,score_bits' header".format(fname))
    ranking = []
    for i, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split(',')
        if len(parts) != 2:
            raise utils.DataError("{}: line {}: expected 2 columns".format(fname, i))
        try:
            ranking.append((parts[0], float(parts[1])))
        except ValueError:
            raise utils.DataError("{}: line {}: bad score {!r}".format(fname, i, parts[1]))

    return ranking


def format_real(x):
    """Decimal text of a real at 12 significant digits"""
    return '{:.12g}'.format(float(x))


def write_column(fname, values):
    """
    Write a headerless single-column text file, one value per line

    Parameters
    ----------
    fname : str
    values : array_like
    """
    values = np.asarray(values, dtype=utils._float(numpy=True))
    np.savetxt(fname, values, fmt='%.12g', newline='\n')
