"""
Module for loading, windowing and simulating engine acceleration signals
"""
import numpy as np
import torch
import os
import logging
from functools import lru_cache

from . import utils, io
from .data import CONFIG_PATH

logger = logging.getLogger(__name__)

# inline-four firing order, cylinder numbers 1..4
FIRING_ORDER = (1, 3, 4, 2)


class RawSignal:
    """
    A labeled acceleration time series
    """
    def __init__(self, samples, sample_rate_hz=24000., condition=utils.UNLABELED,
                 source_id=''):
        """
        Parameters
        ----------
        samples : array_like
            1D real acceleration samples (arbitrary units)
        sample_rate_hz : float, optional
            Sampling frequency [Hz]
        condition : str, optional
            One of utils.CONDITIONS or utils.UNLABELED
        source_id : str, optional
            Name of the file or simulation the samples came from
        """
        self.samples = torch.as_tensor(samples, dtype=utils._float()).flatten()
        self.sample_rate_hz = float(sample_rate_hz)
        self.condition = condition
        self.source_id = source_id
        self.check()

    def __len__(self):
        return len(self.samples)

    def check(self):
        """Check invariants"""
        if len(self.samples) == 0:
            raise utils.DataError("signal {} has no samples".format(self.source_id))
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive, got {}".format(self.sample_rate_hz))
        utils.check_condition(self.condition)


class SignalWindow:
    """
    A fixed-length contiguous segment of a RawSignal
    """
    def __init__(self, samples, condition=utils.UNLABELED, offset=0, source_id=''):
        """
        Parameters
        ----------
        samples : tensor
            1D window samples
        condition : str, optional
            Condition inherited from the parent signal
        offset : int, optional
            Start index within the parent signal
        source_id : str, optional
            Parent signal source_id
        """
        self.samples = torch.as_tensor(samples, dtype=utils._float()).flatten()
        self.condition = utils.check_condition(condition)
        self.offset = offset
        self.source_id = source_id

    @property
    def length(self):
        return len(self.samples)

    def __len__(self):
        return self.length


def load_signal(path, condition=utils.UNLABELED, sample_rate_hz=24000.):
    """
    Load a headerless one-column signal file

    Parameters
    ----------
    path : str
        Filepath, one real number per line
    condition : str, optional
        Condition class of the recording
    sample_rate_hz : float, optional
        Sampling frequency [Hz]

    Returns
    -------
    RawSignal
    """
    with open(path) as f:
        lines = f.read().splitlines()

    samples = np.empty(len(lines), dtype=utils._float(numpy=True))
    for i, line in enumerate(lines):
        try:
            samples[i] = float(line)
        except ValueError:
            raise utils.SignalParseError(path, i + 1, line)
        if not np.isfinite(samples[i]):
            raise utils.SignalParseError(path, i + 1, line)

    if len(samples) == 0:
        raise utils.DataError("{}: empty signal file".format(path))

    return RawSignal(samples, sample_rate_hz=sample_rate_hz, condition=condition,
                     source_id=os.path.basename(path))


def write_signal(signal, path):
    """
    Write a RawSignal in the one-column text format

    Parameters
    ----------
    signal : RawSignal
    path : str
    """
    io.write_column(path, signal.samples.numpy())


def window_signal(signal, window_len=8192, hop=None):
    """
    Cut a signal into fixed-length windows. Trailing
    partial windows are dropped, never padded.

    Parameters
    ----------
    signal : RawSignal
    window_len : int, optional
        Window length in samples, >= 2
    hop : int, optional
        Offset between window starts, >= 1.
        Default is window_len (no overlap).

    Returns
    -------
    list of SignalWindow
    """
    hop = window_len if hop is None else hop
    if window_len < 2:
        raise ValueError("window_len must be >= 2, got {}".format(window_len))
    if hop < 1:
        raise ValueError("hop must be >= 1, got {}".format(hop))

    n = len(signal)
    if n < window_len:
        return []
    Nwin = (n - window_len) // hop + 1

    return [SignalWindow(signal.samples[i * hop:i * hop + window_len],
                         condition=signal.condition, offset=i * hop,
                         source_id=signal.source_id)
            for i in range(Nwin)]


@lru_cache()
def _default_params():
    return io.load_yaml(os.path.join(CONFIG_PATH, 'engine_sim.yaml'))


class EngineSimConfig:
    """
    Parameters of the four-cylinder engine vibration simulator.
    Defaults are read from data/configs/engine_sim.yaml.

    Parameters
    ----------
    rpm : float
        Crankshaft speed [rev / min]
    sample_rate_hz : float
        Sampling frequency [Hz]
    n_samples : int
        Number of samples to generate
    burst_amplitude : float
        Peak envelope of a combustion burst
    burst_decay_s : float
        Exponential decay time of a burst [sec]
    burst_freq_hz : float
        Ringing frequency of a burst [Hz]
    misfire_attenuation : float
        Amplitude multiplier in [0, 1) applied to the
        bursts of a misfiring cylinder
    cylinder_gain : tuple of float
        Sensor transfer gain of cylinders 1..4
    noise_sigma : float
        Standard deviation of additive Gaussian noise
    seed : int
        Noise seed
    """
    keys = ('rpm', 'sample_rate_hz', 'n_samples', 'burst_amplitude', 'burst_decay_s',
            'burst_freq_hz', 'misfire_attenuation', 'cylinder_gain', 'noise_sigma', 'seed')

    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(self.keys)
        if unknown:
            raise ValueError("unknown EngineSimConfig keys {}".format(sorted(unknown)))
        params = dict(_default_params())
        params.update(kwargs)
        self.rpm = float(params['rpm'])
        self.sample_rate_hz = float(params['sample_rate_hz'])
        self.n_samples = int(params['n_samples'])
        self.burst_amplitude = float(params['burst_amplitude'])
        self.burst_decay_s = float(params['burst_decay_s'])
        self.burst_freq_hz = float(params['burst_freq_hz'])
        self.misfire_attenuation = float(params['misfire_attenuation'])
        self.cylinder_gain = tuple(float(g) for g in params['cylinder_gain'])
        self.noise_sigma = float(params['noise_sigma'])
        self.seed = int(params['seed'])
        self.check()

    @classmethod
    def from_yaml(cls, path=None, **overrides):
        """
        Build a config from a yaml file

        Parameters
        ----------
        path : str, optional
            yaml filepath. Default is the packaged engine_sim.yaml
        overrides : dict
            Keys that take precedence over the file

        Returns
        -------
        EngineSimConfig
        """
        params = {} if path is None else dict(io.load_yaml(path))
        params.update(overrides)
        return cls(**params)

    def check(self):
        """Check invariants"""
        for key in ['rpm', 'sample_rate_hz', 'n_samples', 'burst_decay_s']:
            if not getattr(self, key) > 0:
                raise ValueError("{} must be positive, got {}".format(key, getattr(self, key)))
        if not 0 <= self.misfire_attenuation < 1:
            raise ValueError("misfire_attenuation must be in [0, 1), got {}".format(
                self.misfire_attenuation))
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0, got {}".format(self.noise_sigma))
        if len(self.cylinder_gain) != len(FIRING_ORDER) or min(self.cylinder_gain) <= 0:
            raise ValueError("cylinder_gain must hold 4 positive gains, got {}".format(
                self.cylinder_gain))
        if self.seed < 0:
            raise ValueError("seed must be non-negative, got {}".format(self.seed))

    def update(self, **kwargs):
        """Return a copy with kwargs replaced"""
        params = self.to_dict()
        params.update(kwargs)
        return EngineSimConfig(**params)

    def to_dict(self):
        """json-friendly parameter echo"""
        d = {k: getattr(self, k) for k in self.keys}
        d['cylinder_gain'] = list(self.cylinder_gain)
        return d

    @property
    def firing_interval_s(self):
        """Time between consecutive firings: four strokes span two revolutions"""
        return 60.0 / (self.rpm * 2)

    @property
    def cycle_samples(self):
        """Samples per engine cycle (all four cylinders fire once)"""
        return len(FIRING_ORDER) * self.firing_interval_s * self.sample_rate_hz


def burst_schedule(config, times=False):
    """
    Firing timetable of the simulator

    Parameters
    ----------
    config : EngineSimConfig
    times : bool, optional
        If True, also return each firing's exact onset time

    Returns
    -------
    list of (int, int) or (int, int, float)
        (onset sample index, cylinder number[, onset time in sec])
        for every firing that starts inside the signal
    """
    onsets = []
    k = 0
    while True:
        t0 = k * config.firing_interval_s
        # first sample at or after t0
        idx = int(np.ceil(t0 * config.sample_rate_hz - 1e-9))
        if idx >= config.n_samples:
            break
        cyl = FIRING_ORDER[k % len(FIRING_ORDER)]
        onsets.append((idx, cyl, t0) if times else (idx, cyl))
        k += 1

    return onsets


def synth_engine_signal(config, condition):
    """
    Simulate an engine-head acceleration signal. Each firing
    adds an exponentially damped sinusoid; the bursts of a
    misfiring cylinder are scaled by misfire_attenuation, and
    Gaussian noise is added to every sample.

    Parameters
    ----------
    config : EngineSimConfig
    condition : str
        One of utils.CONDITIONS

    Returns
    -------
    RawSignal
    """
    config.check()
    misfire = utils.cylinder_of(condition)
    fs = config.sample_rate_hz
    t = torch.arange(config.n_samples, dtype=utils._float()) / fs
    samples = torch.zeros(config.n_samples, dtype=utils._float())

    for idx, cyl, t0 in burst_schedule(config, times=True):
        amp = config.burst_amplitude * config.cylinder_gain[cyl - 1]
        if cyl == misfire:
            amp *= config.misfire_attenuation
        tau = (t[idx:] - t0).clamp(min=0)
        samples[idx:] += amp * torch.exp(-tau / config.burst_decay_s) \
            * torch.sin(2 * np.pi * config.burst_freq_hz * tau)

    if config.noise_sigma > 0:
        gen = utils.make_generator(config.seed)
        samples += config.noise_sigma * torch.randn(config.n_samples, generator=gen,
                                                    dtype=utils._float())

    return RawSignal(samples, sample_rate_hz=fs, condition=condition,
                     source_id='sim_{}_{}'.format(condition, config.seed))


def synth_dataset(config, conditions=utils.CONDITIONS, n_per_condition=100, seed=None):
    """
    Simulate n_per_condition signals for each condition.
    Signal i (counting across conditions in order) is
    generated with seed + i.

    Parameters
    ----------
    config : EngineSimConfig
    conditions : tuple of str, optional
    n_per_condition : int, optional
    seed : int, optional
        Base seed, default config.seed

    Returns
    -------
    list of (str, RawSignal, int)
        (source id '<condition>_<index>', signal, seed used)
    """
    seed = config.seed if seed is None else int(seed)
    if n_per_condition < 1:
        raise ValueError("n_per_condition must be >= 1, got {}".format(n_per_condition))
    out = []
    i = 0
    for cond in conditions:
        for j in range(n_per_condition):
            sig = synth_engine_signal(config.update(seed=seed + i), cond)
            sig.source_id = '{}_{}'.format(cond, j)
            out.append((sig.source_id, sig, seed + i))
            i += 1
    logger.debug("simulated {} signals from seed {}".format(len(out), seed))

    return out
