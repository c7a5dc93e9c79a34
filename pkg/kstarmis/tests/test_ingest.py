import numpy as np
import pytest

import torch
torch.set_default_dtype(torch.float64)

import kstarmis as km
from kstarmis.data import CONFIG_PATH


def setup_EngineSimConfig(**kwargs):
	params = dict(noise_sigma=0.0, cylinder_gain=(1., 1., 1., 1.), seed=0)
	params.update(kwargs)
	return km.EngineSimConfig(**params)


def segment_stats(sig, config, cylinder):
	"""peak and rms of every complete firing segment of one cylinder"""
	interval = int(round(config.firing_interval_s * config.sample_rate_hz))
	peaks, sq = [], []
	for idx, cyl in km.ingest.burst_schedule(config):
		if cyl == cylinder and idx + interval <= len(sig):
			seg = sig.samples[idx:idx + interval]
			peaks.append(float(seg.abs().max()))
			sq.append(seg**2)
	return np.array(peaks), float(torch.sqrt(torch.cat(sq).mean()))


def test_load_signal(tmp_path):
	fname = str(tmp_path / 'sig.txt')
	with open(fname, 'w') as f:
		f.write("1.0\n-2.5\n0.0")
	sig = km.ingest.load_signal(fname, condition='Normal')
	assert len(sig) == 3
	assert sig.samples.tolist() == [1.0, -2.5, 0.0]
	assert sig.condition == 'Normal'
	assert sig.source_id == 'sig.txt'

	# bad line
	with open(fname, 'w') as f:
		f.write("1.0\nabc\n0.0\n")
	with pytest.raises(km.utils.SignalParseError) as err:
		km.ingest.load_signal(fname)
	assert err.value.lineno == 2
	assert 'line 2' in str(err.value)

	# non-finite
	with open(fname, 'w') as f:
		f.write("1.0\n2.0\nnan\n")
	with pytest.raises(km.utils.SignalParseError):
		km.ingest.load_signal(fname)

	# empty
	with open(fname, 'w') as f:
		f.write("")
	with pytest.raises(km.utils.DataError):
		km.ingest.load_signal(fname)

	# unknown condition
	with open(fname, 'w') as f:
		f.write("1.0\n")
	with pytest.raises(ValueError):
		km.ingest.load_signal(fname, condition='C5mis')


def test_write_signal(tmp_path):
	fname = str(tmp_path / 'sig.txt')
	gen = km.utils.make_generator(1)
	sig = km.RawSignal(torch.randn(8192, generator=gen), condition='C3mis')
	km.ingest.write_signal(sig, fname)
	sig2 = km.ingest.load_signal(fname, condition='C3mis')
	assert len(sig2) == 8192
	assert torch.allclose(sig.samples, sig2.samples, rtol=1e-11, atol=1e-14)


def test_window_signal():
	sig = km.RawSignal(torch.randn(8192))
	wins = km.ingest.window_signal(sig, window_len=8192, hop=8192)
	assert len(wins) == 1
	assert wins[0].length == 8192

	sig = km.RawSignal(torch.randn(8191))
	assert km.ingest.window_signal(sig, window_len=8192) == []

	sig = km.RawSignal(torch.randn(20000), condition='C1mis', source_id='a')
	wins = km.ingest.window_signal(sig, window_len=8192, hop=4096)
	assert [w.offset for w in wins] == [0, 4096, 8192]
	for w in wins:
		assert len(w) == 8192
		assert w.condition == 'C1mis'
		assert w.source_id == 'a'
		assert torch.equal(w.samples, sig.samples[w.offset:w.offset + 8192])

	# default hop is non-overlapping
	wins = km.ingest.window_signal(sig, window_len=8192)
	assert [w.offset for w in wins] == [0, 8192]

	with pytest.raises(ValueError):
		km.ingest.window_signal(sig, window_len=1)
	with pytest.raises(ValueError):
		km.ingest.window_signal(sig, window_len=8192, hop=0)


def test_engine_sim_config():
	# packaged defaults
	config = km.EngineSimConfig()
	assert config.rpm == 1500
	assert config.sample_rate_hz == 24000
	assert config.n_samples == 8192
	assert np.isclose(config.firing_interval_s * config.sample_rate_hz, 480)
	assert np.isclose(config.cycle_samples, 1920)

	config = km.EngineSimConfig.from_yaml(CONFIG_PATH + '/engine_sim.yaml', rpm=3000)
	assert config.rpm == 3000
	assert np.isclose(config.cycle_samples, 960)

	config2 = config.update(seed=5)
	assert config2.seed == 5 and config.seed != 5
	assert config2.to_dict()['rpm'] == 3000

	with pytest.raises(ValueError):
		km.EngineSimConfig(misfire_attenuation=1.0)
	with pytest.raises(ValueError):
		km.EngineSimConfig(rpm=0)
	with pytest.raises(ValueError):
		km.EngineSimConfig(cylinder_gain=(1., 1., 1.))
	with pytest.raises(ValueError):
		km.EngineSimConfig(firing_order=(1, 2, 3, 4))


def test_burst_schedule():
	config = setup_EngineSimConfig()
	sched = km.ingest.burst_schedule(config)
	# 8192 samples at 480 per firing
	assert len(sched) == 18
	assert [c for _, c in sched[:8]] == [1, 3, 4, 2, 1, 3, 4, 2]
	assert [i for i, _ in sched[:3]] == [0, 480, 960]

	# firing interval off the sample grid
	config = setup_EngineSimConfig(rpm=1700.)
	fs = config.sample_rate_hz
	sched = km.ingest.burst_schedule(config, times=True)
	assert [(i, c) for i, c, _ in sched] == km.ingest.burst_schedule(config)
	assert np.allclose(np.diff([t0 for _, _, t0 in sched]), config.firing_interval_s)
	for idx, _, t0 in sched:
		assert (idx - 1) / fs < t0 <= idx / fs + 1e-12

	# each cylinder's bursts start exactly at its scheduled onsets
	full = km.ingest.synth_engine_signal(config, 'Normal').samples
	for cyl in [1, 3, 4, 2]:
		dead = km.ingest.synth_engine_signal(config.update(misfire_attenuation=0.),
											 'C{}mis'.format(cyl)).samples
		diff = full - dead
		onsets = [idx for idx, c, _ in sched if c == cyl]
		assert (diff[:onsets[0]] == 0).all()
		for idx in onsets:
			if idx + 1 < len(full):
				assert diff[idx + 1] > 0


def test_synth_normal_peaks():
	config = setup_EngineSimConfig()
	sig = km.ingest.synth_engine_signal(config, 'Normal')
	assert len(sig) == 8192
	assert sig.condition == 'Normal'
	peaks = [segment_stats(sig, config, c)[0] for c in [1, 2, 3, 4]]
	allpeaks = np.concatenate(peaks)
	assert np.allclose(allpeaks, allpeaks[0], rtol=1e-3)


def test_synth_misfire_rms():
	config = setup_EngineSimConfig(misfire_attenuation=0.1)
	sig = km.ingest.synth_engine_signal(config, 'C2mis')
	_, rms1 = segment_stats(sig, config, 1)
	_, rms2 = segment_stats(sig, config, 2)
	assert np.isclose(rms2, 0.1 * rms1, rtol=2e-3)

	# non-uniform gains scale the ratio
	config = setup_EngineSimConfig(misfire_attenuation=0.1, cylinder_gain=(0.8, 0.4, 1., 1.))
	sig = km.ingest.synth_engine_signal(config, 'C2mis')
	_, rms1 = segment_stats(sig, config, 1)
	_, rms2 = segment_stats(sig, config, 2)
	assert np.isclose(rms2, 0.1 * 0.4 / 0.8 * rms1, rtol=5e-3)

	# a dead cylinder only carries the tail of the previous burst
	config = setup_EngineSimConfig(misfire_attenuation=0.0)
	sig = km.ingest.synth_engine_signal(config, 'C1mis')
	peaks, _ = segment_stats(sig, config, 1)
	assert peaks.max() < 1e-4


def test_synth_determinism():
	config = km.EngineSimConfig(seed=3)
	s1 = km.ingest.synth_engine_signal(config, 'C4mis')
	s2 = km.ingest.synth_engine_signal(config, 'C4mis')
	assert torch.equal(s1.samples, s2.samples)

	s3 = km.ingest.synth_engine_signal(config.update(seed=4), 'C4mis')
	assert not torch.equal(s1.samples, s3.samples)

	with pytest.raises(ValueError):
		km.ingest.synth_engine_signal(config, 'Unlabeled')


def test_synth_dataset():
	config = km.EngineSimConfig(n_samples=1024, seed=10)
	out = km.ingest.synth_dataset(config, conditions=('C1mis', 'Normal'), n_per_condition=3)
	assert [o[0] for o in out] == ['C1mis_0', 'C1mis_1', 'C1mis_2',
								   'Normal_0', 'Normal_1', 'Normal_2']
	assert [o[2] for o in out] == [10, 11, 12, 13, 14, 15]
	for source_id, sig, seed in out:
		ref = km.ingest.synth_engine_signal(config.update(seed=seed), sig.condition)
		assert torch.equal(sig.samples, ref.samples)

	with pytest.raises(ValueError):
		km.ingest.synth_dataset(config, n_per_condition=0)
