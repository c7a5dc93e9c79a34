import numpy as np
import os
import pytest

import torch
torch.set_default_dtype(torch.float64)

import kstarmis as km
from kstarmis.data import FIXTURE_PATH


def setup_reference():
	return km.evaluation.read_confusion(os.path.join(FIXTURE_PATH, 'reference_confusion.txt'))


def setup_separated(Nper=20, Nfeatures=1, seed=0, classes=('C1mis', 'C2mis', 'Normal')):
	"""classes sit 100 apart on every feature with a within-class spread of ~0.01"""
	gen = km.utils.make_generator(seed)
	labels = [c for c in classes for i in range(Nper)]
	centers = 100. * torch.arange(len(classes), dtype=torch.float64).repeat_interleave(Nper)
	data = centers[:, None] + 0.01 * torch.randn(len(labels), Nfeatures, generator=gen)
	names = list(km.FEATURE_NAMES[:Nfeatures])
	return km.Dataset(data, labels, names)


def test_reference_confusion():
	cm = setup_reference()
	assert cm.class_names == list(km.CONDITIONS)
	assert cm.total == 500
	assert cm.row_sums.tolist() == [100] * 5
	assert np.isclose(km.evaluation.accuracy(cm), 82.6)

	recall = km.evaluation.per_class_recall(cm)
	assert recall == {'C1mis': 83, 'C2mis': 100, 'C3mis': 55, 'C4mis': 75, 'Normal': 100}

	col = km.evaluation.fault_vs_normal_collapse(cm)
	assert col.class_names == ['Fault', 'Normal']
	assert col.counts.tolist() == [[400, 0], [0, 100]]
	assert km.evaluation.accuracy(col) == 100
	assert col.total == cm.total

	prec = km.evaluation.per_class_precision(cm)
	assert np.isclose(prec['C1mis'], 100 * 83 / 89)
	assert prec['Normal'] == 100


def test_metrics():
	names = ['a', 'b', 'c']
	cm = km.ConfusionMatrix(names, 7 * torch.eye(3, dtype=torch.long))
	assert km.evaluation.accuracy(cm) == 100
	assert set(km.evaluation.per_class_recall(cm).values()) == {100}

	cm = km.ConfusionMatrix(names, 3 * (1 - torch.eye(3, dtype=torch.long)))
	assert km.evaluation.accuracy(cm) == 0

	cm = km.ConfusionMatrix(['a', 'b'], [[50, 50], [50, 50]])
	assert km.evaluation.per_class_recall(cm) == {'a': 50, 'b': 50}

	# a diagonal matrix collapses to a diagonal matrix
	cm = km.ConfusionMatrix(['a', 'Normal', 'b'], torch.diag(torch.tensor([4, 5, 6])))
	col = km.evaluation.fault_vs_normal_collapse(cm)
	assert col.counts.tolist() == [[10, 0], [0, 5]]

	# one fault predicted normal
	cm.counts[0, 1] = 1
	assert km.evaluation.accuracy(km.evaluation.fault_vs_normal_collapse(cm)) < 100

	# accuracy is the row-weighted mean recall
	gen = km.utils.make_generator(0)
	for i in range(5):
		cm = km.ConfusionMatrix(names, torch.randint(1, 50, (3, 3), generator=gen))
		recall = km.evaluation.per_class_recall(cm)
		rows = cm.row_sums.tolist()
		weighted = sum(recall[c] * r for c, r in zip(names, rows)) / sum(rows)
		assert np.isclose(km.evaluation.accuracy(cm), weighted)

	# untested class never predicted
	cm = km.ConfusionMatrix(names, [[1, 0, 0], [1, 0, 0], [0, 0, 2]])
	assert km.evaluation.per_class_precision(cm)['b'] is None

	with pytest.raises(ValueError):
		km.evaluation.accuracy(km.ConfusionMatrix(names))
	with pytest.raises(km.utils.DataError):
		km.evaluation.per_class_recall(km.ConfusionMatrix(names, [[1, 0, 0], [0, 0, 0], [0, 0, 1]]))
	with pytest.raises(ValueError):
		km.evaluation.fault_vs_normal_collapse(km.ConfusionMatrix(names))
	with pytest.raises(km.utils.DataError):
		km.ConfusionMatrix(['a', 'b'], [[1, -1], [0, 1]])
	with pytest.raises(km.utils.DataError):
		km.ConfusionMatrix(['a', 'b'], [[1, 0, 0], [0, 1, 0]])


def test_confusion_io(tmp_path):
	cm = setup_reference()
	text = cm.render()
	lines = text.splitlines()
	assert lines[0].split() == ['TESTING'] + list(km.CONDITIONS)
	assert lines[3].split() == ['C3mis', '3', '0', '55', '42', '0']

	fname = str(tmp_path / 'cm.txt')
	with open(fname, 'w') as f:
		f.write(text)
	assert km.evaluation.read_confusion(fname) == cm

	fname = str(tmp_path / 'report.json')
	km.io.write_json(fname, km.evaluation.evaluation_report(cm))
	assert km.evaluation.read_confusion(fname) == cm

	with open(fname, 'w') as f:
		f.write("TESTING a b\na 1 x\nb 0 1\n")
	with pytest.raises(km.utils.DataError):
		km.evaluation.read_confusion(fname)


def test_report():
	cm = setup_reference()
	report = km.evaluation.evaluation_report(cm, features=['kurtosis', 'mean'])
	assert np.isclose(report['accuracy'], 82.6)
	assert report['collapse']['counts'] == [[400, 0], [0, 100]]
	assert report['collapse_accuracy'] == 100
	assert report['features'] == ['kurtosis', 'mean']

	text = km.evaluation.render_report(report)
	assert 'accuracy (%): 82.6' in text
	assert 'fault/normal accuracy (%): 100.0' in text
	assert 'C3mis 55.0' in text

	# no normal class, no collapse
	cm = km.ConfusionMatrix(['a', 'b'], [[1, 0], [0, 1]])
	assert 'collapse' not in km.evaluation.evaluation_report(cm)


def test_cross_validate():
	d = setup_separated()
	cm = km.evaluation.cross_validate(d, k=5, seed=0)
	assert km.evaluation.accuracy(cm) == 100
	assert cm.total == len(d)
	assert cm.row_sums.tolist() == list(d.class_counts().values())

	cm2 = km.evaluation.cross_validate(d, k=5, seed=0)
	assert cm2 == cm

	cm = km.evaluation.cross_validate(d, resubstitution=True, blend=0)
	assert km.evaluation.accuracy(cm) == 100

	with pytest.raises(ValueError):
		km.evaluation.cross_validate(d, k=21)


def test_feature_sweep():
	# single feature
	d = setup_separated(Nper=10)
	ranking = km.dtree.rank_features(km.dtree.build_tree(d), d)
	sweep = km.evaluation.feature_sweep(d, ranking, k=5)
	assert len(sweep) == 1
	assert sweep.rows[0][0] == 1

	d = setup_separated(Nper=10, Nfeatures=3)
	ranking = km.dtree.rank_features(km.dtree.build_tree(d), d)
	sweep = km.evaluation.feature_sweep(d, ranking, k=5, seed=1)
	assert [m for m, _, _ in sweep.rows] == [1, 2, 3]
	assert sweep.accuracies == [100, 100, 100]
	assert sweep.rows[-1][2] == ranking.names
	assert sweep.best() == sweep.rows[0]

	text = sweep.render()
	assert text.splitlines()[1].split() == ['1', '100.0']
	assert sweep.to_dict()[1]['features'] == ranking.top(2)

	with pytest.raises(km.utils.SchemaError):
		km.evaluation.feature_sweep(d.project(['mean']), ranking)


def test_sweep_result():
	sweep = km.SweepResult([(1, 70., ['a']), (2, 82.2, ['a', 'b']), (3, 82.2, ['a', 'b', 'c'])])
	assert sweep.best() == (2, 82.2, ['a', 'b'])

	with pytest.raises(ValueError):
		km.SweepResult([(2, 1., ['a', 'b']), (1, 1., ['a'])])
	with pytest.raises(ValueError):
		km.SweepResult([(1, 1., ['a']), (2, 1., ['b', 'c'])])


def test_simulated_pipeline():
	config = km.EngineSimConfig(seed=1000)
	wins = []
	for _, sig, _ in km.ingest.synth_dataset(config, n_per_condition=50):
		wins.extend(km.ingest.window_signal(sig))
	d = km.features.extract_dataset(wins)
	assert list(d.class_counts().values()) == [50] * 5

	ranking = km.dtree.rank_features(km.dtree.build_tree(d), d)
	sweep = km.evaluation.feature_sweep(d, ranking, k=10, seed=0)
	assert len(sweep) == 13
	m, acc, keep = sweep.best()
	assert acc >= 95

	cm = km.evaluation.cross_validate(d.project(keep), k=10, seed=0)
	assert km.evaluation.accuracy(cm) == acc
	col = km.evaluation.fault_vs_normal_collapse(cm)
	assert km.evaluation.accuracy(col) >= 99
