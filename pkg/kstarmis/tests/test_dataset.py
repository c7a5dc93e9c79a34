import numpy as np
import pytest

import torch
torch.set_default_dtype(torch.float64)

import kstarmis as km

# the eight features kept after tree selection
SELECTED = ['sample_variance', 'standard_error', 'kurtosis', 'minimum', 'mean',
			'standard_deviation', 'skewness', 'range']


def setup_Dataset(Nper=100, seed=0, classes=km.CONDITIONS, feature_names=km.FEATURE_NAMES):
	gen = km.utils.make_generator(seed)
	labels = [c for c in classes for i in range(Nper)]
	data = torch.randn(len(labels), len(feature_names), generator=gen)
	return km.Dataset(data, labels, feature_names)


def test_dataset():
	d = setup_Dataset(Nper=3)
	assert len(d) == 15
	assert d.Nfeatures == 13
	assert d.Nclasses == 5
	assert d.class_names == list(km.CONDITIONS)
	assert d.labels[:4] == ['C1mis'] * 3 + ['C2mis']
	assert d.class_counts() == {c: 3 for c in km.CONDITIONS}
	assert torch.equal(d.column('mean'), d.data[:, 0])

	# non-condition labels sort
	d = km.Dataset([[0.], [1.]], ['b', 'a'], ['x'])
	assert d.class_names == ['a', 'b']
	assert d.labels == ['b', 'a']

	with pytest.raises(km.utils.SchemaError):
		km.Dataset([[0., 1.]], ['a'], ['x', 'x'])
	with pytest.raises(km.utils.SchemaError):
		km.Dataset([[0.]], ['c'], ['x'], class_names=['a', 'b'])
	with pytest.raises(km.utils.DataError):
		km.Dataset([[np.inf]], ['a'], ['x'])
	with pytest.raises(km.utils.SchemaError):
		d.column('kurtosis')


def test_select_project():
	d = setup_Dataset(Nper=4)
	s = d.select([3, 0, 19])
	assert s.labels == ['C1mis', 'C1mis', 'Normal']
	assert s.class_names == d.class_names
	assert torch.equal(s.data[1], d.data[0])

	# all features -> identical
	assert d.project(list(d.feature_names)) == d

	p = d.project(SELECTED)
	assert p.feature_names == SELECTED
	assert p.data.shape == (20, 8)
	assert p.labels == d.labels
	assert torch.equal(p.column('kurtosis'), d.column('kurtosis'))

	p = d.project(['mean'])
	assert p.data.shape == (20, 1)

	with pytest.raises(ValueError):
		d.project([])
	with pytest.raises(km.utils.SchemaError):
		d.project(['mean', 'energy'])


def test_csv_roundtrip(tmp_path):
	d = setup_Dataset(Nper=1)
	fname = str(tmp_path / 'd.csv')
	km.dataset.write_dataset(d, fname)
	with open(fname) as f:
		header = f.readline().strip()
	assert header == ','.join(list(km.FEATURE_NAMES) + ['label'])

	d2 = km.dataset.read_dataset(fname)
	assert len(d2) == 5
	assert d2.allclose(d)

	# closed label set
	with pytest.raises(km.utils.DataError):
		km.dataset.read_dataset(fname, class_names=['C1mis', 'Normal'])


def test_hdf5_roundtrip(tmp_path):
	d = setup_Dataset(Nper=1)
	fname = str(tmp_path / 'd.h5')
	km.dataset.write_dataset(d, fname)
	d2 = km.dataset.read_dataset(fname)
	assert d2 == d

	# no overwrite by default
	km.Dataset.write_hdf5(d.project(['mean']), fname)
	assert km.dataset.read_dataset(fname) == d


def test_read_errors(tmp_path):
	names = list(km.FEATURE_NAMES)
	fname = str(tmp_path / 'bad.csv')
	good = ','.join(['1.0'] * 13 + ['Normal'])
	short = ','.join(['1.0'] * 12 + ['Normal'])
	with open(fname, 'w') as f:
		f.write(','.join(names + ['label']) + '\n')
		f.write(good + '\n')
		f.write(short + '\n')
	with pytest.raises(km.utils.DataError) as err:
		km.dataset.read_dataset(fname)
	assert 'line 3' in str(err.value)

	with open(fname, 'w') as f:
		f.write(','.join(names + ['label']) + '\n')
		f.write(good.replace('1.0', 'x', 1) + '\n')
	with pytest.raises(km.utils.DataError) as err:
		km.dataset.read_dataset(fname)
	assert 'line 2' in str(err.value)

	with open(fname, 'w') as f:
		f.write(','.join(names) + '\n')
	with pytest.raises(km.utils.DataError):
		km.dataset.read_dataset(fname)


def test_class_counts_500(tmp_path):
	d = setup_Dataset(Nper=100)
	fname = str(tmp_path / 'd.csv')
	km.dataset.write_dataset(d, fname)
	d2 = km.dataset.read_dataset(fname, class_names=list(km.CONDITIONS))
	assert len(d2) == 500
	assert list(d2.class_counts().values()) == [100] * 5


def test_stratified_folds():
	d = setup_Dataset(Nper=100)
	folds = km.dataset.stratified_folds(d, k=10, seed=0)
	assert len(folds) == 500
	assert folds.fold_sizes().tolist() == [50] * 10
	for f in range(10):
		train, test = folds.split(f)
		assert len(train) + len(test) == 500
		assert set(train.tolist()).isdisjoint(test.tolist())
		assert list(d.select(test).class_counts().values()) == [10] * 5

	# determinism
	folds2 = km.dataset.stratified_folds(d, k=10, seed=0)
	assert torch.equal(folds.assignment, folds2.assignment)
	folds3 = km.dataset.stratified_folds(d, k=10, seed=1)
	assert not torch.equal(folds.assignment, folds3.assignment)

	# folds depend only on labels and order, not on the features kept
	for keep in [['kurtosis'], SELECTED, ['range', 'mean']]:
		folds_p = km.dataset.stratified_folds(d.project(keep), k=10, seed=0)
		assert torch.equal(folds.assignment, folds_p.assignment)

	# uneven classes differ by at most one per fold
	d = setup_Dataset(Nper=7, classes=['a', 'b'])
	folds = km.dataset.stratified_folds(d, k=3)
	for c in range(2):
		sizes = torch.bincount(folds.assignment[d.y == c], minlength=3)
		assert sizes.max() - sizes.min() <= 1

	# too few instances
	d = km.Dataset([[0.], [1.], [2.]], ['a', 'a', 'b'], ['x'])
	with pytest.raises(ValueError):
		km.dataset.stratified_folds(d, k=2)
	with pytest.raises(ValueError):
		km.dataset.stratified_folds(setup_Dataset(Nper=5), k=1)
	with pytest.raises(ValueError):
		folds.split(3)
