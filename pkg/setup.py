from setuptools import setup
import os
import ast

here = os.path.dirname(os.path.abspath(__file__))

# __version__ lives in kstarmis/version.py
with open(os.path.join(here, 'kstarmis', 'version.py')) as f:
    version = next(ast.literal_eval(l.split('=')[1].strip())
                   for l in f if l.startswith('__version__'))


def data_files(package, subdir):
    """paths under package/subdir relative to package, for package_data"""
    root = os.path.join(here, package)
    return [os.path.relpath(os.path.join(path, fname), root)
            for path, _, fnames in os.walk(os.path.join(root, subdir))
            for fname in fnames if not fname.endswith('.pyc')]


setup(
    version         = version,
    license         = 'MIT',
    package_data    = {'kstarmis': data_files('kstarmis', 'data')},
    include_package_data = True,
    packages        = ['kstarmis', 'kstarmis.data'],
    zip_safe        = False
    )
