#!/usr/bin/env python
# -*- encoding: utf-8 -*-

import codecs
import os

from setuptools import find_packages, setup


def local_file(name):
    return os.path.relpath(os.path.join(os.path.dirname(__file__), name))


SOURCE = local_file('src')
README = local_file('README.rst')
long_description = codecs.open(README, encoding='utf-8').read()


def parse_requirements(path):
    with open(path) as infile:
        lines = (line.split('#', 1)[0].strip() for line in infile)
        return [line for line in lines if line]


setup(
    name='parlsm',
    version='1.0.0',
    description='Iterative parallel least-squares Monte Carlo for American puts',
    long_description=long_description,
    license='MIT',
    packages=find_packages(SOURCE),
    package_dir={'': SOURCE},
    install_requires=parse_requirements(local_file('requirements.txt')),
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'parlsm=parlsm.cli:main',
        ],
    },
)
