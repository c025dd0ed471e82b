#!/usr/bin/env python3
# encoding: UTF-8

"""Build tar.gz for pyaud

Needed packages to run:

    numpy, scipy, scikit-learn, textgrid
"""
import os
from io import open

import pyaud

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

VERSION = pyaud.__version__

_dirname_ = os.path.dirname(__file__)
readme_path = os.path.join(_dirname_, "README.md")

setup(
    name="pyaud",
    version=VERSION,
    license="MIT",
    description="Acoustic unit discovery from untranscribed speech.",
    long_description=open(readme_path, "r", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    packages=[
        "pyaud",
        "pyaud.frontend",
        "pyaud.hmm",
        "pyaud.pipeline",
    ],
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.4",
        "scikit-learn>=0.22",
        "textgrid>=1.5",
    ],
    entry_points={
        "console_scripts": [
            "pyaud = pyaud.cli:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Multimedia :: Sound/Audio :: Speech",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.6",
)
