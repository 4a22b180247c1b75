#!/usr/bin/env python3
"""
Setup script for nc-kondratiev
"""

from setuptools import setup

# Read the README file
def read_readme():
    with open("README.md", "r", encoding="utf-8") as fh:
        return fh.read()

# Read requirements
def read_requirements():
    with open("requirements.txt", "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="nc-kondratiev",
    version="0.1.0",
    description="Non-commutative Kondratiev algebra: Wick products, weighted norms and series-valued linear systems",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    py_modules=[
        "calculus",
        "config",
        "exceptions",
        "freeword",
        "linsys",
        "main",
        "models",
        "quantization",
        "series",
    ],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={
        "dev": [
            "pytest>=6.0",
            "hypothesis>=6.0",
            "mpmath>=1.2",
            "black>=21.0",
            "flake8>=3.8",
            "mypy>=0.800",
        ],
    },
    entry_points={
        "console_scripts": [
            "nc-kondratiev=main:main",
        ],
    },
    keywords="wick product, free monoid, kondratiev space, white noise, linear systems",
)
