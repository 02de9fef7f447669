#!/usr/bin/env python3

from setuptools import setup, find_packages  # type: ignore
import abc_smoothing


long_description = """============================================================
 abc_smoothing: forward-only smoothing for ABC hidden Markov models
 ============================================================
    Particle filters, forward-only smoothing, rejection SMC and PMMH
    for hidden Markov models whose observation density is intractable,
    with a replicated experiment harness.
"""

setup(
    name="abc_smoothing",
    version=abc_smoothing.__version__,
    description="Forward-only smoothing for ABC hidden Markov models",
    long_description=long_description,
    author="The abc_smoothing developers",
    packages=find_packages(),
    include_package_data=True,
    python_requires=">=3.8",  # supported Python ranges
    install_requires=["numpy", "scipy", "pyparsing>=3"],
    extras_require={
        "dev": ["pytest", "pytest-cov", "mypy", "matplotlib"],
        "plot": ["matplotlib"],
    },
    entry_points={
        "console_scripts": ["abc-smoothing = abc_smoothing.harness.cli:main"],
    },
    license="APACHE",
    keywords="SMC particle smoothing ABC PMMH hidden Markov model",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Developers",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
)
