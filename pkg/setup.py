#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
WsRHS Energy Efficiency - Package Setup

This script sets up the WsRHS Energy Efficiency package for installation.
"""

from setuptools import setup, find_packages

setup(
    name="wsrhs-ee",
    version="0.1.0",
    description="Energy-efficiency optimization of MIMO links assisted by wireless reconfigurable holographic surfaces",
    author="WsRHS EE Developers",
    packages=find_packages(include=["wsrhs_ee", "wsrhs_ee.*"]),
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pandas>=2.0.0",
        "pydantic>=2.0.0",
        "SQLAlchemy>=2.0.0",
    ],
    entry_points={
        "console_scripts": [
            "wsrhs-ee=wsrhs_ee.main:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering",
    ],
)
