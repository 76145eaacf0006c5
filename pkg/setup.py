"""
Setup script for OVFormer Desk.
"""
from setuptools import setup, find_packages

setup(
    name="ovformer-desk",
    version="1.0.0",
    description="Open-vocabulary temporal action localization with a numpy autodiff core",
    packages=find_packages(exclude=("tests", "tests.*")),
    py_modules=["app"],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",
        "python-dotenv>=1.0.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        'console_scripts': [
            'ovformer=src.cli:main',
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Programming Language :: Python :: 3.9",
    ],
)
