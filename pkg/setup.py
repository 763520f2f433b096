from setuptools import setup

import egorovtools

with open("README.md") as fp:
    README = fp.read()

setup(
    name="egorovtools",
    version=egorovtools.__version__,
    description="Compare exact Heisenberg evolution with the explicit Egorov expansion and its remainder bounds.",
    long_description=README,
    long_description_content_type="text/markdown",
    packages=["egorovtools"],
    license="MIT",
    install_requires=[
        "mpmath",
        "numpy",
        "pydantic>=2",
        "scipy",
    ],
    entry_points={
        "console_scripts": ["egorovtools = egorovtools.cli:main"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.8",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
