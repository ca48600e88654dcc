"""Installation script for the 'transit_sandbox' python package."""

import os
import toml

from setuptools import find_packages, setup

# Obtain the extension data from the extension.toml file
EXTENSION_PATH = os.path.dirname(os.path.realpath(__file__))
# Read the extension.toml file
EXTENSION_TOML_DATA = toml.load(os.path.join(EXTENSION_PATH, "config", "extension.toml"))

# Minimum dependencies required prior to installation
INSTALL_REQUIRES = [
    "numpy",
    "pandas>=1.5",
    "toml",
    "psutil",
    "prettytable",
]

# Installation operation
setup(
    name="transit_sandbox",
    packages=find_packages(include=["transit_sandbox", "transit_sandbox.*"]),
    package_data={"transit_sandbox": ["data/*.toml"]},
    author=EXTENSION_TOML_DATA["package"]["author"],
    maintainer=EXTENSION_TOML_DATA["package"]["maintainer"],
    version=EXTENSION_TOML_DATA["package"]["version"],
    description=EXTENSION_TOML_DATA["package"]["description"],
    keywords=EXTENSION_TOML_DATA["package"]["keywords"],
    install_requires=INSTALL_REQUIRES,
    entry_points={"console_scripts": ["transit-sandbox = transit_sandbox.scripts.sandbox:main"]},
    license="Apache 2.0",
    include_package_data=True,
    python_requires=">=3.10",
    classifiers=[
        "Natural Language :: English",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering",
    ],
    zip_safe=False,
)
