"""Convenience functions for computing first Robin eigenvalues of the p-Laplacian and verifying their bounds."""

from .functional_verification import *  # noqa: F401,F403

"""Get version from distribution and set copyright."""
__version__ = "0.0.0"
try:
    from importlib.metadata import (
        PackageNotFoundError as _PackageNotFoundError,
        version as _version,
    )  # making import aliases private prevents sphinx-autodoc from listing them

    try:
        __version__ = _version("robin-plaplacian")
    except _PackageNotFoundError:
        pass
except ImportError:
    from pkg_resources import DistributionNotFound, get_distribution

    try:
        __version__ = get_distribution("robin-plaplacian").version
    except DistributionNotFound:
        pass

__copyright__ = """Copyright (c) 2024 robin-plaplacian developers. All rights reserved.
Released under the Apache License 2.0."""
