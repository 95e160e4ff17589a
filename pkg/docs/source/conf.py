import sys
import os

sys.path.insert(0, os.path.abspath("../.."))

# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information

project = "robin-plaplacian"
copyright = "2024, robin-plaplacian developers"
author = "robin-plaplacian developers"
release = "0.1.0"

# -- General configuration ---------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration

extensions = [
    "sphinx.ext.duration",
    "sphinx.ext.doctest",
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.napoleon",
    "sphinx_autodoc_typehints",
]

autosummary_generate = True
autosummary_ignore_module_all = False
autosummary_imported_members = True

autoclass_content = "both"

napoleon_custom_sections = [("Required quantities", "returns_style")]

templates_path = []
exclude_patterns = []

toc_object_entries = False


# -- Options for HTML output -------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output

html_theme = "sphinx_rtd_theme"

pygments_style = "sphinx"

# -- Options for EPUB output
epub_show_urls = "footnote"
