"""Build hooks for the optional compiled scanner.

The scanner kernel lives in src/barrc/_scanner.py and runs fine as plain
Python.  Running `python setup.py build_ext --inplace` compiles the same
source with Cython (pure-Python mode) into barrc._scanner_c; the lexer
picks the compiled module up at import time when present.  A plain
`pip install .` never requires Cython or a C compiler.
"""

import os
import shutil
import sys

from setuptools import setup


def _accel_modules():
    from Cython.Build import cythonize
    from setuptools import Extension

    here = os.path.dirname(os.path.abspath(__file__))
    src = os.path.join(here, "src", "barrc", "_scanner.py")
    gen_dir = os.path.join(here, "build", "accel")
    gen = os.path.join(gen_dir, "_scanner_c.py")
    os.makedirs(gen_dir, exist_ok=True)
    shutil.copyfile(src, gen)
    return cythonize(
        [Extension("barrc._scanner_c", [gen])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )


ext_modules = []
if "build_ext" in sys.argv[1:] or os.environ.get("BARRC_BUILD_ACCEL") == "1":
    ext_modules = _accel_modules()

setup(ext_modules=ext_modules)
