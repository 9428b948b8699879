"""Build hook for the optional compiled kernels.

The package is pure Python except for sqlscout.value_index._kernels, a small
Cython extension covering the MinHash/Levenshtein hot loops. The build is
best-effort: if Cython or a C compiler is missing, installation proceeds and
the package falls back to the pure-Python kernels at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip extension building (with a warning) instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"building the compiled kernels failed ({exc}); "
            "sqlscout will use the pure-Python fallback kernels"
        )


def _extensions():
    try:
        from Cython.Build import cythonize
        import numpy
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "sqlscout.value_index._kernels",
                ["src/sqlscout/value_index/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
