"""Build script: compiles the optional C kernel extension.

The package works without the extension (a pure-Python kernel module with the
same interface is selected at import time), so any build failure here degrades
to the fallback instead of breaking the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "forestalg._ckernels",
                ["src/forestalg/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: C kernels not built ({exc}); pure-Python kernels will be used")

setup(ext_modules=ext_modules)
