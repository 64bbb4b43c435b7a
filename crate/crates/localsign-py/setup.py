"""Builds the extension with cargo; maturin is not required."""

import os
import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

HERE = Path(__file__).resolve().parent


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        env = dict(os.environ, PYO3_PYTHON=sys.executable, PYO3_BUILD_EXTENSION_MODULE="1")
        cmd = ["cargo", "build", "--release", "--manifest-path", str(HERE / "Cargo.toml"), "--message-format=short"]
        subprocess.check_call(cmd, env=env)
        target = Path(env.get("CARGO_TARGET_DIR", HERE.parent.parent / "target")) / "release"
        lib = {"darwin": "liblocalsign_py.dylib", "win32": "localsign_py.dll"}.get(sys.platform, "liblocalsign_py.so")
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(target / lib, dest)


setup(ext_modules=[Extension("localsign", sources=[])], cmdclass={"build_ext": CargoBuildExt})
