import os
import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("CMOX_CLI") or shutil.which("cmox")
    if not path:
        pytest.skip("cmox executable not found (set CMOX_CLI)")

    def run(*args, check=True):
        proc = subprocess.run([path, *map(str, args)], capture_output=True, text=True)
        if check and proc.returncode != 0:
            raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
        return proc

    return run


@pytest.fixture(scope="session")
def core():
    if os.environ.get("CMOX_SKIP_BINDINGS"):
        pytest.skip("bindings not built")
    return pytest.importorskip("cmox")
