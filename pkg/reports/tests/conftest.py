import shutil
import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def bundle(tmp_path_factory) -> Path:
    """A real result bundle for the two-building fixture, produced through
    the primary package's public CLI (its external interface)."""
    out = tmp_path_factory.mktemp("bundle")
    cmd = [
        sys.executable, "-m", "ces_market.cli",
        "run", "--instance", str(DATA / "two_bc.json"),
        "--model", "compare", "--out", str(out),
        "--price-step", "0.05",
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture
def bundle_copy(bundle, tmp_path) -> Path:
    target = tmp_path / "bundle"
    shutil.copytree(bundle, target)
    return target
