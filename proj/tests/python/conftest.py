import os
import pathlib

import pytest

SOURCE_DIR = pathlib.Path(os.environ.get("UMM_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture
def source_dir(monkeypatch):
    # Configs name datasets relative to the repository root.
    monkeypatch.chdir(SOURCE_DIR)
    return SOURCE_DIR


@pytest.fixture
def umm_bin():
    path = os.environ.get("UMM_BIN")
    if not path:
        pytest.skip("UMM_BIN not set")
    return path
