import sys
from pathlib import Path

import pytest

# Ensure project root is on sys.path for direct module imports in tests
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


@pytest.fixture(autouse=True)
def scratch_ledger(tmp_path, monkeypatch):
    """Keep the run ledger out of the working tree."""
    monkeypatch.setenv("VERIWALL_DB_URL", f"sqlite:///{tmp_path / 'veriwall.db'}")
