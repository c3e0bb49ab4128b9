import os
from pathlib import Path

import pytest

from wavefarm.dataset import SCENARIOS, generate_synthetic_dataset, write_dataset_csv

# Candidate file names per scenario inside WAVEFARM_DATA_DIR (the public
# four-scenario archive, not bundled with the repo).
_DATA_FILE_CANDIDATES = ("{s}_Data.csv", "{s}.csv", "{s}_data.csv", "{s}.CSV")


def real_data_path(scenario: str) -> Path | None:
    root = os.environ.get("WAVEFARM_DATA_DIR")
    if not root:
        return None
    for pattern in _DATA_FILE_CANDIDATES:
        path = Path(root) / pattern.format(s=scenario)
        if path.is_file():
            return path
    return None


def require_real_data() -> dict[str, Path]:
    paths = {s: real_data_path(s) for s in SCENARIOS}
    missing = [s for s, p in paths.items() if p is None]
    if missing:
        pytest.skip(
            "public scenario files not available (set WAVEFARM_DATA_DIR); "
            f"missing: {', '.join(missing)}"
        )
    return paths


@pytest.fixture(scope="session")
def synth_ds():
    return generate_synthetic_dataset("Sydney", 200, seed=7)


@pytest.fixture(scope="session")
def synth_csv(tmp_path_factory, synth_ds):
    path = tmp_path_factory.mktemp("data") / "Sydney.csv"
    write_dataset_csv(synth_ds, path)
    return path
