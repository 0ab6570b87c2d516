import os
from pathlib import Path

import numpy as np
import pytest

from jmdm import LabeledDataset

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def find_dataset(stem: str, env: str) -> Path | None:
    if os.environ.get(env):
        return Path(os.environ[env])
    for suffix in (".csv", ".csv.gz"):
        p = DATA_DIR / f"{stem}{suffix}"
        if p.is_file():
            return p
    return None


def complementary_dataset(n_per_class: int = 20) -> LabeledDataset:
    """3 classes, 8 features in two separability groups.

    Features 0-3 move class 2 away from classes 1 and 3; features 4-7 move
    class 3 away from classes 1 and 2. Within a group the class gap
    shrinks with the feature index, and every group-A gap beats every
    group-B gap. Each class column alternates mu+1, mu-1, so class means
    and population variances (= 1) are exact.
    """
    pat = np.tile([1.0, -1.0], n_per_class // 2)
    cols = []
    for gap in (3.0, 2.8, 2.6, 2.4):
        cols.append(np.concatenate([pat, gap + pat, pat]))
    for gap in (2.2, 2.0, 1.8, 1.6):
        cols.append(np.concatenate([pat, pat, gap + pat]))
    y = np.repeat([1, 2, 3], n_per_class)
    return LabeledDataset.from_arrays(np.column_stack(cols), y, name="complementary")


@pytest.fixture
def comp_ds():
    return complementary_dataset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def mfeat_path():
    p = find_dataset("mfeat", "JMDM_MFEAT")
    if p is None:
        pytest.skip("Multiple-Features CSV not found; run scripts/fetch_mfeat.py")
    return p


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
