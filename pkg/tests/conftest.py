from pathlib import Path

import numpy as np
import pytest

import privfog as pf

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def iris_path() -> Path:
    return DATA_DIR / "iris.csv"


@pytest.fixture(scope="session")
def iris_schema(iris_path):
    return pf.infer_schema(iris_path)


@pytest.fixture(scope="session")
def iris_full(iris_path, iris_schema):
    return pf.load_csv(iris_path, iris_schema)


@pytest.fixture(scope="session")
def two_class_schema():
    return pf.Schema(
        feature_names=("x", "y"),
        feature_bounds=((0.0, 1.0), (0.0, 1.0)),
        class_labels=("a", "b"),
    )


def make_noisy(matrix: np.ndarray, owner_id: int = 1) -> pf.NoisyDataset:
    """Wrap a raw matrix as a NoisyDataset with synthetic labels/keys."""
    r, m = matrix.shape
    schema = pf.Schema(
        feature_names=tuple(f"f{j}" for j in range(m)),
        feature_bounds=((0.0, 1.0),) * m,
        class_labels=("a", "b"),
    )
    return pf.NoisyDataset(
        features=matrix,
        labels=tuple("a" if i % 2 == 0 else "b" for i in range(r)),
        row_keys=tuple((owner_id, i) for i in range(r)),
        schema=schema,
    )


def same_content(a: pf.NoisyDataset, b: pf.NoisyDataset) -> bool:
    return (
        np.array_equal(a.features, b.features)
        and a.labels == b.labels
        and a.row_keys == b.row_keys
        and a.schema == b.schema
    )
