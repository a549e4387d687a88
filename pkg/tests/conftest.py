import json
from pathlib import Path

import pytest

from chartsum.backend import MockBackend
from chartsum.ingest import load_chart
from chartsum.patches import uni_insight

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "chartsum" / "fixtures"
STOCKS = FIXTURES / "stocks"
MINI_CORPUS = FIXTURES / "mini_corpus"


@pytest.fixture(scope="session")
def stocks_spec() -> str:
    return STOCKS.joinpath("spec.json").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def stocks_csv() -> bytes:
    return STOCKS.joinpath("data.csv").read_bytes()


@pytest.fixture(scope="session")
def stocks_bound(stocks_spec, stocks_csv):
    return load_chart(stocks_spec, stocks_csv)


@pytest.fixture(scope="session")
def stocks_records(stocks_bound):
    return [uni_insight(stocks_bound, n) for n in stocks_bound.data.dimension_names]


@pytest.fixture(scope="session")
def stocks_patch_sets(stocks_records):
    return [r.patches for r in stocks_records]


@pytest.fixture(scope="session")
def mini_corpus_dir() -> Path:
    return MINI_CORPUS


@pytest.fixture()
def mock_backend():
    return MockBackend(seed=7)
