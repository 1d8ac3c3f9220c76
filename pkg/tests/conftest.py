from __future__ import annotations

import pytest

from rpreact.toolkit import DataPaths, ToolEnvironment

from support import DATA_DIR, StubWorker


@pytest.fixture
def data_paths() -> DataPaths:
    return DataPaths(
        tables={
            "flights": DATA_DIR / "flights.csv",
            "coffee": DATA_DIR / "coffee.csv",
            "airbnb": DATA_DIR / "airbnb.csv",
            "yelp": DATA_DIR / "yelp.csv",
        },
        graphs={
            "PaperNet": DATA_DIR / "papernet.json",
            "AuthorNet": DATA_DIR / "authornet.json",
        },
        corpora={
            "agenda": DATA_DIR / "agenda.jsonl",
            "scirex": DATA_DIR / "scirex.jsonl",
        },
    )


@pytest.fixture
def env(data_paths) -> ToolEnvironment:
    return ToolEnvironment(data_paths)


@pytest.fixture
def stub_worker() -> StubWorker:
    return StubWorker()
