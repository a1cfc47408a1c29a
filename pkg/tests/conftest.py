"""Shared fixtures: scenario files and a deterministic social graph."""

from pathlib import Path

import numpy as np
import pytest

from newswarn import load_edge_list

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

# Real dataset used automatically when present; otherwise the synthetic
# graph below stands in at the same desk scale.
SNAP_EDGE_FILE = Path(__file__).resolve().parent.parent / "data" / "twitter_combined.txt"


@pytest.fixture(scope="session")
def single_news_scenario() -> Path:
    return SCENARIO_DIR / "single-news.txt"


@pytest.fixture(scope="session")
def design_pair_scenario() -> Path:
    return SCENARIO_DIR / "design-pair.txt"


def build_synthetic_edges(n_nodes: int = 10_000, seed: int = 918273645) -> np.ndarray:
    """Deterministic heavy-tailed directed edge set, mean out-degree ~28."""
    rng = np.random.default_rng(seed)
    degrees = np.minimum(rng.lognormal(mean=2.95, sigma=0.9, size=n_nodes), 400.0)
    degrees = degrees.astype(np.int64)
    src = np.repeat(np.arange(n_nodes, dtype=np.int64), degrees)
    dst = rng.integers(0, n_nodes, size=src.size, dtype=np.int64)
    return np.column_stack([src, dst])


@pytest.fixture(scope="session")
def synthetic_graph_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("graph") / "synthetic.edges"
    edges = build_synthetic_edges()
    np.savetxt(path, edges, fmt="%d")
    return path


@pytest.fixture(scope="session")
def synthetic_graph(synthetic_graph_file):
    return load_edge_list(synthetic_graph_file)
