import numpy as np
import pytest

from bitextmine.mining import MinedPair


def unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Random float32 unit vectors, one per row."""
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x.astype(np.float32)


def make_pair(**kwargs) -> MinedPair:
    defaults = dict(
        src_id="en-001#0000",
        tgt_id="hi-001#0000",
        src_lang="en",
        tgt_lang="hi",
        src_text="a perfectly ordinary english sentence",
        tgt_text="एक साधारण वाक्य",
        las=0.9,
        mode="comparable",
        bucket="2021-03",
    )
    defaults.update(kwargs)
    return MinedPair(**defaults)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
