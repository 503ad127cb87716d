import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from hbcache.errors import InvalidParameter, ParseError
from hbcache.workload import (
    RequestStream,
    load_empirical,
    next_request,
    parse_counts,
    zipf_popularity,
)

# 1 / sum_{j=1..500} j**-0.8, from a 50-digit mpmath summation
ZIPF_500_08_HEAD = 0.07755215938123916691


def test_zipf_two_videos():
    p = zipf_popularity(2, 1.0).probabilities
    assert p.tolist() == pytest.approx([2 / 3, 1 / 3], abs=1e-15)


def test_zipf_alpha_zero_is_uniform():
    assert zipf_popularity(5, 0.0).probabilities.tolist() == [0.2] * 5


def test_zipf_head_against_extended_precision():
    assert zipf_popularity(500, 0.8).probabilities[0] == pytest.approx(ZIPF_500_08_HEAD, abs=1e-12)


@given(st.integers(1, 2000), st.floats(0, 3))
def test_zipf_invariants(c, alpha):
    p = zipf_popularity(c, alpha).probabilities
    assert abs(p.sum() - 1) < 1e-9
    assert (p > 0).all()
    assert (np.diff(p) <= 0).all()


@given(st.integers(2, 500), st.floats(0, 2), st.floats(0.01, 2))
def test_head_grows_with_alpha(c, alpha, delta):
    assert zipf_popularity(c, alpha + delta).probabilities[0] > zipf_popularity(c, alpha).probabilities[0]


@pytest.mark.parametrize("c,alpha", [(0, 1.0), (5, -0.1)])
def test_zipf_rejects(c, alpha):
    with pytest.raises(InvalidParameter):
        zipf_popularity(c, alpha)


@pytest.mark.parametrize("counts,expected", [
    ([3, 1], [0.75, 0.25]),
    ([1, 3], [0.75, 0.25]),
    ([5, 0, 5], [0.5, 0.5]),
])
def test_load_empirical(counts, expected):
    model = load_empirical(counts)
    assert model.catalog_size == len(expected)
    assert model.probabilities.tolist() == expected


def test_load_empirical_all_zero():
    with pytest.raises(InvalidParameter):
        load_empirical([0, 0])


def test_parse_counts():
    assert parse_counts("# netflix-like\n10\n\n3\n0\n") == [10, 3, 0]
    with pytest.raises(ParseError) as err:
        parse_counts("1\nfoo\n")
    assert err.value.location == "line 2"


def test_single_video_single_hb():
    model = zipf_popularity(1, 0.8)
    stream = RequestStream(model, 1, seed=3)
    reqs = [next_request(model, 1, stream) for _ in range(100)]
    assert {r.video for r in reqs} == {0}
    assert {r.requester for r in reqs} == {0}
    assert [r.sequence for r in reqs] == list(range(100))


def test_stream_deterministic_and_in_range():
    model = zipf_popularity(50, 0.8)
    a = RequestStream(model, 7, seed=42, block=100).take(1000)
    b = RequestStream(model, 7, seed=42, block=100).take(1000)
    assert a == b
    assert all(0 <= r.video < 50 and 0 <= r.requester < 7 for r in a)
    assert a != RequestStream(model, 7, seed=43, block=100).take(1000)


def test_next_request_rejects_mismatched_stream():
    model = zipf_popularity(10, 1.0)
    stream = RequestStream(model, 5, seed=0)
    with pytest.raises(InvalidParameter):
        next_request(model, 6, stream)


def test_video_frequencies_chi_square():
    model = zipf_popularity(10, 1.0)
    stream = RequestStream(model, 1, seed=2024)
    videos = np.array([r.video for r in stream.take(10**6)])
    observed = np.bincount(videos, minlength=10)
    assert chisquare(observed, model.probabilities * len(videos)).pvalue > 0.001


def test_requester_frequencies_chi_square():
    model = zipf_popularity(10, 1.0)
    stream = RequestStream(model, 20, seed=7)
    req = np.array([r.requester for r in stream.take(200_000)])
    observed = np.bincount(req, minlength=20)
    assert chisquare(observed).pvalue > 0.001
