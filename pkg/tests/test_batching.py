import logging

import numpy as np
import pytest

from sepradar.exceptions import InvalidArgumentError
from sepradar.processing.batching import delayed_reference, make_batches
from tests.conftest import DT, node_for, noiseless_config


@pytest.fixture
def node():
    return node_for(noiseless_config(1000, clutter_order=4), pre_roll=6)


def test_batches_partition_the_record(node, caplog):
    with caplog.at_level(logging.INFO, logger="sepradar.processing.batching"):
        batches = make_batches(node, 3, 6)
    assert [b.index for b in batches] == [1, 2, 3]
    assert all(b.size == 333 for b in batches)
    assert "Discarding 1 trailing samples" in caplog.text
    y = node.surveillance.samples
    for b in batches:
        np.testing.assert_array_equal(b.y, y[(b.index - 1) * 333:b.index * 333])


def test_clutter_columns_are_delayed_references(node):
    batch = make_batches(node, 2, 6)[1]
    x_ref = node.reference.samples
    np.testing.assert_array_equal(batch.x, x_ref[6 + 500:6 + 1000])
    clutter = batch.clutter_matrix()
    assert clutter.shape == (500, 6)
    for lag in range(1, 7):
        np.testing.assert_array_equal(clutter[:, lag - 1], delayed_reference(batch, lag * DT))
    assert batch.interference_matrix().shape == (500, 7)


def test_fractional_delay_matches_the_simulator():
    cfg = noiseless_config(600, clutter_order=4, target_delay=2.5 * DT, target_doppler=0.0)
    cfg = cfg.model_copy(update={"dpi_amp": cfg.dpi_amp.of(0), "clutter_taps": []})
    node = node_for(cfg, pre_roll=4)
    batch = make_batches(node, 2, 4)[1]
    np.testing.assert_allclose(delayed_reference(batch, 2.5 * DT), batch.y, rtol=0, atol=1e-12)


def test_layout_errors(node):
    with pytest.raises(InvalidArgumentError):
        make_batches(node, 0, 4)
    with pytest.raises(InvalidArgumentError):
        make_batches(node, 200, 4)
    with pytest.raises(InvalidArgumentError):
        make_batches(node, 2, 7)


def test_delay_outside_reference_support(node):
    batch = make_batches(node, 2, 6)[0]
    with pytest.raises(InvalidArgumentError):
        delayed_reference(batch, -DT)
    with pytest.raises(InvalidArgumentError):
        delayed_reference(batch, 100 * DT)
