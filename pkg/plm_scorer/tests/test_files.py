import io

import pytest

from plm_scorer import (SentimentRow, SnapshotRow, read_snapshot, read_snapshot_file,
                        write_sentiment_file)

from conftest import snapshot_text

GOOD_ROWS = [
    ("u1", "p1", "5.0000", "i love this movie", "TRUE"),
    ("u1", "p2", "", "terrible boring film", "DROPPED"),
    ("u2", "p1", "3.2500", "it was okay", "IMPUTED"),
]


def test_read_snapshot_parses_all_row_kinds():
    rows = read_snapshot(io.StringIO(snapshot_text(GOOD_ROWS)))
    assert [r.customer_id for r in rows] == ["u1", "u1", "u2"]
    assert rows[0] == SnapshotRow("u1", "p1", 5.0, "i love this movie", "TRUE")
    assert rows[1].rating is None
    assert rows[1].review_headline == "terrible boring film"
    assert rows[2].rating == pytest.approx(3.25)
    assert [r.usable for r in rows] == [True, False, True]


def test_read_snapshot_file_round_trip(write_snapshot_file):
    path = write_snapshot_file(GOOD_ROWS)
    assert read_snapshot_file(path) == read_snapshot(io.StringIO(snapshot_text(GOOD_ROWS)))


def test_foreign_header_rejected():
    with pytest.raises(ValueError, match="not a dataset snapshot"):
        read_snapshot(io.StringIO("a\tb\tc\n"))


def test_empty_stream_rejected():
    with pytest.raises(ValueError, match="not a dataset snapshot"):
        read_snapshot(io.StringIO(""))


def test_short_row_rejected():
    text = snapshot_text(GOOD_ROWS) + "u9\tp9\t4.0000\n"
    with pytest.raises(ValueError, match="line 5: expected 5 fields"):
        read_snapshot(io.StringIO(text))


def test_unknown_provenance_rejected():
    text = snapshot_text([("u1", "p1", "4.0000", "fine", "GUESSED")])
    with pytest.raises(ValueError, match="unknown provenance 'GUESSED'"):
        read_snapshot(io.StringIO(text))


def test_dropped_row_with_rating_rejected():
    text = snapshot_text([("u1", "p1", "4.0000", "fine", "DROPPED")])
    with pytest.raises(ValueError, match="empty exactly on DROPPED"):
        read_snapshot(io.StringIO(text))


def test_true_row_without_rating_rejected():
    text = snapshot_text([("u1", "p1", "", "fine", "TRUE")])
    with pytest.raises(ValueError, match="empty exactly on DROPPED"):
        read_snapshot(io.StringIO(text))


def test_unreadable_rating_rejected():
    text = snapshot_text([("u1", "p1", "four", "fine", "TRUE")])
    with pytest.raises(ValueError, match="unreadable rating 'four'"):
        read_snapshot(io.StringIO(text))


def test_out_of_range_rating_rejected():
    text = snapshot_text([("u1", "p1", "5.5000", "fine", "TRUE")])
    with pytest.raises(ValueError, match=r"outside \[1, 5\]"):
        read_snapshot(io.StringIO(text))


def test_duplicate_cell_rejected():
    text = snapshot_text([("u1", "p1", "4.0000", "fine", "TRUE"),
                          ("u1", "p1", "2.0000", "bad", "TRUE")])
    with pytest.raises(ValueError, match=r"duplicate cell \(u1, p1\)"):
        read_snapshot(io.StringIO(text))


def test_write_sentiment_file_bytes():
    buffer = io.StringIO()
    write_sentiment_file([SentimentRow("u1", "p2", 4.0, "SENT-BERT"),
                          SentimentRow("u2", "p1", 1.0, "SENT-BERT")], buffer)
    assert buffer.getvalue() == ("customer_id\tproduct_id\trating\tscorer\n"
                                 "u1\tp2\t4.0000\tSENT-BERT\n"
                                 "u2\tp1\t1.0000\tSENT-BERT\n")


def test_write_sentiment_file_empty_keeps_header():
    buffer = io.StringIO()
    write_sentiment_file([], buffer)
    assert buffer.getvalue() == "customer_id\tproduct_id\trating\tscorer\n"
