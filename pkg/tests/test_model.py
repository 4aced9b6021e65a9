"""Domain type invariants, validation, canonical order, JSONL round trips."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from screenline.errors import BadBBox, DuplicateKey, OutOfRange, ValidationError
from screenline.model import (
    AppearanceRecord,
    EpisodeMeta,
    Interval,
    canonical_sort,
    check_unique_positions,
    read_jsonl,
    record_from_json,
    record_to_json,
    validate_record,
    write_jsonl,
)

META = EpisodeMeta("ep1", "show", 1, 1, 60_000)


def rec(t_ms=0, pos=0, bbox=(0.1, 0.1, 0.2, 0.2), score=0.9, cid="a"):
    return AppearanceRecord("ep1", cid, t_ms, pos, bbox, score)


class TestValidateRecord:
    def test_boundary_identity_case(self):
        r = rec(t_ms=0, bbox=(0.0, 0.0, 1.0, 1.0), score=1.0)
        assert validate_record(r, META) is r

    def test_t_past_duration_is_out_of_range(self):
        with pytest.raises(OutOfRange):
            validate_record(rec(t_ms=60_001), META)

    def test_t_at_duration_is_allowed(self):
        assert validate_record(rec(t_ms=60_000), META)

    def test_bbox_overflow(self):
        # 0.8 + 0.3 > 1
        with pytest.raises(BadBBox):
            validate_record(rec(bbox=(0.8, 0.1, 0.3, 0.1)), META)

    def test_negative_score(self):
        from screenline.errors import NegativeScore

        with pytest.raises(NegativeScore):
            validate_record(rec(score=-0.1), META)

    def test_validation_is_idempotent(self):
        r = validate_record(rec(t_ms=5), META)
        assert validate_record(r, META) is r

    @given(
        x=st.floats(0, 1), y=st.floats(0, 1),
        w=st.floats(0, 1), h=st.floats(0, 1),
    )
    def test_bbox_acceptance_matches_arithmetic(self, x, y, w, h):
        r = rec(bbox=(x, y, w, h))
        should_pass = x + w <= 1.0 + 1e-9 and y + h <= 1.0 + 1e-9
        if should_pass:
            assert validate_record(r, META) is r
        else:
            with pytest.raises(BadBBox):
                validate_record(r, META)


class TestCanonicalOrder:
    @given(st.lists(st.tuples(st.integers(0, 1000), st.integers(0, 1000))))
    def test_sort_is_permutation_invariant(self, keys):
        records = [rec(t_ms=t, pos=p) for t, p in keys]
        shuffled = records[:]
        random.Random(7).shuffle(shuffled)
        a = [r.sort_key() for r in canonical_sort(records)]
        b = [r.sort_key() for r in canonical_sort(shuffled)]
        assert a == b == sorted(keys)

    def test_duplicate_position_detected(self):
        with pytest.raises(DuplicateKey):
            check_unique_positions([rec(t_ms=1, pos=2), rec(t_ms=1, pos=2, cid="b")])


class TestInterval:
    def test_rejects_empty_span(self):
        with pytest.raises(ValidationError):
            Interval("a", 10, 10)

    def test_length(self):
        assert Interval("a", 10, 25).length_ms == 15


class TestJsonl:
    def test_round_trip_is_identity(self):
        r = rec(t_ms=123, pos=4, bbox=(0.25, 0.5, 0.125, 0.0625), score=0.875)
        assert record_from_json(record_to_json(r)) == r

    def test_field_order_is_stable(self):
        line = record_to_json(rec())
        keys = list(__import__("json").loads(line).keys())
        assert keys == ["episode_id", "celebrity_id", "t_ms", "pos_index", "bbox", "score"]

    def test_unknown_fields_survive_round_trip(self):
        line = (
            '{"episode_id":"ep1","celebrity_id":"a","t_ms":1,"pos_index":0,'
            '"bbox":[0,0,0.5,0.5],"score":0.5,"frame_hash":"abc","camera":2}'
        )
        r = record_from_json(line)
        assert r.extra == {"frame_hash": "abc", "camera": 2}
        out = record_to_json(r)
        assert '"frame_hash":"abc"' in out and '"camera":2' in out
        assert record_from_json(out) == r

    def test_parse_error_carries_line_number(self):
        text = record_to_json(rec()) + "\n" + "{broken\n"
        with pytest.raises(ValidationError, match="line 2"):
            list(read_jsonl(text))

    def test_write_read_many(self):
        records = [rec(t_ms=i * 10, pos=i) for i in range(50)]
        assert list(read_jsonl(write_jsonl(records))) == records


class TestEpisodeMeta:
    def test_rejects_bad_season(self):
        with pytest.raises(ValidationError):
            EpisodeMeta("e", "s", 0, 1, 1000)

    def test_dict_round_trip(self):
        assert EpisodeMeta.from_dict(META.to_dict()) == META
