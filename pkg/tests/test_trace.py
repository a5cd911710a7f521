"""Trace format: golden lines, validation, and parse/format round trips."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from visim.trace import (CANONICAL_SIZES, CLASSES, EVENTS, LAYERS, REASONS,
                         MobilityRecord, Trace, TraceError, TraceParseError,
                         TraceRecord, format_record, parse_line, read_trace,
                         write_trace)


def test_packet_line_layout():
    rec = TraceRecord("s", 1.25, 3, "AGT", 17, "data", 1040, 3, 9)
    assert format_record(rec) == "s 1.250000 3 AGT 17 data 1040 3 9 ---"


def test_drop_line_carries_its_reason():
    rec = TraceRecord("d", 0.5, 1, "MAC", 5, "data", 1040, 0, 2, "IFQ")
    assert format_record(rec) == "d 0.500000 1 MAC 5 data 1040 0 2 IFQ"


def test_mobility_line_layout():
    rec = MobilityRecord(2.5, 4, 123.456, 78.9, 3.21)
    assert format_record(rec) == "M 2.500000 4 123.46 78.90 3.21"


def test_canonical_sizes_pin_every_class():
    assert CANONICAL_SIZES == {"data": 1040, "ack": 40, "rreq": 60,
                               "rrep": 60, "rerr": 60, "update": 60}


# -- validation ---------------------------------------------------------------

def _rec(**kw):
    base = dict(evt="s", time=1.0, node=0, layer="MAC", pkt_uid=1,
                cls="data", size=1040, src=0, dst=1, reason="---")
    base.update(kw)
    return TraceRecord(**base)


@pytest.mark.parametrize("bad", [
    _rec(evt="x"),
    _rec(layer="PHY"),
    _rec(cls="blob"),
    _rec(reason="???"),
    _rec(time=-0.1),
    _rec(size=0),
    _rec(size=-5),
    _rec(cls="data", size=999),          # canonical size mismatch
    _rec(cls="rreq", size=61),
])
def test_validation_rejects_malformed_records(bad):
    tr = Trace()
    with pytest.raises(TraceError):
        tr.append(bad)


def test_append_rejects_time_going_backwards():
    tr = Trace()
    tr.append(_rec(time=1.0))
    with pytest.raises(TraceError):
        tr.append(_rec(time=0.5))


def test_append_checks_mobility_bounds_when_area_known():
    tr = Trace(area=(500.0, 400.0))
    tr.append(MobilityRecord(0.0, 1, 10.0, 10.0, 0.0))
    with pytest.raises(TraceError):
        tr.append(MobilityRecord(1.0, 1, 501.0, 10.0, 0.0))
    with pytest.raises(TraceError):
        tr.append(MobilityRecord(1.0, 1, 10.0, -0.5, 0.0))


# -- parsing -------------------------------------------------------------------

def test_parse_error_carries_the_line_number():
    with pytest.raises(TraceParseError) as ei:
        parse_line("s 1.0 2 AGT", line_no=7)
    assert ei.value.line_no == 7


@pytest.mark.parametrize("line", [
    "",
    "s 1.000000 1 AGT 0 data 1040 0 1",            # 9 fields
    "x 1.000000 1 AGT 0 data 1040 0 1 ---",        # unknown event
    "s 1.000000 1 PHY 0 data 1040 0 1 ---",        # unknown layer
    "s 1.000000 1 AGT 0 blob 1040 0 1 ---",        # unknown class
    "s abc 1 AGT 0 data 1040 0 1 ---",             # bad number
    "M 1.000000 1 10.00 20.00",                    # 5 fields
])
def test_parse_rejects_malformed_lines(line):
    with pytest.raises(TraceParseError):
        parse_line(line)


# -- round trips ----------------------------------------------------------------

def _sixdec():
    return st.integers(0, 10 ** 9).map(lambda n: float(f"{n / 10 ** 6:.6f}"))


def _twodec(hi):
    return st.integers(0, hi).map(lambda n: float(f"{n / 100:.2f}"))


@given(evt=st.sampled_from(EVENTS), time=_sixdec(),
       node=st.integers(0, 999), layer=st.sampled_from(LAYERS),
       uid=st.integers(0, 10 ** 6), cls=st.sampled_from(CLASSES),
       src=st.integers(0, 999), dst=st.integers(-1, 999),
       reason=st.sampled_from(REASONS))
def test_packet_records_round_trip(evt, time, node, layer, uid, cls,
                                   src, dst, reason):
    rec = TraceRecord(evt, time, node, layer, uid, cls,
                      CANONICAL_SIZES[cls], src, dst, reason)
    assert parse_line(format_record(rec)) == rec


@given(time=_sixdec(), node=st.integers(0, 999),
       x=_twodec(50_000), y=_twodec(40_000), speed=_twodec(1_000))
def test_mobility_records_round_trip(time, node, x, y, speed):
    rec = MobilityRecord(time, node, x, y, speed)
    assert parse_line(format_record(rec)) == rec


def _fuzz_records(n=2000, seed=99):
    rnd = random.Random(seed)
    t = 0.0
    out = []
    for i in range(n):
        t = float(f"{t + rnd.random():.6f}")
        if rnd.random() < 0.2:
            out.append(MobilityRecord(t, rnd.randrange(10),
                                      float(f"{rnd.uniform(0, 500):.2f}"),
                                      float(f"{rnd.uniform(0, 400):.2f}"),
                                      float(f"{rnd.uniform(0, 10):.2f}")))
        else:
            cls = rnd.choice(CLASSES)
            out.append(TraceRecord(rnd.choice(EVENTS), t, rnd.randrange(10),
                                   rnd.choice(LAYERS), i, cls,
                                   CANONICAL_SIZES[cls], rnd.randrange(10),
                                   rnd.randrange(10), rnd.choice(REASONS)))
    return out


def test_write_read_write_is_byte_identical(tmp_path):
    records = _fuzz_records()
    p1, p2 = tmp_path / "a.tr", tmp_path / "b.tr"
    write_trace(records, p1)
    reread = list(read_trace(p1))
    assert reread == records
    write_trace(reread, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_trace_save_load_round_trip(tmp_path):
    tr = Trace(area=(500.0, 400.0))
    for rec in _fuzz_records(n=300, seed=5):
        tr.append(rec)
    path = tmp_path / "t.tr"
    tr.save(path)
    assert Trace.load(path).records == tr.records


def test_read_trace_skips_blank_lines(tmp_path):
    rec = _rec()
    path = tmp_path / "gaps.tr"
    path.write_text(f"\n{format_record(rec)}\n\n{format_record(rec)}\n")
    assert list(read_trace(path)) == [rec, rec]
