"""Framing codec: round-trips, error taxonomy, totality over garbage."""

import json
import struct
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from oranlab.e2lite import codec
from oranlab.e2lite import messages as m
from oranlab.metrics import MetricLayer, MetricSample

TESTDATA = Path(__file__).resolve().parents[1] / "testdata"

# -- message strategies --------------------------------------------------

short_text = st.text(max_size=40)
layer = st.sampled_from(list(MetricLayer))
layers_nonempty = st.frozensets(layer, min_size=1)

samples = st.builds(
    MetricSample,
    t=st.integers(min_value=0, max_value=2**64 - 1),
    layer=layer,
    latency_ms=st.floats(min_value=0, max_value=1e9, allow_nan=False, allow_infinity=False),
    ue_id=short_text,
    cell_id=short_text,
)

specs = st.builds(
    m.SubscriptionSpec,
    report_period_ms=st.integers(min_value=1, max_value=2**32 - 1),
    metric_set=layers_nonempty,
    cell_filter=st.one_of(st.none(), short_text),
)

message = st.one_of(
    st.builds(m.Setup, agent_id=short_text,
              ran_functions=st.lists(st.integers(0, 2**16 - 1), max_size=8).map(tuple)),
    st.builds(m.SetupAck, ric_id=short_text),
    st.builds(m.SubscriptionRequest, sub_id=st.integers(0, 2**32 - 1), spec=specs),
    st.builds(m.SubscriptionResponse, sub_id=st.integers(0, 2**32 - 1),
              accepted=st.booleans(), reason=short_text),
    st.builds(m.Indication, sub_id=st.integers(0, 2**32 - 1),
              seq=st.integers(0, 2**64 - 1), samples=st.lists(samples, max_size=12).map(tuple)),
    st.builds(m.ControlRequest, ctrl_id=st.integers(0, 2**32 - 1),
              target_cell=short_text, payload=st.binary(max_size=64)),
    st.builds(m.ControlAck, ctrl_id=st.integers(0, 2**32 - 1), outcome=st.sampled_from([0, 1])),
    st.builds(m.Disconnect, reason=st.integers(0, 255)),
    st.builds(m.ProtocolError, code=st.integers(0, 2**16 - 1), detail=short_text),
)


class TestFraming:
    def test_smallest_frame_is_header_plus_one_byte(self):
        frame = codec.encode(m.Disconnect(reason=0))
        assert len(frame) == codec.HEADER_LEN + 1 == 9
        assert frame[:2] == b"\x45\x32"
        assert frame[2] == 1  # version
        assert struct.unpack(">I", frame[4:8])[0] == 1

    def test_deterministic(self):
        msg = m.Setup("agent", (1, 2, 3))
        assert codec.encode(msg) == codec.encode(msg)

    @given(message)
    def test_roundtrip_identity(self, msg):
        frame = codec.encode(msg)
        decoded, used = codec.decode(frame)
        assert decoded == msg
        assert used == len(frame)

    @given(message, st.binary(min_size=1, max_size=16))
    def test_trailing_garbage_ignored(self, msg, garbage):
        frame = codec.encode(msg)
        decoded, used = codec.decode(frame + garbage)
        assert decoded == msg
        assert used == len(frame)

    def test_oversize_list_encode_error(self):
        big = tuple(range(70_000))
        with pytest.raises(codec.EncodeError):
            codec.encode(m.Setup("a", big))

    def test_oversize_payload_encode_error(self):
        batch = tuple(
            MetricSample(0, MetricLayer.RLC, 1.0, "u" * 100, "c" * 100) for _ in range(400)
        )
        with pytest.raises(codec.EncodeError):
            codec.encode(m.Indication(1, 1, batch))

    def test_text_too_long(self):
        with pytest.raises(codec.EncodeError):
            codec.encode(m.SetupAck("x" * 70_000))


class TestDecodeErrors:
    def test_bad_magic(self):
        frame = bytearray(codec.encode(m.Disconnect(0)))
        frame[0] ^= 0xFF
        with pytest.raises(codec.BadMagic):
            codec.decode(bytes(frame))

    def test_unsupported_version(self):
        frame = bytearray(codec.encode(m.Disconnect(0)))
        frame[2] = 9
        with pytest.raises(codec.UnsupportedVersion):
            codec.decode(bytes(frame))

    def test_unknown_kind(self):
        frame = bytearray(codec.encode(m.Disconnect(0)))
        frame[3] = 0x7F
        with pytest.raises(codec.CorruptPayload):
            codec.decode(bytes(frame))

    def test_length_over_max_frame(self):
        frame = b"\x45\x32\x01\x08" + struct.pack(">I", 65536) + b"\x00"
        with pytest.raises(codec.FrameTooLarge):
            codec.decode(frame)

    def test_truncation_distinct_from_corruption(self):
        frame = codec.encode(m.Setup("agent-1", (1, 2)))
        for cut in range(len(frame)):
            with pytest.raises(codec.NeedMoreBytes):
                codec.decode(frame[:cut])

    def test_payload_shorter_than_fields(self):
        # declared length 1 but Setup needs at least a text header
        frame = b"\x45\x32\x01\x01" + struct.pack(">I", 1) + b"\x00"
        with pytest.raises(codec.CorruptPayload):
            codec.decode(frame)

    def test_unconsumed_payload_bytes(self):
        good = codec.encode(m.Disconnect(0))
        padded = good[:4] + struct.pack(">I", 2) + b"\x00\x00"
        with pytest.raises(codec.CorruptPayload):
            codec.decode(padded)

    def test_invalid_metric_layer(self):
        frame = bytearray(codec.encode(
            m.Indication(1, 1, (MetricSample(0, MetricLayer.RLC, 1.0, "u", "c"),))
        ))
        # layer id sits after header + sub_id(4) + seq(8) + count(2) + t(8)
        offset = codec.HEADER_LEN + 4 + 8 + 2 + 8
        frame[offset:offset + 2] = b"\x00\x63"
        with pytest.raises(codec.CorruptPayload):
            codec.decode(bytes(frame))

    def test_empty_metric_set_rejected(self):
        # build a SubscriptionRequest payload with zero layers by hand
        payload = struct.pack(">I", 1) + struct.pack(">I", 100) + struct.pack(">H", 0) + b"\x00"
        frame = b"\x45\x32\x01\x03" + struct.pack(">I", len(payload)) + payload
        with pytest.raises(codec.CorruptPayload):
            codec.decode(frame)

    @given(st.binary(max_size=64))
    def test_total_over_arbitrary_bytes(self, data):
        try:
            msg, used = codec.decode(data)
            assert used <= len(data)
        except (codec.DecodeError, codec.NeedMoreBytes):
            pass


class TestFrameBuffer:
    def test_reassembles_split_frames(self):
        msgs = [m.Setup("a", (1,)), m.Disconnect(0), m.SetupAck("r")]
        stream = b"".join(codec.encode(x) for x in msgs)
        buf = codec.FrameBuffer()
        got = []
        for i in range(0, len(stream), 3):
            got.extend(buf.feed(stream[i:i + 3]))
        assert got == msgs


class TestConformanceVectors:
    def test_shipped_vectors_decode_to_expected(self):
        blob = (TESTDATA / "e2-vectors.bin").read_bytes()
        expectations = [
            json.loads(line)
            for line in (TESTDATA / "e2-vectors.jsonl").read_text().splitlines()
        ]
        offset = 0
        decoded = []
        while offset < len(blob):
            msg, used = codec.decode(blob[offset:])
            decoded.append((blob[offset:offset + used], msg))
            offset += used
        assert len(decoded) == len(expectations)
        for (frame, msg), expect in zip(decoded, expectations):
            assert frame.hex() == expect["hex"]
            assert m.to_jsonable(msg) == expect["expected"]
