"""Bit-exact framing for E2-lite messages.

Frame layout: magic 0x45 0x32 ("E2"), version byte 0x01, message-kind
byte, 4-byte big-endian payload length, then the payload. Integers are
big-endian fixed-width, lists are a 2-byte count followed by elements,
text is a 2-byte length followed by UTF-8 bytes. The payload of a single
frame never exceeds 65535 bytes; senders split larger indications.

decode() is total over arbitrary byte strings: every input yields either
a message or a typed error, and a truncated frame is reported with
NeedMoreBytes, distinct from corruption.
"""

from __future__ import annotations

import math
import struct
from typing import Tuple

from ..metrics import MetricLayer, MetricSample
from .messages import (
    MAX_PAYLOAD,
    ControlAck,
    ControlRequest,
    Disconnect,
    E2Message,
    Indication,
    ProtocolError,
    Setup,
    SetupAck,
    SubscriptionRequest,
    SubscriptionResponse,
    SubscriptionSpec,
)

MAGIC = b"\x45\x32"
VERSION = 1
HEADER_LEN = 8

_KIND_CODES = {
    Setup: 1,
    SetupAck: 2,
    SubscriptionRequest: 3,
    SubscriptionResponse: 4,
    Indication: 5,
    ControlRequest: 6,
    ControlAck: 7,
    Disconnect: 8,
    ProtocolError: 9,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


class EncodeError(Exception):
    """Message cannot be framed (oversize field or out-of-range integer)."""


class DecodeError(Exception):
    """Input bytes cannot yield a message (corruption, not truncation)."""


class BadMagic(DecodeError):
    pass


class UnsupportedVersion(DecodeError):
    pass


class FrameTooLarge(DecodeError):
    pass


class CorruptPayload(DecodeError):
    pass


class NeedMoreBytes(Exception):
    """The buffer ends before the frame does; read more and retry."""


# -- primitive writers ------------------------------------------------


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, v: int):
        if not 0 <= v <= 0xFF:
            raise EncodeError(f"u8 out of range: {v}")
        self.parts.append(struct.pack(">B", v))

    def u16(self, v: int):
        if not 0 <= v <= 0xFFFF:
            raise EncodeError(f"u16 out of range: {v}")
        self.parts.append(struct.pack(">H", v))

    def u32(self, v: int):
        if not 0 <= v <= 0xFFFFFFFF:
            raise EncodeError(f"u32 out of range: {v}")
        self.parts.append(struct.pack(">I", v))

    def u64(self, v: int):
        if not 0 <= v <= 0xFFFFFFFFFFFFFFFF:
            raise EncodeError(f"u64 out of range: {v}")
        self.parts.append(struct.pack(">Q", v))

    def f64(self, v: float):
        self.parts.append(struct.pack(">d", v))

    def text(self, s: str):
        raw = s.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise EncodeError(f"text too long: {len(raw)} bytes")
        self.u16(len(raw))
        self.parts.append(raw)

    def blob(self, b: bytes):
        if len(b) > 0xFFFF:
            raise EncodeError(f"byte field too long: {len(b)}")
        self.u16(len(b))
        self.parts.append(b)

    def count(self, n: int):
        if n > 0xFFFF:
            raise EncodeError(f"list too long: {n} elements")
        self.u16(n)

    def payload(self) -> bytes:
        return b"".join(self.parts)


# -- primitive readers -------------------------------------------------


class _Reader:
    """Cursor over exactly one frame payload; never reads past its end."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CorruptPayload("payload shorter than its declared fields")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack(">d", self._take(8))[0]

    def text(self) -> str:
        n = self.u16()
        raw = self._take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptPayload(f"invalid UTF-8 in text field: {exc}") from None

    def blob(self) -> bytes:
        return bytes(self._take(self.u16()))

    def done(self):
        if self.pos != len(self.buf):
            raise CorruptPayload(f"{len(self.buf) - self.pos} unconsumed payload bytes")


# -- per-kind payload codecs -------------------------------------------


def _encode_body(msg: E2Message, w: _Writer):
    if isinstance(msg, Setup):
        w.text(msg.agent_id)
        w.count(len(msg.ran_functions))
        for fid in msg.ran_functions:
            w.u16(fid)
    elif isinstance(msg, SetupAck):
        w.text(msg.ric_id)
    elif isinstance(msg, SubscriptionRequest):
        w.u32(msg.sub_id)
        w.u32(msg.spec.report_period_ms)
        layers = sorted(l.value for l in msg.spec.metric_set)
        w.count(len(layers))
        for lid in layers:
            w.u16(lid)
        if msg.spec.cell_filter is None:
            w.u8(0)
        else:
            w.u8(1)
            w.text(msg.spec.cell_filter)
    elif isinstance(msg, SubscriptionResponse):
        w.u32(msg.sub_id)
        w.u8(1 if msg.accepted else 0)
        w.text(msg.reason)
    elif isinstance(msg, Indication):
        w.u32(msg.sub_id)
        w.u64(msg.seq)
        w.count(len(msg.samples))
        for s in msg.samples:
            w.u64(s.t)
            w.u16(s.layer.value)
            w.f64(s.latency_ms)
            w.text(s.ue_id)
            w.text(s.cell_id)
    elif isinstance(msg, ControlRequest):
        w.u32(msg.ctrl_id)
        w.text(msg.target_cell)
        w.blob(msg.payload)
    elif isinstance(msg, ControlAck):
        w.u32(msg.ctrl_id)
        w.u8(msg.outcome)
    elif isinstance(msg, Disconnect):
        w.u8(msg.reason)
    elif isinstance(msg, ProtocolError):
        w.u16(msg.code)
        w.text(msg.detail)
    else:
        raise EncodeError(f"not an E2Message: {msg!r}")


def _decode_metric_layer(wire_id: int) -> MetricLayer:
    try:
        return MetricLayer(wire_id)
    except ValueError:
        raise CorruptPayload(f"unknown metric layer id {wire_id}") from None


def _decode_body(kind, r: _Reader) -> E2Message:
    if kind is Setup:
        agent_id = r.text()
        funcs = tuple(r.u16() for _ in range(r.u16()))
        return Setup(agent_id, funcs)
    if kind is SetupAck:
        return SetupAck(r.text())
    if kind is SubscriptionRequest:
        sub_id = r.u32()
        period = r.u32()
        layers = frozenset(_decode_metric_layer(r.u16()) for _ in range(r.u16()))
        flag = r.u8()
        if flag not in (0, 1):
            raise CorruptPayload(f"bad optional-field flag {flag}")
        cell = r.text() if flag else None
        try:
            spec = SubscriptionSpec(period, layers, cell)
        except ValueError as exc:
            raise CorruptPayload(str(exc)) from None
        return SubscriptionRequest(sub_id, spec)
    if kind is SubscriptionResponse:
        sub_id = r.u32()
        flag = r.u8()
        if flag not in (0, 1):
            raise CorruptPayload(f"bad boolean byte {flag}")
        return SubscriptionResponse(sub_id, bool(flag), r.text())
    if kind is Indication:
        sub_id = r.u32()
        seq = r.u64()
        n = r.u16()
        samples = []
        for _ in range(n):
            t = r.u64()
            layer = _decode_metric_layer(r.u16())
            latency = r.f64()
            if not math.isfinite(latency) or latency < 0:
                raise CorruptPayload(f"latency must be finite and >= 0, got {latency}")
            ue = r.text()
            cell = r.text()
            samples.append(MetricSample(t, layer, latency, ue, cell))
        return Indication(sub_id, seq, tuple(samples))
    if kind is ControlRequest:
        return ControlRequest(r.u32(), r.text(), r.blob())
    if kind is ControlAck:
        ctrl_id = r.u32()
        outcome = r.u8()
        if outcome not in (0, 1):
            raise CorruptPayload(f"bad control outcome {outcome}")
        return ControlAck(ctrl_id, outcome)
    if kind is Disconnect:
        return Disconnect(r.u8())
    if kind is ProtocolError:
        return ProtocolError(r.u16(), r.text())
    raise CorruptPayload(f"unhandled kind {kind}")  # pragma: no cover


# -- public API --------------------------------------------------------


def encode(msg: E2Message) -> bytes:
    """Frame a message; deterministic and all-or-nothing."""
    code = _KIND_CODES.get(type(msg))
    if code is None:
        raise EncodeError(f"not an E2Message: {type(msg).__name__}")
    w = _Writer()
    _encode_body(msg, w)
    payload = w.payload()
    if len(payload) > MAX_PAYLOAD:
        raise EncodeError(f"payload {len(payload)} exceeds max frame {MAX_PAYLOAD}")
    return MAGIC + bytes([VERSION, code]) + struct.pack(">I", len(payload)) + payload


def decode(buf: bytes) -> Tuple[E2Message, int]:
    """Decode one frame from the head of buf; returns (message, consumed).

    Raises NeedMoreBytes when the buffer ends mid-frame and a DecodeError
    subclass for corruption; never reads past the declared frame length.
    """
    # report corruption as soon as the available prefix proves it
    if buf[:2] != MAGIC[: min(len(buf), 2)]:
        raise BadMagic(f"expected {MAGIC.hex()}, got {buf[:2].hex()}")
    if len(buf) < HEADER_LEN:
        raise NeedMoreBytes(f"have {len(buf)} bytes, header needs {HEADER_LEN}")
    if buf[2] != VERSION:
        raise UnsupportedVersion(f"version {buf[2]}, only {VERSION} supported")
    kind = _CODE_KINDS.get(buf[3])
    if kind is None:
        raise CorruptPayload(f"unknown message kind 0x{buf[3]:02x}")
    length = struct.unpack(">I", buf[4:8])[0]
    if length > MAX_PAYLOAD:
        raise FrameTooLarge(f"declared payload {length} exceeds {MAX_PAYLOAD}")
    end = HEADER_LEN + length
    if len(buf) < end:
        raise NeedMoreBytes(f"have {len(buf)} bytes, frame needs {end}")
    r = _Reader(buf[HEADER_LEN:end])
    msg = _decode_body(kind, r)
    r.done()
    return msg, end


class FrameBuffer:
    """Incremental reassembly of frames from a byte stream."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[E2Message]:
        """Append stream bytes; return every complete message now available."""
        self._buf.extend(data)
        out = []
        while self._buf:
            try:
                msg, used = decode(bytes(self._buf))
            except NeedMoreBytes:
                break
            del self._buf[:used]
            out.append(msg)
        return out
