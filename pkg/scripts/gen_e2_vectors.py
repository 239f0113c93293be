#!/usr/bin/env python3
"""Regenerate the E2-lite conformance vectors.

Writes testdata/e2-vectors.bin (concatenated frames), a companion
e2-vectors.jsonl with one expected decode per line, and a short format
description. Run from the repository root after any codec change.
"""

from __future__ import annotations

import json
from pathlib import Path

from oranlab.e2lite import codec, messages as m
from oranlab.metrics import MetricLayer, MetricSample

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "testdata"


def vectors() -> list[m.E2Message]:
    return [
        m.Setup("gnb-bs-ag", (1, 2, 3)),
        m.Setup("", ()),  # empty agent id and function list
        m.Setup("agent-привет-🌾", (3, 500)),  # unicode id, reserved function id
        m.SetupAck("ric-0"),
        m.SubscriptionRequest(
            1, m.SubscriptionSpec(100, frozenset({MetricLayer.RLC, MetricLayer.PDCP, MetricLayer.MAC}))
        ),
        m.SubscriptionRequest(
            2, m.SubscriptionSpec(1, frozenset({MetricLayer.MAC}), cell_filter="cell-bs-ag")
        ),
        m.SubscriptionResponse(2, True, ""),
        m.SubscriptionResponse(7, False, "metric ids [9] not declared by agent"),
        m.Indication(1, 1, ()),
        m.Indication(
            1,
            2,
            (
                MetricSample(0, MetricLayer.RLC, 4.0, "ue-ag-1", "cell-bs-ag"),
                MetricSample(100, MetricLayer.PDCP, 5.25, "ue-ag-1", "cell-bs-ag"),
                MetricSample(100, MetricLayer.MAC, 0.0, "ue-ag-2", "cell-bs-ag"),
            ),
        ),
        m.Indication(4294967295, 18446744073709551615, ()),  # max ids
        m.ControlRequest(1, "cell-bs-ag", b"\x00\x01\xff"),
        m.ControlRequest(2, "", b""),
        m.ControlAck(1, 0),
        m.ControlAck(2, 1),
        m.Disconnect(0),
        m.Disconnect(3),
        m.ProtocolError(1, "unexpected SubscriptionRequest in IDLE"),
        m.ProtocolError(65535, ""),
    ]


def main():
    OUT.mkdir(exist_ok=True)
    frames = []
    lines = []
    for msg in vectors():
        frame = codec.encode(msg)
        decoded, used = codec.decode(frame)
        assert decoded == msg and used == len(frame), msg
        frames.append(frame)
        lines.append(json.dumps({"hex": frame.hex(), "expected": m.to_jsonable(msg)},
                                sort_keys=True))
    (OUT / "e2-vectors.bin").write_bytes(b"".join(frames))
    (OUT / "e2-vectors.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (OUT / "e2-vectors.md").write_text(
        "# E2-lite conformance vectors\n\n"
        "`e2-vectors.bin` holds back-to-back frames; decode them in order\n"
        "with the framing rules (magic 0x45 0x32, version 0x01, kind byte,\n"
        "4-byte big-endian payload length, payload). `e2-vectors.jsonl`\n"
        "carries one line per frame: the frame hex and the expected decode\n"
        f"as stable JSON. {len(frames)} frames, covering every message kind,\n"
        "empty/maximal fields, unicode text and reserved metric-set ids.\n",
        encoding="utf-8",
    )
    print(f"wrote {len(frames)} vectors to {OUT}")


if __name__ == "__main__":
    main()
