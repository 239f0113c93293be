"""E2-lite: framed wire protocol and connection state machine."""

from .codec import (
    BadMagic,
    CorruptPayload,
    DecodeError,
    EncodeError,
    FrameBuffer,
    FrameTooLarge,
    NeedMoreBytes,
    UnsupportedVersion,
    decode,
    encode,
)
from .messages import (
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
    to_jsonable,
)
from .statemachine import E2ConnectionState, Phase, Side, handle, record_outbound

__all__ = [
    "BadMagic",
    "ControlAck",
    "ControlRequest",
    "CorruptPayload",
    "DecodeError",
    "Disconnect",
    "E2ConnectionState",
    "E2Message",
    "EncodeError",
    "FrameBuffer",
    "FrameTooLarge",
    "Indication",
    "NeedMoreBytes",
    "Phase",
    "ProtocolError",
    "Setup",
    "SetupAck",
    "Side",
    "SubscriptionRequest",
    "SubscriptionResponse",
    "SubscriptionSpec",
    "UnsupportedVersion",
    "decode",
    "encode",
    "handle",
    "record_outbound",
    "to_jsonable",
]
