"""MQTT 3.1.1 wire codec with the geolocation extension.

Implements bit-exact encoding and decoding of all fifteen control packet
types: the fourteen standard ones plus PUBLISHG (type 0xF), a PUBLISH
variant carrying a 21-byte geolocation block between the variable header
and the payload. On the other geo-capable types the block is signalled by
fixed-header flag bit 2 (mask 0x04). Packets without geolocation encode
byte-identically to plain MQTT 3.1.1.

MQTT's own integers are big-endian; the geolocation fields (and the
radius/latitude/longitude of geo-constrained subscription filters) are
little-endian IEEE-754.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Union

from .errors import (
    EncodeError,
    InvalidCoordinates,
    MalformedPacket,
    ProtocolViolation,
    ValueTooLarge,
)
from .topics import topic_filter_valid, topic_name_valid

MAX_REMAINING_LENGTH = 268_435_455
GEO_BLOCK_SIZE = 21
GEO_FLAG = 0x04
GEO_FILTER_FLAG = 0x04  # bit 2 of a SUBSCRIBE entry's QoS byte
GEO_FILTER_EXTRA = 21  # kind byte + f32 radius + f64 lat + f64 lon


class PacketType(IntEnum):
    CONNECT = 1
    CONNACK = 2
    PUBLISH = 3
    PUBACK = 4
    PUBREC = 5
    PUBREL = 6
    PUBCOMP = 7
    SUBSCRIBE = 8
    SUBACK = 9
    UNSUBSCRIBE = 10
    UNSUBACK = 11
    PINGREQ = 12
    PINGRESP = 13
    DISCONNECT = 14
    PUBLISHG = 15


#: Types that may carry the 21-byte geolocation block.
GEO_CAPABLE_TYPES = frozenset(
    {
        PacketType.PUBLISHG,
        PacketType.PUBACK,
        PacketType.PUBREC,
        PacketType.PUBREL,
        PacketType.PUBCOMP,
        PacketType.SUBSCRIBE,
        PacketType.UNSUBSCRIBE,
        PacketType.PINGREQ,
        PacketType.DISCONNECT,
    }
)

# Mandated fixed-header flag nibbles (before the geolocation bit).
_BASE_FLAGS = {
    PacketType.CONNECT: 0x0,
    PacketType.CONNACK: 0x0,
    PacketType.PUBACK: 0x0,
    PacketType.PUBREC: 0x0,
    PacketType.PUBREL: 0x2,
    PacketType.PUBCOMP: 0x0,
    PacketType.SUBSCRIBE: 0x2,
    PacketType.SUBACK: 0x0,
    PacketType.UNSUBSCRIBE: 0x2,
    PacketType.UNSUBACK: 0x0,
    PacketType.PINGREQ: 0x0,
    PacketType.PINGRESP: 0x0,
    PacketType.DISCONNECT: 0x0,
}


class ConstraintKind(IntEnum):
    INSIDE_RADIUS = 0x00
    OUTSIDE_RADIUS = 0x01


def _f32(value: float) -> float:
    return struct.unpack("<f", struct.pack("<f", value))[0]


def coordinates_valid(latitude: float, longitude: float) -> bool:
    return (
        math.isfinite(latitude)
        and math.isfinite(longitude)
        and -90.0 <= latitude <= 90.0
        and -180.0 <= longitude <= 180.0
    )


@dataclass(frozen=True)
class GeoLocation:
    """The 21-byte version/latitude/longitude/elevation record.

    Coordinates are decimal degrees; elevation is meters above sea level
    and is rounded to 32-bit float precision on construction so that
    encode/decode is the identity. Blocks with an unknown version decode
    structurally and keep their raw bytes for verbatim re-encoding.
    """

    version: int = 1
    latitude: float = 0.0
    longitude: float = 0.0
    elevation: float = 0.0
    raw: bytes | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "elevation", _f32(self.elevation))

    @property
    def is_evaluable(self) -> bool:
        """Only version-1 blocks take part in geofence evaluation."""
        return self.version == 1


@dataclass(frozen=True)
class GeoConstraint:
    """Radius constraint of a geo-capable subscription filter."""

    kind: ConstraintKind
    radius: float  # meters, > 0
    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "radius", _f32(self.radius))


@dataclass(frozen=True)
class TopicFilter:
    topic: str
    qos: int = 0
    constraint: GeoConstraint | None = None


@dataclass(frozen=True)
class Will:
    topic: str
    payload: bytes = b""
    qos: int = 0
    retain: bool = False


@dataclass(frozen=True)
class Connect:
    client_id: str
    clean_session: bool = True
    keep_alive: int = 60
    will: Will | None = None
    username: str | None = None
    password: bytes | None = None
    protocol_level: int = 4


@dataclass(frozen=True)
class Connack:
    session_present: bool = False
    return_code: int = 0


@dataclass(frozen=True)
class Publish:
    topic: str
    payload: bytes = b""
    qos: int = 0
    retain: bool = False
    dup: bool = False
    packet_id: int | None = None


@dataclass(frozen=True)
class PubAck:
    packet_id: int


@dataclass(frozen=True)
class PubRec:
    packet_id: int


@dataclass(frozen=True)
class PubRel:
    packet_id: int


@dataclass(frozen=True)
class PubComp:
    packet_id: int


@dataclass(frozen=True)
class Subscribe:
    packet_id: int
    filters: tuple[TopicFilter, ...]


@dataclass(frozen=True)
class Suback:
    packet_id: int
    return_codes: tuple[int, ...]


@dataclass(frozen=True)
class Unsubscribe:
    packet_id: int
    topics: tuple[str, ...]


@dataclass(frozen=True)
class Unsuback:
    packet_id: int


@dataclass(frozen=True)
class Pingreq:
    pass


@dataclass(frozen=True)
class Pingresp:
    pass


@dataclass(frozen=True)
class Disconnect:
    pass


Body = Union[
    Connect,
    Connack,
    Publish,
    PubAck,
    PubRec,
    PubRel,
    PubComp,
    Subscribe,
    Suback,
    Unsubscribe,
    Unsuback,
    Pingreq,
    Pingresp,
    Disconnect,
]

_BODY_TYPES = {
    Connect: PacketType.CONNECT,
    Connack: PacketType.CONNACK,
    PubAck: PacketType.PUBACK,
    PubRec: PacketType.PUBREC,
    PubRel: PacketType.PUBREL,
    PubComp: PacketType.PUBCOMP,
    Subscribe: PacketType.SUBSCRIBE,
    Suback: PacketType.SUBACK,
    Unsubscribe: PacketType.UNSUBSCRIBE,
    Unsuback: PacketType.UNSUBACK,
    Pingreq: PacketType.PINGREQ,
    Pingresp: PacketType.PINGRESP,
    Disconnect: PacketType.DISCONNECT,
}


@dataclass(frozen=True)
class FixedHeader:
    packet_type: PacketType
    flags: int
    remaining_length: int


@dataclass(frozen=True)
class ControlPacket:
    """A decoded (or to-be-encoded) control packet.

    A Publish body with a geolocation encodes as PUBLISHG; without one it
    is a plain PUBLISH. For the other geo-capable types the geolocation
    is signalled by fixed-header flag bit 2.
    """

    body: Body
    geolocation: GeoLocation | None = None

    @property
    def packet_type(self) -> PacketType:
        if isinstance(self.body, Publish):
            return PacketType.PUBLISHG if self.geolocation is not None else PacketType.PUBLISH
        return _BODY_TYPES[type(self.body)]


# ---------------------------------------------------------------------------
# Geolocation block
# ---------------------------------------------------------------------------


def encode_geolocation(geo: GeoLocation) -> bytes:
    """Serialize to the 21-byte little-endian layout.

    Order: version byte, latitude (f64), longitude (f64), elevation (f32).
    """
    if geo.raw is not None:
        if len(geo.raw) != GEO_BLOCK_SIZE:
            raise EncodeError(f"raw geolocation block must be {GEO_BLOCK_SIZE} bytes")
        return geo.raw
    if not 0 <= geo.version <= 255:
        raise EncodeError(f"geolocation version {geo.version} does not fit a byte")
    if geo.version == 1 and not coordinates_valid(geo.latitude, geo.longitude):
        raise EncodeError(
            f"coordinates out of range: lat={geo.latitude} lon={geo.longitude}"
        )
    return struct.pack("<Bddf", geo.version, geo.latitude, geo.longitude, geo.elevation)


def decode_geolocation(data: bytes) -> GeoLocation:
    """Parse the first 21 bytes of ``data`` as a geolocation block."""
    if len(data) < GEO_BLOCK_SIZE:
        raise MalformedPacket(
            f"geolocation block truncated: {len(data)} of {GEO_BLOCK_SIZE} bytes"
        )
    version = data[0]
    latitude, longitude, elevation = struct.unpack_from("<ddf", data, 1)
    if version == 1:
        if not coordinates_valid(latitude, longitude):
            raise InvalidCoordinates(
                f"latitude {latitude!r} / longitude {longitude!r} out of range"
            )
        return GeoLocation(version, latitude, longitude, elevation)
    # Unknown layout versions are preserved verbatim and flagged unevaluable.
    return GeoLocation(version, latitude, longitude, elevation, raw=bytes(data[:GEO_BLOCK_SIZE]))


# ---------------------------------------------------------------------------
# Remaining-length variable integer
# ---------------------------------------------------------------------------


def encode_remaining_length(n: int) -> bytes:
    if n < 0 or n > MAX_REMAINING_LENGTH:
        raise ValueTooLarge(f"remaining length {n} outside [0, {MAX_REMAINING_LENGTH}]")
    out = bytearray()
    while True:
        n, digit = divmod(n, 128)
        out.append(digit | 0x80 if n else digit)
        if not n:
            return bytes(out)


def decode_remaining_length(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Return (value, next offset); at most four bytes are consumed."""
    value = 0
    multiplier = 1
    for i in range(4):
        if offset + i >= len(data):
            raise MalformedPacket("truncated remaining length")
        byte = data[offset + i]
        value += (byte & 0x7F) * multiplier
        multiplier *= 128
        if not byte & 0x80:
            return value, offset + i + 1
    raise MalformedPacket("remaining length uses more than 4 bytes")


# ---------------------------------------------------------------------------
# Primitive readers/writers
# ---------------------------------------------------------------------------


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if self.remaining() < n:
            raise MalformedPacket(f"packet truncated: wanted {n} bytes, have {self.remaining()}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def string(self) -> str:
        raw = self.take(self.u16())
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedPacket(f"invalid UTF-8 in string: {exc}") from None
        if "\x00" in text:
            raise MalformedPacket("string contains U+0000")
        return text

    def binary(self) -> bytes:
        return self.take(self.u16())

    def geolocation(self) -> GeoLocation:
        return decode_geolocation(self.take(GEO_BLOCK_SIZE))

    def expect_end(self, what: str) -> None:
        if self.remaining():
            raise MalformedPacket(f"{self.remaining()} unexpected trailing bytes in {what}")


def _string(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 65535:
        raise EncodeError("string longer than 65535 bytes")
    if "\x00" in text:
        raise EncodeError("string contains U+0000")
    return struct.pack(">H", len(raw)) + raw


def _binary(data: bytes) -> bytes:
    if len(data) > 65535:
        raise EncodeError("binary field longer than 65535 bytes")
    return struct.pack(">H", len(data)) + data


def _u16(value: int, what: str) -> bytes:
    if not 0 <= value <= 65535:
        raise EncodeError(f"{what} {value} does not fit 16 bits")
    return struct.pack(">H", value)


def _packet_id(value: int | None, what: str) -> bytes:
    if value is None or not 1 <= value <= 65535:
        raise EncodeError(f"{what} requires a packet identifier in [1, 65535], got {value}")
    return struct.pack(">H", value)


# ---------------------------------------------------------------------------
# Packet encoding
# ---------------------------------------------------------------------------


def encode_packet(packet: ControlPacket) -> bytes:
    """Serialize a control packet, geolocation block included.

    Raises EncodeError naming the violated invariant when the packet
    cannot be represented on the wire.
    """
    ptype = packet.packet_type
    geo = packet.geolocation
    if geo is not None and ptype not in GEO_CAPABLE_TYPES:
        raise EncodeError(f"{ptype.name} never carries geolocation")
    geo_bytes = encode_geolocation(geo) if geo is not None else b""

    body = packet.body
    if isinstance(body, Publish):
        flags, payload = _encode_publish(body, geo_bytes)
    elif isinstance(body, Connect):
        flags, payload = 0x0, _encode_connect(body)
    elif isinstance(body, Connack):
        flags, payload = 0x0, _encode_connack(body)
    elif isinstance(body, (PubAck, PubRec, PubRel, PubComp)):
        flags = _BASE_FLAGS[ptype]
        payload = _packet_id(body.packet_id, ptype.name) + geo_bytes
    elif isinstance(body, Subscribe):
        flags, payload = 0x2, _encode_subscribe(body, geo_bytes)
    elif isinstance(body, Suback):
        flags, payload = 0x0, _encode_suback(body)
    elif isinstance(body, Unsubscribe):
        flags, payload = 0x2, _encode_unsubscribe(body, geo_bytes)
    elif isinstance(body, Unsuback):
        flags, payload = 0x0, _packet_id(body.packet_id, "UNSUBACK")
    elif isinstance(body, (Pingreq, Pingresp, Disconnect)):
        flags, payload = 0x0, geo_bytes
    else:  # pragma: no cover - exhaustive over Body
        raise EncodeError(f"unknown body type {type(body).__name__}")

    if geo is not None and ptype is not PacketType.PUBLISHG:
        flags |= GEO_FLAG
    return bytes([(ptype << 4) | flags]) + encode_remaining_length(len(payload)) + payload


def _encode_publish(body: Publish, geo_bytes: bytes) -> tuple[int, bytes]:
    if not topic_name_valid(body.topic):
        raise EncodeError(f"invalid publish topic {body.topic!r}")
    if body.qos not in (0, 1, 2):
        raise EncodeError(f"QoS {body.qos} not in (0, 1, 2)")
    if body.qos == 0 and body.dup:
        raise EncodeError("DUP must be 0 on a QoS 0 publish")
    if body.qos == 0 and body.packet_id is not None:
        raise EncodeError("packet identifier requires QoS > 0")
    out = bytearray(_string(body.topic))
    if body.qos > 0:
        out += _packet_id(body.packet_id, "publish with QoS > 0")
    out += geo_bytes
    out += body.payload
    flags = (body.dup << 3) | (body.qos << 1) | int(body.retain)
    return flags, bytes(out)


def _encode_connect(body: Connect) -> bytes:
    if not 0 <= body.keep_alive <= 65535:
        raise EncodeError(f"keep_alive {body.keep_alive} does not fit 16 bits")
    connect_flags = 0x02 if body.clean_session else 0x00
    payload = bytearray(_string(body.client_id))
    if body.will is not None:
        if not topic_name_valid(body.will.topic):
            raise EncodeError(f"invalid will topic {body.will.topic!r}")
        if body.will.qos not in (0, 1, 2):
            raise EncodeError(f"will QoS {body.will.qos} not in (0, 1, 2)")
        connect_flags |= 0x04 | (body.will.qos << 3) | (int(body.will.retain) << 5)
        payload += _string(body.will.topic)
        payload += _binary(body.will.payload)
    if body.username is not None:
        connect_flags |= 0x80
        payload += _string(body.username)
    if body.password is not None:
        if body.username is None:
            raise EncodeError("password requires a username")
        connect_flags |= 0x40
        payload += _binary(body.password)
    head = _string("MQTT") + bytes([body.protocol_level, connect_flags]) + _u16(
        body.keep_alive, "keep_alive"
    )
    return head + payload


def _encode_connack(body: Connack) -> bytes:
    if not 0 <= body.return_code <= 255:
        raise EncodeError(f"CONNACK return code {body.return_code} does not fit a byte")
    return bytes([int(body.session_present), body.return_code])


def _encode_filter_entry(f: TopicFilter) -> bytes:
    if not topic_filter_valid(f.topic):
        raise EncodeError(f"invalid topic filter {f.topic!r}")
    if f.qos not in (0, 1, 2):
        raise EncodeError(f"requested QoS {f.qos} not in (0, 1, 2)")
    out = bytearray(_string(f.topic))
    if f.constraint is None:
        out.append(f.qos)
        return bytes(out)
    c = f.constraint
    if not (math.isfinite(c.radius) and c.radius > 0):
        raise EncodeError(f"geo filter radius must be > 0, got {c.radius}")
    if not coordinates_valid(c.latitude, c.longitude):
        raise EncodeError(
            f"geo filter center out of range: lat={c.latitude} lon={c.longitude}"
        )
    out.append(GEO_FILTER_FLAG | f.qos)
    out.append(int(c.kind))
    out += struct.pack("<f", c.radius)
    out += struct.pack("<d", c.latitude)
    out += struct.pack("<d", c.longitude)
    return bytes(out)


def _encode_subscribe(body: Subscribe, geo_bytes: bytes) -> bytes:
    if not body.filters:
        raise EncodeError("SUBSCRIBE requires at least one topic filter")
    out = bytearray(_packet_id(body.packet_id, "SUBSCRIBE"))
    out += geo_bytes
    for f in body.filters:
        out += _encode_filter_entry(f)
    return bytes(out)


def _encode_suback(body: Suback) -> bytes:
    if not body.return_codes:
        raise EncodeError("SUBACK requires at least one return code")
    for code in body.return_codes:
        if code not in (0x00, 0x01, 0x02, 0x80):
            raise EncodeError(f"invalid SUBACK return code 0x{code:02x}")
    return _packet_id(body.packet_id, "SUBACK") + bytes(body.return_codes)


def _encode_unsubscribe(body: Unsubscribe, geo_bytes: bytes) -> bytes:
    if not body.topics:
        raise EncodeError("UNSUBSCRIBE requires at least one topic filter")
    out = bytearray(_packet_id(body.packet_id, "UNSUBSCRIBE"))
    out += geo_bytes
    for topic in body.topics:
        if not topic_filter_valid(topic):
            raise EncodeError(f"invalid topic filter {topic!r}")
        out += _string(topic)
    return bytes(out)


# ---------------------------------------------------------------------------
# Packet decoding
# ---------------------------------------------------------------------------


def decode_fixed_header(data: bytes) -> tuple[FixedHeader, int]:
    """Parse the first byte and remaining length; returns (header, body offset)."""
    if not data:
        raise MalformedPacket("empty input")
    type_code = data[0] >> 4
    if type_code == 0:
        raise ProtocolViolation("packet type 0 is invalid")
    remaining, offset = decode_remaining_length(data, 1)
    return FixedHeader(PacketType(type_code), data[0] & 0x0F, remaining), offset


def decode_packet(data: bytes) -> ControlPacket:
    """Parse exactly one control packet from ``data``.

    Inverse of encode_packet. Raises MalformedPacket on truncation or
    trailing bytes, ProtocolViolation on reserved-flag or packet-rule
    breaches, InvalidCoordinates on out-of-range version-1 coordinates.
    """
    header, offset = decode_fixed_header(data)
    if len(data) - offset != header.remaining_length:
        raise MalformedPacket(
            f"remaining length {header.remaining_length} does not match "
            f"{len(data) - offset} body bytes"
        )
    reader = _Reader(data[offset : offset + header.remaining_length])
    ptype, flags = header.packet_type, header.flags

    if ptype in (PacketType.PUBLISH, PacketType.PUBLISHG):
        return _decode_publish(ptype, flags, reader)

    base = _BASE_FLAGS[ptype]
    if flags != base and not (flags == (base | GEO_FLAG) and ptype in GEO_CAPABLE_TYPES):
        raise ProtocolViolation(f"invalid fixed-header flags 0x{flags:x} for {ptype.name}")
    has_geo = flags != base
    geo: GeoLocation | None

    if ptype is PacketType.CONNECT:
        packet = ControlPacket(_decode_connect(reader))
    elif ptype is PacketType.CONNACK:
        packet = ControlPacket(_decode_connack(reader))
    elif ptype in (
        PacketType.PUBACK,
        PacketType.PUBREC,
        PacketType.PUBREL,
        PacketType.PUBCOMP,
    ):
        body_cls = {
            PacketType.PUBACK: PubAck,
            PacketType.PUBREC: PubRec,
            PacketType.PUBREL: PubRel,
            PacketType.PUBCOMP: PubComp,
        }[ptype]
        pid = _read_packet_id(reader, ptype.name)
        geo = reader.geolocation() if has_geo else None
        packet = ControlPacket(body_cls(pid), geo)
    elif ptype is PacketType.SUBSCRIBE:
        pid = _read_packet_id(reader, "SUBSCRIBE")
        geo = reader.geolocation() if has_geo else None
        packet = ControlPacket(Subscribe(pid, _decode_filter_entries(reader)), geo)
    elif ptype is PacketType.SUBACK:
        packet = ControlPacket(_decode_suback(reader))
    elif ptype is PacketType.UNSUBSCRIBE:
        pid = _read_packet_id(reader, "UNSUBSCRIBE")
        geo = reader.geolocation() if has_geo else None
        topics = []
        while reader.remaining():
            topics.append(reader.string())
        if not topics:
            raise ProtocolViolation("UNSUBSCRIBE with no topic filters")
        packet = ControlPacket(Unsubscribe(pid, tuple(topics)), geo)
    elif ptype is PacketType.UNSUBACK:
        packet = ControlPacket(Unsuback(_read_packet_id(reader, "UNSUBACK")))
    elif ptype in (PacketType.PINGREQ, PacketType.PINGRESP, PacketType.DISCONNECT):
        body = {
            PacketType.PINGREQ: Pingreq,
            PacketType.PINGRESP: Pingresp,
            PacketType.DISCONNECT: Disconnect,
        }[ptype]()
        geo = reader.geolocation() if has_geo else None
        packet = ControlPacket(body, geo)
    else:  # pragma: no cover - all types handled
        raise MalformedPacket(f"unhandled packet type {ptype}")

    reader.expect_end(ptype.name)
    return packet


def _read_packet_id(reader: _Reader, what: str) -> int:
    pid = reader.u16()
    if pid == 0:
        raise ProtocolViolation(f"{what} packet identifier must be non-zero")
    return pid


def _decode_publish(ptype: PacketType, flags: int, reader: _Reader) -> ControlPacket:
    dup = bool(flags & 0x08)
    qos = (flags >> 1) & 0x03
    retain = bool(flags & 0x01)
    if qos == 3:
        raise ProtocolViolation("publish QoS 3 is invalid")
    if qos == 0 and dup:
        raise ProtocolViolation("DUP set on a QoS 0 publish")
    topic = reader.string()
    if not topic_name_valid(topic):
        raise ProtocolViolation(f"invalid publish topic {topic!r}")
    packet_id = _read_packet_id(reader, "publish with QoS > 0") if qos > 0 else None
    geo = reader.geolocation() if ptype is PacketType.PUBLISHG else None
    payload = reader.take(reader.remaining())
    body = Publish(topic, payload, qos, retain, dup, packet_id)
    return ControlPacket(body, geo)


def _decode_connect(reader: _Reader) -> Connect:
    protocol = reader.string()
    if protocol != "MQTT":
        raise MalformedPacket(f"unexpected protocol name {protocol!r}")
    level = reader.u8()
    connect_flags = reader.u8()
    if connect_flags & 0x01:
        raise MalformedPacket("CONNECT reserved flag bit set")
    keep_alive = reader.u16()
    client_id = reader.string()
    clean_session = bool(connect_flags & 0x02)
    will = None
    if connect_flags & 0x04:
        will_qos = (connect_flags >> 3) & 0x03
        if will_qos == 3:
            raise MalformedPacket("will QoS 3 is invalid")
        will_topic = reader.string()
        will_payload = reader.binary()
        will = Will(will_topic, will_payload, will_qos, bool(connect_flags & 0x20))
    elif connect_flags & 0x38:
        raise MalformedPacket("will QoS/retain set without will flag")
    username = reader.string() if connect_flags & 0x80 else None
    password = reader.binary() if connect_flags & 0x40 else None
    if password is not None and username is None:
        raise MalformedPacket("password flag set without username flag")
    return Connect(client_id, clean_session, keep_alive, will, username, password, level)


def _decode_connack(reader: _Reader) -> Connack:
    ack_flags = reader.u8()
    if ack_flags & 0xFE:
        raise MalformedPacket("CONNACK acknowledge flags bits 1-7 must be 0")
    return Connack(bool(ack_flags & 0x01), reader.u8())


def _decode_filter_entries(reader: _Reader) -> tuple[TopicFilter, ...]:
    filters = []
    while reader.remaining():
        topic = reader.string()
        qos_byte = reader.u8()
        if qos_byte & ~(GEO_FILTER_FLAG | 0x03):
            raise ProtocolViolation(f"reserved bits set in QoS byte 0x{qos_byte:02x}")
        qos = qos_byte & 0x03
        if qos == 3:
            raise ProtocolViolation("requested QoS 3 is invalid")
        constraint = None
        if qos_byte & GEO_FILTER_FLAG:
            kind_byte = reader.u8()
            try:
                kind = ConstraintKind(kind_byte)
            except ValueError:
                raise MalformedPacket(f"unknown geo filter kind 0x{kind_byte:02x}") from None
            radius = struct.unpack("<f", reader.take(4))[0]
            latitude = struct.unpack("<d", reader.take(8))[0]
            longitude = struct.unpack("<d", reader.take(8))[0]
            if not (math.isfinite(radius) and radius > 0):
                raise MalformedPacket(f"geo filter radius must be > 0, got {radius!r}")
            if not coordinates_valid(latitude, longitude):
                raise InvalidCoordinates(
                    f"geo filter center out of range: lat={latitude!r} lon={longitude!r}"
                )
            constraint = GeoConstraint(kind, radius, latitude, longitude)
        filters.append(TopicFilter(topic, qos, constraint))
    if not filters:
        raise ProtocolViolation("SUBSCRIBE with no topic filters")
    return tuple(filters)


def _decode_suback(reader: _Reader) -> Suback:
    pid = _read_packet_id(reader, "SUBACK")
    codes = tuple(reader.take(reader.remaining()))
    if not codes:
        raise MalformedPacket("SUBACK with no return codes")
    for code in codes:
        if code not in (0x00, 0x01, 0x02, 0x80):
            raise MalformedPacket(f"invalid SUBACK return code 0x{code:02x}")
    return Suback(pid, codes)
