"""Socket framing helpers shared by the broker and the client."""

from __future__ import annotations

import socket

from .errors import MalformedPacket


def recv_exact(sock: socket.socket, n: int) -> bytes:
    """Read exactly ``n`` bytes or raise ConnectionError on EOF."""
    chunks = bytearray()
    while len(chunks) < n:
        chunk = sock.recv(n - len(chunks))
        if not chunk:
            raise ConnectionError("connection closed mid-packet")
        chunks += chunk
    return bytes(chunks)


def read_frame(sock: socket.socket) -> bytes | None:
    """Read one whole control packet off the socket.

    Returns the raw packet bytes (fixed header included), or None on a
    clean EOF at a packet boundary.
    """
    try:
        first = sock.recv(1)
    except (ConnectionResetError, BrokenPipeError):
        return None
    if not first:
        return None
    header = bytearray(first)
    remaining = 0
    multiplier = 1
    for _ in range(4):
        byte = recv_exact(sock, 1)[0]
        header.append(byte)
        remaining += (byte & 0x7F) * multiplier
        multiplier *= 128
        if not byte & 0x80:
            break
    else:
        raise MalformedPacket("remaining length uses more than 4 bytes")
    if remaining:
        header += recv_exact(sock, remaining)
    return bytes(header)
