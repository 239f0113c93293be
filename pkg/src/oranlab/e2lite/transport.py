"""Byte-stream transport for E2-lite.

A small threaded TCP listener so external (bring-your-own-device) agents
can connect to the RIC with nothing but a socket and the framing codec,
plus a matching blocking client. In-process simulations bypass this and
exchange encoded frames directly.
"""

from __future__ import annotations

import queue
import socket
import threading
from typing import Callable, Optional

from .codec import DecodeError, FrameBuffer, encode
from .messages import E2Message, ProtocolError, Disconnect, REASON_ERROR

RECV_CHUNK = 4096


class TcpPeer:
    """One connected peer; thread-safe send of framed messages."""

    def __init__(self, sock: socket.socket, addr):
        self._sock = sock
        self.addr = addr
        self._send_lock = threading.Lock()
        self.closed = False

    def send(self, msg: E2Message):
        with self._send_lock:
            if not self.closed:
                try:
                    self._sock.sendall(encode(msg))
                except OSError:
                    self.closed = True

    def close(self):
        with self._send_lock:
            self.closed = True
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()


class E2TcpListener:
    """Accepts agent connections and pumps decoded messages to a sink.

    on_connect(peer) must return a sink object with on_message(msg) and
    on_close() callables.
    """

    def __init__(self, host: str, port: int, on_connect: Callable[[TcpPeer], object]):
        self._on_connect = on_connect
        self._server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._server.bind((host, port))
        self._server.listen()
        self.address = self._server.getsockname()[:2]
        self._accept_thread: Optional[threading.Thread] = None
        self._running = False
        self._peers: list[TcpPeer] = []

    def start(self):
        self._running = True
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def _accept_loop(self):
        while self._running:
            try:
                sock, addr = self._server.accept()
            except OSError:
                break
            peer = TcpPeer(sock, addr)
            self._peers.append(peer)
            threading.Thread(target=self._peer_loop, args=(sock, peer), daemon=True).start()

    def _peer_loop(self, sock: socket.socket, peer: TcpPeer):
        sink = self._on_connect(peer)
        buf = FrameBuffer()
        try:
            while True:
                data = sock.recv(RECV_CHUNK)
                if not data:
                    break
                try:
                    msgs = buf.feed(data)
                except DecodeError as exc:
                    # length-delimited framing cannot resync after corruption
                    peer.send(ProtocolError(0, f"unparseable frame: {exc}"))
                    peer.send(Disconnect(REASON_ERROR))
                    break
                for msg in msgs:
                    sink.on_message(msg)
        except OSError:
            pass
        finally:
            peer.close()
            sink.on_close()

    def stop(self):
        self._running = False
        try:
            self._server.close()
        except OSError:
            pass
        for peer in self._peers:
            peer.close()


class E2TcpClient:
    """Blocking client used by external agents and tests."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._inbox: queue.Queue = queue.Queue()
        self._buf = FrameBuffer()
        self._closed = False
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        try:
            while True:
                data = self._sock.recv(RECV_CHUNK)
                if not data:
                    break
                for msg in self._buf.feed(data):
                    self._inbox.put(msg)
        except OSError:
            pass
        self._inbox.put(None)  # EOF marker

    def send(self, msg: E2Message):
        self._sock.sendall(encode(msg))

    def send_raw(self, data: bytes):
        self._sock.sendall(data)

    def recv(self, timeout: float = 5.0) -> Optional[E2Message]:
        """Next decoded message, or None on EOF/timeout."""
        try:
            return self._inbox.get(timeout=timeout)
        except queue.Empty:
            return None

    def close(self):
        if not self._closed:
            self._closed = True
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()
