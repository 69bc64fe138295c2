"""Alert records for blocked frames and their delivery sinks.

Alerts are one JSON object per line, written to an append-only file or sent
as UDP datagrams (``udp:host:port``). Delivery failures are logged and
counted, never fatal.
"""

import json
import logging
import socket
from dataclasses import dataclass

from .analyzer import HeaderSummary
from .frames import int_to_ip

log = logging.getLogger(__name__)

ALERT_KEYS = ("timestamp", "src_mac", "dst_mac", "lev3_prot", "lev4_prot",
              "src_ip", "dst_ip", "src_port", "dst_port", "l3_checksum",
              "l4_checksum", "frame_len", "verdict_code", "reason")


@dataclass(frozen=True)
class AlertRecord:
    timestamp: float
    summary: HeaderSummary
    verdict_code: int
    reason: str = "no-match"

    def as_dict(self):
        s = self.summary
        return {
            "timestamp": round(self.timestamp, 6),
            "src_mac": str(s.src_mac),
            "dst_mac": str(s.dst_mac),
            "lev3_prot": s.lev3_prot,
            "lev4_prot": s.lev4_prot,
            "src_ip": None if s.src_ip is None else int_to_ip(s.src_ip),
            "dst_ip": None if s.dst_ip is None else int_to_ip(s.dst_ip),
            "src_port": s.src_port,
            "dst_port": s.dst_port,
            "l3_checksum": s.l3_checksum_ok.value,
            "l4_checksum": s.l4_checksum_ok.value,
            "frame_len": s.frame_len,
            "verdict_code": self.verdict_code,
            "reason": self.reason,
        }

    def to_json(self):
        return json.dumps(self.as_dict(), separators=(",", ":"))


class FileSink:
    def __init__(self, path):
        self.path = path
        self._fh = None
        self.warnings = 0

    def send(self, line):
        if self._fh is None:
            self._fh = open(self.path, "a")
        self._fh.write(line + "\n")

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


class UdpSink:
    def __init__(self, host, port):
        self.host = host
        self.port = port
        self.warnings = 0
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def send(self, line):
        self._sock.sendto(line.encode(), (self.host, self.port))

    def close(self):
        self._sock.close()


class MemorySink:
    """Collects alert lines in a list; handy for tests and embedding."""

    def __init__(self):
        self.lines = []
        self.warnings = 0

    def send(self, line):
        self.lines.append(line)

    def close(self):
        pass


def open_sink(target):
    if target.startswith("udp:"):
        host, _, port = target[4:].rpartition(":")
        if not host or not port.isdigit():
            raise ValueError("alert sink must look like udp:host:port")
        return UdpSink(host, int(port))
    return FileSink(target)


def emit_alert(record, sink):
    """Deliver one alert. Returns False (and counts a warning) on failure."""
    try:
        sink.send(record.to_json())
    except OSError as exc:
        sink.warnings += 1
        log.warning("alert delivery failed: %s", exc)
        return False
    return True
