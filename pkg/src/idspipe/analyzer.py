"""Ethernet frame analysis: header extraction and checksum verification."""

import enum
import struct
from dataclasses import dataclass
from typing import Optional

from .bus import deserialize_stream
from .checksum import (internet_checksum, ipv4_header_checksum,
                       ones_complement_sum, pseudo_header_sum, verifies)
from .frames import (ETH_HEADER_LEN, ETHERTYPE_ARP, ETHERTYPE_IP,
                     PORTED_PROTOCOLS, PROTO_ICMP, PROTO_TCP, PROTO_UDP,
                     MacAddress)

__all__ = ["ChecksumStatus", "MalformedFrameError", "HeaderSummary",
           "ErrorRecord", "analyze", "analyze_stream", "ipv4_header_checksum",
           "l4_checksum", "verify_checksums"]


class ChecksumStatus(enum.Enum):
    OK = "ok"
    BAD = "bad"
    NOT_APPLICABLE = "n/a"


class MalformedFrameError(ValueError):
    """Frame too short for the headers it declares; ``layer`` is l2/l3/l4."""

    def __init__(self, layer, message):
        super().__init__("%s: %s" % (layer, message))
        self.layer = layer


@dataclass(frozen=True)
class HeaderSummary:
    src_mac: MacAddress
    dst_mac: MacAddress
    lev3_prot: int
    frame_len: int
    lev4_prot: Optional[int] = None
    src_ip: Optional[int] = None
    dst_ip: Optional[int] = None
    src_port: Optional[int] = None
    dst_port: Optional[int] = None
    l3_checksum_ok: ChecksumStatus = ChecksumStatus.NOT_APPLICABLE
    l4_checksum_ok: ChecksumStatus = ChecksumStatus.NOT_APPLICABLE


@dataclass(frozen=True)
class ErrorRecord:
    """A frame that produced no summary (bus error flag or malformed)."""

    index: int
    reason: str
    frame_len: int


_L4_MIN = {PROTO_TCP: 20, PROTO_UDP: 8, PROTO_ICMP: 8}


def _ip_layout(data):
    """Return (ihl_bytes, l4_len) for the IPv4 datagram at offset 14."""
    if len(data) < ETH_HEADER_LEN + 20:
        raise MalformedFrameError("l3", "IPv4 header truncated")
    vihl = data[ETH_HEADER_LEN]
    ihl = (vihl & 0x0F) * 4
    if vihl >> 4 != 4 or ihl < 20:
        raise MalformedFrameError("l3", "bad version/IHL 0x%02x" % vihl)
    total = struct.unpack_from("!H", data, ETH_HEADER_LEN + 2)[0]
    if total < ihl:
        raise MalformedFrameError("l3", "total length %d below IHL" % total)
    if ETH_HEADER_LEN + total > len(data):
        layer = "l4" if len(data) >= ETH_HEADER_LEN + ihl else "l3"
        raise MalformedFrameError(layer, "total length %d does not fit a "
                                  "%d-byte frame" % (total, len(data)))
    return ihl, total - ihl


def analyze(frame):
    """Decode the header parameters of ``frame`` into a HeaderSummary.

    Raises MalformedFrameError naming the layer at which the frame ran out
    of bytes or declared an impossible layout.
    """
    data = frame.data
    if len(data) < ETH_HEADER_LEN:
        raise MalformedFrameError("l2", "%d bytes is shorter than the "
                                  "Ethernet header" % len(data))
    dst_mac = MacAddress(data[0:6])
    src_mac = MacAddress(data[6:12])
    ethertype = struct.unpack_from("!H", data, 12)[0]
    if ethertype != ETHERTYPE_IP:
        if ethertype == ETHERTYPE_ARP and len(data) < ETH_HEADER_LEN + 28:
            raise MalformedFrameError("l3", "ARP payload truncated")
        return HeaderSummary(src_mac, dst_mac, ethertype, len(data))

    ihl, l4_len = _ip_layout(data)
    proto = data[ETH_HEADER_LEN + 9]
    src_ip, dst_ip = struct.unpack_from("!II", data, ETH_HEADER_LEN + 12)
    l4_off = ETH_HEADER_LEN + ihl
    if l4_len < _L4_MIN.get(proto, 0):
        raise MalformedFrameError("l4", "protocol %d header truncated" % proto)
    sport = dport = None
    if proto in PORTED_PROTOCOLS:
        sport, dport = struct.unpack_from("!HH", data, l4_off)
    l3, l4 = _verify(data, ihl, l4_len)
    return HeaderSummary(src_mac, dst_mac, ethertype, len(data),
                         lev4_prot=proto, src_ip=src_ip, dst_ip=dst_ip,
                         src_port=sport, dst_port=dport,
                         l3_checksum_ok=l3, l4_checksum_ok=l4)


def analyze_stream(beats, cfg=None):
    """Reassemble and analyze a beat stream.

    Returns one entry per frame in arrival order: a HeaderSummary for good
    frames, an ErrorRecord for frames flagged by the bus or malformed.
    ``cfg`` is accepted for symmetry with the bus layer; beat width is
    carried by the beats themselves.
    """
    out = []
    for i, frame in enumerate(deserialize_stream(beats)):
        if frame.errored:
            out.append(ErrorRecord(i, "bus error flag", len(frame)))
            continue
        try:
            out.append(analyze(frame))
        except MalformedFrameError as exc:
            out.append(ErrorRecord(i, str(exc), len(frame)))
    return out


def l4_checksum(frame):
    """Pseudo-header checksum of the TCP/UDP segment, stored field as zero.

    A computed zero is returned as 0xFFFF for UDP.
    """
    data = frame.data
    ihl, l4_len = _ip_layout(data)
    proto = data[ETH_HEADER_LEN + 9]
    if proto not in PORTED_PROTOCOLS:
        raise ValueError("l4 checksum not applicable to protocol %d" % proto)
    src_ip, dst_ip = struct.unpack_from("!II", data, ETH_HEADER_LEN + 12)
    off = ETH_HEADER_LEN + ihl
    seg = bytearray(data[off:off + l4_len])
    field = 16 if proto == PROTO_TCP else 6
    if len(seg) < field + 2:
        raise MalformedFrameError("l4", "segment truncated")
    seg[field:field + 2] = b"\x00\x00"
    csum = internet_checksum(seg, pseudo_header_sum(src_ip, dst_ip, proto,
                                                    l4_len))
    if proto == PROTO_UDP and csum == 0:
        return 0xFFFF
    return csum


def _verify_l4(data, ihl, l4_len):
    proto = data[ETH_HEADER_LEN + 9]
    off = ETH_HEADER_LEN + ihl
    seg = data[off:off + l4_len]
    if proto == PROTO_ICMP:
        if l4_len < 8:
            return ChecksumStatus.BAD
        return ChecksumStatus.OK if verifies(seg) else ChecksumStatus.BAD
    if proto not in PORTED_PROTOCOLS:
        return ChecksumStatus.NOT_APPLICABLE
    if l4_len < _L4_MIN[proto]:
        return ChecksumStatus.BAD
    if proto == PROTO_UDP:
        udp_len, stored = struct.unpack_from("!HH", seg, 4)
        if udp_len != l4_len:
            return ChecksumStatus.BAD
        if stored == 0:
            # sender did not compute a checksum
            return ChecksumStatus.NOT_APPLICABLE
    src_ip, dst_ip = struct.unpack_from("!II", data, ETH_HEADER_LEN + 12)
    total = ones_complement_sum(seg, pseudo_header_sum(src_ip, dst_ip, proto,
                                                       l4_len))
    return ChecksumStatus.OK if total == 0xFFFF else ChecksumStatus.BAD


def verify_checksums(frame):
    """(l3, l4) checksum status. Never raises; malformed IP reports BAD."""
    data = frame.data
    if len(data) < ETH_HEADER_LEN:
        return ChecksumStatus.BAD, ChecksumStatus.BAD
    if struct.unpack_from("!H", data, 12)[0] != ETHERTYPE_IP:
        return ChecksumStatus.NOT_APPLICABLE, ChecksumStatus.NOT_APPLICABLE
    try:
        ihl, l4_len = _ip_layout(data)
    except MalformedFrameError:
        return ChecksumStatus.BAD, ChecksumStatus.BAD
    return _verify(data, ihl, l4_len)


def _verify(data, ihl, l4_len):
    header = data[ETH_HEADER_LEN:ETH_HEADER_LEN + ihl]
    l3 = ChecksumStatus.OK if verifies(header) else ChecksumStatus.BAD
    return l3, _verify_l4(data, ihl, l4_len)
