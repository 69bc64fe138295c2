"""Ethernet frame types and a builder for ARP/IPv4/UDP/TCP/ICMP frames.

Frames are MAC-delivered bytes: destination MAC through payload, with no
preamble and no FCS.
"""

import ipaddress
import struct
from dataclasses import dataclass
from typing import Optional

from .checksum import internet_checksum, pseudo_header_sum

ETH_HEADER_LEN = 14
ETH_MIN_FRAME = 64
ETH_MAX_FRAME = 1514

ETHERTYPE_IP = 0x0800
ETHERTYPE_ARP = 0x0806

PROTO_ICMP = 1
PROTO_TCP = 6
PROTO_UDP = 17

IPV4_HEADER_LEN = 20
TCP_HEADER_LEN = 20
UDP_HEADER_LEN = 8
ICMP_HEADER_LEN = 8
ARP_PAYLOAD_LEN = 28

L4_HEADER_LEN = {PROTO_TCP: TCP_HEADER_LEN, PROTO_UDP: UDP_HEADER_LEN,
                 PROTO_ICMP: ICMP_HEADER_LEN}
PORTED_PROTOCOLS = (PROTO_TCP, PROTO_UDP)

PROTOCOL_NAMES = {"tcp": PROTO_TCP, "udp": PROTO_UDP, "icmp": PROTO_ICMP}


class FrameSpecError(ValueError):
    """A FrameSpec is internally inconsistent; ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__("%s: %s" % (field, message))
        self.field = field


@dataclass(frozen=True)
class MacAddress:
    octets: bytes

    def __post_init__(self):
        if len(self.octets) != 6:
            raise ValueError("MAC address needs 6 octets, got %d"
                             % len(self.octets))

    @classmethod
    def parse(cls, text):
        parts = text.replace("-", ":").split(":")
        if len(parts) != 6:
            raise ValueError("bad MAC address %r" % text)
        return cls(bytes(int(p, 16) for p in parts))

    def __str__(self):
        return ":".join("%02x" % b for b in self.octets)


BROADCAST_MAC = MacAddress(b"\xff" * 6)


def ip_to_int(value):
    if isinstance(value, int):
        return value
    return int(ipaddress.IPv4Address(value))


def int_to_ip(value):
    return str(ipaddress.IPv4Address(value))


@dataclass(frozen=True)
class EthernetFrame:
    """Raw frame bytes. ``errored`` marks frames whose bus transfer carried
    the user/error flag or that were snap-truncated in a capture."""

    data: bytes
    errored: bool = False

    @property
    def declared_len(self):
        return len(self.data)

    def __len__(self):
        return len(self.data)


@dataclass(frozen=True)
class FrameSpec:
    l3_protocol: int = ETHERTYPE_IP
    l4_protocol: Optional[int] = PROTO_UDP
    src_mac: MacAddress = MacAddress(bytes.fromhex("020000000001"))
    dst_mac: MacAddress = MacAddress(bytes.fromhex("020000000002"))
    src_ip: int = 0xC0A80001
    dst_ip: int = 0xC0A80002
    src_port: Optional[int] = None
    dst_port: Optional[int] = None
    payload_len: int = 0
    pad_to_minimum: bool = True

    def __post_init__(self):
        if self.l3_protocol not in (ETHERTYPE_IP, ETHERTYPE_ARP):
            raise FrameSpecError("l3_protocol", "unsupported EtherType 0x%04x"
                                 % self.l3_protocol)
        if self.l3_protocol == ETHERTYPE_ARP:
            if self.l4_protocol is not None:
                raise FrameSpecError("l4_protocol", "ARP frames carry no L4")
            if self.payload_len:
                raise FrameSpecError("payload_len", "ARP payload is fixed")
        elif self.l4_protocol not in L4_HEADER_LEN:
            raise FrameSpecError("l4_protocol", "unsupported protocol %r"
                                 % (self.l4_protocol,))
        ported = self.l4_protocol in PORTED_PROTOCOLS
        for name in ("src_port", "dst_port"):
            port = getattr(self, name)
            if port is None:
                continue
            if not ported:
                raise FrameSpecError(name, "ports are only valid for TCP/UDP")
            if not 0 <= port <= 0xFFFF:
                raise FrameSpecError(name, "port %d out of range" % port)
        for name in ("src_ip", "dst_ip"):
            if not 0 <= getattr(self, name) <= 0xFFFFFFFF:
                raise FrameSpecError(name, "not a 32-bit address")
        if self.payload_len < 0:
            raise FrameSpecError("payload_len", "negative")
        if self.unpadded_len > ETH_MAX_FRAME:
            raise FrameSpecError("payload_len", "frame of %d bytes exceeds %d"
                                 % (self.unpadded_len, ETH_MAX_FRAME))

    @property
    def unpadded_len(self):
        if self.l3_protocol == ETHERTYPE_ARP:
            return ETH_HEADER_LEN + ARP_PAYLOAD_LEN
        return (ETH_HEADER_LEN + IPV4_HEADER_LEN
                + L4_HEADER_LEN[self.l4_protocol] + self.payload_len)

    @classmethod
    def with_total_len(cls, total_len, **kwargs):
        """Spec whose unpadded frame is ``total_len`` bytes long."""
        l3 = kwargs.get("l3_protocol", ETHERTYPE_IP)
        if l3 == ETHERTYPE_ARP:
            return cls(**kwargs)
        l4 = kwargs.get("l4_protocol", PROTO_UDP)
        headers = ETH_HEADER_LEN + IPV4_HEADER_LEN + L4_HEADER_LEN.get(l4, 0)
        if total_len < headers:
            raise FrameSpecError("payload_len", "total length %d is below the "
                                 "%d header bytes" % (total_len, headers))
        return cls(payload_len=total_len - headers, **kwargs)


def _payload(n):
    return bytes(i & 0xFF for i in range(n))


def _l4_segment(spec, payload):
    proto = spec.l4_protocol
    sport = spec.src_port or 0
    dport = spec.dst_port or 0
    if proto == PROTO_UDP:
        length = UDP_HEADER_LEN + len(payload)
        seg = struct.pack("!HHHH", sport, dport, length, 0) + payload
        csum = internet_checksum(seg, pseudo_header_sum(
            spec.src_ip, spec.dst_ip, proto, length)) or 0xFFFF
        return seg[:6] + struct.pack("!H", csum) + seg[8:]
    if proto == PROTO_TCP:
        # seq 0, ack 0, data offset 5, PSH|ACK, window 0xffff
        seg = struct.pack("!HHIIBBHHH", sport, dport, 0, 0, 5 << 4, 0x18,
                          0xFFFF, 0, 0) + payload
        csum = internet_checksum(seg, pseudo_header_sum(
            spec.src_ip, spec.dst_ip, proto, len(seg)))
        return seg[:16] + struct.pack("!H", csum) + seg[18:]
    # ICMP echo request, identifier 1, sequence 0
    seg = struct.pack("!BBHHH", 8, 0, 0, 1, 0) + payload
    csum = internet_checksum(seg)
    return seg[:2] + struct.pack("!H", csum) + seg[4:]


def _arp_payload(spec):
    return struct.pack("!HHBBH6sI6sI", 1, ETHERTYPE_IP, 6, 4, 1,
                       spec.src_mac.octets, spec.src_ip, bytes(6), spec.dst_ip)


def build_frame(spec):
    """Build a byte-exact frame with every length and checksum filled in.

    Padding (when enabled) appends zero bytes after the IP datagram up to 64
    bytes; IP total length and UDP length keep describing the unpadded data.
    ARP frames are always padded.
    """
    eth = spec.dst_mac.octets + spec.src_mac.octets + struct.pack(
        "!H", spec.l3_protocol)
    if spec.l3_protocol == ETHERTYPE_ARP:
        body = _arp_payload(spec)
        pad = True
    else:
        segment = _l4_segment(spec, _payload(spec.payload_len))
        total = IPV4_HEADER_LEN + len(segment)
        header = struct.pack("!BBHHHBBHII", 0x45, 0, total, 0, 0x4000, 64,
                             spec.l4_protocol, 0, spec.src_ip, spec.dst_ip)
        header = header[:10] + struct.pack(
            "!H", internet_checksum(header)) + header[12:]
        body = header + segment
        pad = spec.pad_to_minimum
    data = eth + body
    if pad and len(data) < ETH_MIN_FRAME:
        data += bytes(ETH_MIN_FRAME - len(data))
    return EthernetFrame(data)


def frame_word_count(frame, word_bytes):
    """Number of bus words needed for ``frame`` (ceil of len / word_bytes)."""
    if word_bytes not in (8, 64):
        raise ValueError("word_bytes must be 8 or 64, got %r" % (word_bytes,))
    return -(-len(frame) // word_bytes)
