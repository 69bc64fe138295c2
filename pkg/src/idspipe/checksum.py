"""Internet checksum (one's-complement sum of 16-bit big-endian words)."""

import struct


def ones_complement_sum(data, initial=0):
    """Fold ``data`` into a 16-bit one's-complement running sum.

    Odd-length input is padded with a trailing zero byte. ``initial`` lets
    callers chain several regions (pseudo-header, header, payload).
    """
    if len(data) % 2:
        data = bytes(data) + b"\x00"
    # 2**16 == 1 (mod 0xffff), so the end-around-carry sum of all words is
    # the whole big-endian integer reduced mod 0xffff (zero only if all-zero)
    total = int.from_bytes(data, "big") + initial
    if not total:
        return 0
    return total % 0xFFFF or 0xFFFF


def internet_checksum(data, initial=0):
    return ~ones_complement_sum(data, initial) & 0xFFFF


def verifies(data, initial=0):
    """True when ``data`` (checksum field included) sums to 0xFFFF."""
    return ones_complement_sum(data, initial) == 0xFFFF


def ipv4_header_checksum(header_bytes):
    """Checksum of a 20-byte IPv4 header whose checksum field is zeroed."""
    if len(header_bytes) != 20:
        raise ValueError("IPv4 header must be exactly 20 bytes, got %d"
                         % len(header_bytes))
    return internet_checksum(header_bytes)


def pseudo_header_sum(src_ip, dst_ip, protocol, length):
    """Running sum of the IPv4 pseudo-header used by TCP and UDP."""
    return ones_complement_sum(
        struct.pack("!IIBBH", src_ip, dst_ip, 0, protocol, length))
