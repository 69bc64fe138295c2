"""Classic libpcap capture files (Ethernet link type only)."""

import struct

from .frames import EthernetFrame

MAGIC_USEC = 0xA1B2C3D4
MAGIC_NSEC = 0xA1B23C4D
LINKTYPE_ETHERNET = 1
SNAPLEN = 65535


class PcapError(ValueError):
    pass


class PcapWriter:
    """Streaming writer; usable as a context manager."""

    def __init__(self, path):
        self._fh = open(path, "wb")
        self._fh.write(struct.pack("<IHHiIII", MAGIC_USEC, 2, 4, 0, 0,
                                   SNAPLEN, LINKTYPE_ETHERNET))

    def write(self, frame, ts=0.0):
        data = frame.data if isinstance(frame, EthernetFrame) else frame
        if len(data) > SNAPLEN:
            raise PcapError("frame of %d bytes exceeds snaplen" % len(data))
        usec = round(ts * 1_000_000)
        self._fh.write(struct.pack("<IIII", usec // 1_000_000,
                                   usec % 1_000_000, len(data), len(data)))
        self._fh.write(data)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_pcap(path, frames, timestamps=None):
    """Write frames with microsecond timestamps (seconds, default 0)."""
    if timestamps is None:
        timestamps = [0.0] * len(frames)
    with PcapWriter(path) as writer:
        for frame, ts in zip(frames, timestamps):
            writer.write(frame, ts)


def read_pcap(path):
    """Return ``[(timestamp_seconds, EthernetFrame), ...]`` in file order.

    Records captured shorter than their original length come back with
    ``errored=True``.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 24:
        raise PcapError("file too short for a pcap header")
    for endian in ("<", ">"):
        magic = struct.unpack_from(endian + "I", blob)[0]
        if magic in (MAGIC_USEC, MAGIC_NSEC):
            break
    else:
        raise PcapError("bad magic 0x%08x" % struct.unpack_from("<I", blob)[0])
    divisor = 1e6 if magic == MAGIC_USEC else 1e9
    linktype = struct.unpack_from(endian + "I", blob, 20)[0] & 0x0FFFFFFF
    if linktype != LINKTYPE_ETHERNET:
        raise PcapError("unsupported link type %d" % linktype)
    records = []
    off = 24
    rec = struct.Struct(endian + "IIII")
    while off < len(blob):
        if off + rec.size > len(blob):
            raise PcapError("truncated record header at offset %d" % off)
        sec, frac, incl, orig = rec.unpack_from(blob, off)
        off += rec.size
        if off + incl > len(blob):
            raise PcapError("truncated record data at offset %d" % off)
        data = blob[off:off + incl]
        off += incl
        records.append((sec + frac / divisor,
                        EthernetFrame(data, errored=incl < orig)))
    return records
