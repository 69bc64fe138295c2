"""Traffic statistics: monotone counters, merging, and report rendering."""

import csv
import io
import json
from dataclasses import dataclass, fields, replace

from .analyzer import ChecksumStatus
from .rules import PacketType

COUNTER_MAX = 2**64 - 1

FIELDS = ("total_frames", "allowed", "blocked", "tcp", "udp", "icmp", "arp",
          "other", "errored_frames", "l3_checksum_bad", "l4_checksum_bad")

# keyed by int so plain codes and PacketType members both work
_PTYPE_FIELD = {int(PacketType.TCP): "tcp", int(PacketType.UDP): "udp",
                int(PacketType.ICMP): "icmp", int(PacketType.ARP): "arp",
                int(PacketType.OTHER): "other"}


class CounterOverflowError(OverflowError):
    pass


@dataclass
class TrafficStats:
    total_frames: int = 0
    allowed: int = 0
    blocked: int = 0
    tcp: int = 0
    udp: int = 0
    icmp: int = 0
    arp: int = 0
    other: int = 0
    errored_frames: int = 0
    l3_checksum_bad: int = 0
    l4_checksum_bad: int = 0

    def _bump(self, name):
        value = getattr(self, name) + 1
        if value > COUNTER_MAX:
            raise CounterOverflowError("%s saturated at 2**64-1" % name)
        setattr(self, name, value)

    def record(self, verdict, ptype, l3=ChecksumStatus.NOT_APPLICABLE,
               l4=ChecksumStatus.NOT_APPLICABLE):
        """Count one analyzed frame in place."""
        if self.total_frames >= COUNTER_MAX:
            raise CounterOverflowError("total_frames saturated at 2**64-1")
        self.total_frames += 1
        self._bump("allowed" if verdict.code == 3 else "blocked")
        self._bump(_PTYPE_FIELD[ptype])
        if l3 is ChecksumStatus.BAD:
            self._bump("l3_checksum_bad")
        if l4 is ChecksumStatus.BAD:
            self._bump("l4_checksum_bad")

    def record_error(self):
        """Count a frame that never reached the rule check."""
        self._bump("total_frames")
        self._bump("errored_frames")

    def as_dict(self):
        return {name: getattr(self, name) for name in FIELDS}

    def __add__(self, other):
        return merge(self, other)


def update(stats, verdict, ptype, checksum_status=(
        ChecksumStatus.NOT_APPLICABLE, ChecksumStatus.NOT_APPLICABLE)):
    """Functional form of TrafficStats.record; ``stats`` is left untouched."""
    new = replace(stats)
    new.record(verdict, ptype, *checksum_status)
    return new


def merge(a, b):
    out = {}
    for f in fields(TrafficStats):
        value = getattr(a, f.name) + getattr(b, f.name)
        if value > COUNTER_MAX:
            raise CounterOverflowError("%s saturated at 2**64-1" % f.name)
        out[f.name] = value
    return TrafficStats(**out)


def render_report(stats, fmt="text"):
    counters = stats.as_dict()
    if fmt == "json":
        return (json.dumps(counters, indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(FIELDS)
        writer.writerow(counters[k] for k in FIELDS)
        return buf.getvalue().encode()
    if fmt == "text":
        width = max(map(len, FIELDS))
        return "".join("%-*s %d\n" % (width, k, v)
                       for k, v in counters.items()).encode()
    raise ValueError("unknown report format %r" % fmt)


def parse_report(data, fmt):
    """Inverse of render_report for the csv and json formats."""
    text = data.decode() if isinstance(data, bytes) else data
    if fmt == "json":
        return TrafficStats(**{k: int(v) for k, v in json.loads(text).items()})
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        return TrafficStats(**{k: int(v) for k, v in zip(rows[0], rows[1])})
    raise ValueError("cannot parse %r reports" % fmt)
