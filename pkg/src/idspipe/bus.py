"""Word-parallel streaming bus model (data/keep/last/user beats).

One beat is one clock cycle of the MAC-side stream interface. The 10G
datapath is 8 bytes wide at 156.25 MHz, the 100G datapath 64 bytes wide at
322.26 MHz.
"""

from dataclasses import dataclass, field
from typing import List

from .frames import EthernetFrame, frame_word_count


@dataclass(frozen=True)
class BusConfig:
    word_bytes: int
    clock_hz: int
    line_rate_bps: int
    n_mac: int

    def __post_init__(self):
        if self.word_bytes not in (8, 64):
            raise ValueError("word_bytes must be 8 or 64")
        if self.clock_hz <= 0:
            raise ValueError("clock_hz must be positive")
        if self.n_mac < 0:
            raise ValueError("n_mac must be non-negative")

    @property
    def full_keep(self):
        return (1 << self.word_bytes) - 1


# n_mac defaults: 20 bytes of preamble + IFG rounded up to whole words.
BUS_10G = BusConfig(word_bytes=8, clock_hz=156_250_000,
                    line_rate_bps=10**10, n_mac=3)
BUS_100G = BusConfig(word_bytes=64, clock_hz=322_260_000,
                     line_rate_bps=10**11, n_mac=1)

BUSES = {"10g": BUS_10G, "100g": BUS_100G}


class StreamError(ValueError):
    def __init__(self, beat_index, message):
        super().__init__("beat %d: %s" % (beat_index, message))
        self.beat_index = beat_index


@dataclass(frozen=True)
class BusBeat:
    data: bytes
    keep: int
    last: bool = False
    user: bool = False

    @property
    def valid_bytes(self):
        return bin(self.keep).count("1")

    def keep_is_contiguous(self):
        k = self.keep
        return k != 0 and k & (k + 1) == 0 and k < (1 << len(self.data))


@dataclass
class BeatStream:
    """Beats of consecutive frames plus the idle cycles around them.

    ``gaps[i]`` is the number of idle cycles before frame ``i``;
    ``tail_gap`` closes the period of the final frame.
    """

    beats: List[BusBeat] = field(default_factory=list)
    gaps: List[int] = field(default_factory=list)
    tail_gap: int = 0

    def __iter__(self):
        return iter(self.beats)

    def __len__(self):
        return len(self.beats)

    @property
    def total_cycles(self):
        return len(self.beats) + sum(self.gaps) + self.tail_gap

    def cycles(self):
        """Yield the bus contents cycle by cycle (``None`` when idle)."""
        frame = 0
        at_frame_start = True
        for beat in self.beats:
            if at_frame_start:
                gap = self.gaps[frame] if frame < len(self.gaps) else 0
                for _ in range(gap):
                    yield None
                at_frame_start = False
            yield beat
            if beat.last:
                frame += 1
                at_frame_start = True
        for _ in range(self.tail_gap):
            yield None


def serialize_frame(frame, cfg):
    """Split a frame into bus beats; the final beat carries ``last`` and a
    low-order keep run covering the remaining bytes."""
    data = frame.data if isinstance(frame, EthernetFrame) else bytes(frame)
    user = isinstance(frame, EthernetFrame) and frame.errored
    if not data:
        raise ValueError("cannot serialize an empty frame")
    w = cfg.word_bytes
    full = cfg.full_keep
    beats = []
    for off in range(0, len(data), w):
        chunk = data[off:off + w]
        last = off + w >= len(data)
        keep = full if len(chunk) == w else (1 << len(chunk)) - 1
        if len(chunk) < w:
            chunk += bytes(w - len(chunk))
        beats.append(BusBeat(chunk, keep, last, user and last))
    return beats


def build_stream(frames, cfg, n_delay=0):
    """Serialize frames back to back with ``n_mac + n_delay`` idle cycles
    after each one."""
    gap = cfg.n_mac + n_delay
    stream = BeatStream()
    for i, frame in enumerate(frames):
        stream.gaps.append(0 if i == 0 else gap)
        stream.beats.extend(serialize_frame(frame, cfg))
    stream.tail_gap = gap if stream.gaps else 0
    return stream


def deserialize_stream(beats):
    """Reassemble frames at ``last`` boundaries.

    Frames with ``user`` set on any beat come back with ``errored=True``.
    Raises StreamError on a partial keep before ``last``, a non-contiguous
    keep, or a stream that ends mid-frame.
    """
    frames = []
    buf = bytearray()
    errored = False
    start = 0
    for i, beat in enumerate(beats):
        if not buf and not errored:
            start = i
        full = (1 << len(beat.data)) - 1
        if not beat.last and beat.keep != full:
            raise StreamError(i, "keep 0x%x not full before last" % beat.keep)
        if beat.last and not beat.keep_is_contiguous():
            raise StreamError(i, "keep 0x%x is not a contiguous low-order run"
                              % beat.keep)
        errored = errored or beat.user
        buf += beat.data[:beat.valid_bytes]
        if beat.last:
            frames.append(EthernetFrame(bytes(buf), errored=errored))
            buf = bytearray()
            errored = False
    if buf or errored:
        raise StreamError(start, "stream ended before last beat")
    return frames


def timeline_cycles(frames, n_delay, cfg):
    """Closed-form cycle count: sum of (N_FW + n_mac + n_delay) per frame."""
    return sum(frame_word_count(f, cfg.word_bytes) + cfg.n_mac + n_delay
               for f in frames)


def dump_beats(beats):
    """One beat per line: hex data, hex keep, last, user."""
    lines = []
    for b in beats:
        width = len(b.data) // 4
        lines.append("%s %0*x %d %d" % (b.data.hex(), width, b.keep,
                                        int(b.last), int(b.user)))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_dump(text):
    beats = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            data, keep, last, user = line.split()
            beats.append(BusBeat(bytes.fromhex(data), int(keep, 16),
                                 last == "1", user == "1"))
        except ValueError as exc:
            raise ValueError("line %d: %s" % (lineno, exc)) from None
    return beats
