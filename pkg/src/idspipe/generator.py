"""Packet generator: frame memory, inter-frame delay, loop modes."""

import enum
from dataclasses import dataclass, replace
from typing import List, Tuple

from .bus import BUS_10G, BeatStream, BusConfig, serialize_frame
from .frames import (ETH_MAX_FRAME, PORTED_PROTOCOLS, EthernetFrame,
                     build_frame, frame_word_count)

# Frame memory budget: 1024 max-size frames.
DEFAULT_MEMORY_BYTES = 1024 * ETH_MAX_FRAME


class Mode(enum.Enum):
    SINGLE = "single"
    CONTINUOUS = "continuous"
    STOPPED = "stopped"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class GenSchedule:
    frames: Tuple[EthernetFrame, ...]
    n_delay: int = 0
    mode: Mode = Mode.SINGLE
    loop_count: int = 1
    cfg: BusConfig = BUS_10G

    @property
    def passes(self):
        if self.mode is Mode.STOPPED:
            return 0
        if self.mode is Mode.SINGLE:
            return 1
        return self.loop_count


@dataclass
class GeneratorRun:
    stream: BeatStream
    start_cycles: List[int]
    frames: List[EthernetFrame]
    total_cycles: int
    cfg: BusConfig

    def timestamps(self):
        """Emission time of each frame in seconds from the first beat."""
        return [c / self.cfg.clock_hz for c in self.start_cycles]


def compile_schedule(frames, n_delay=0, mode=Mode.SINGLE, cfg=BUS_10G,
                     loop_count=1, memory_bytes=DEFAULT_MEMORY_BYTES):
    frames = tuple(frames)
    if not frames:
        raise ScheduleError("schedule needs at least one frame")
    if n_delay < 0:
        raise ScheduleError("n_delay must be non-negative")
    if not isinstance(mode, Mode):
        mode = Mode(mode)
    if mode is Mode.CONTINUOUS and loop_count < 1:
        raise ScheduleError("continuous mode needs loop_count >= 1")
    used = 0
    for i, frame in enumerate(frames):
        if len(frame) > ETH_MAX_FRAME:
            raise ScheduleError("frame %d is %d bytes; limit is %d"
                                % (i, len(frame), ETH_MAX_FRAME))
        if len(frame) == 0:
            raise ScheduleError("frame %d is empty" % i)
        used += len(frame)
    if used > memory_bytes:
        raise ScheduleError("frames need %d bytes of generator memory, "
                            "capacity is %d" % (used, memory_bytes))
    return GenSchedule(frames, n_delay, mode, loop_count, cfg)


def run_generator(schedule):
    """Emit the schedule on the bus.

    Each frame occupies N_FW beat cycles followed by n_mac + n_delay idle
    cycles; ``start_cycles[i]`` is the cycle of frame i's first beat.
    """
    cfg = schedule.cfg
    gap = cfg.n_mac + schedule.n_delay
    stream = BeatStream()
    starts = []
    emitted = []
    cycle = 0
    for _ in range(schedule.passes):
        for frame in schedule.frames:
            stream.gaps.append(gap if emitted else 0)
            if emitted:
                cycle += gap
            starts.append(cycle)
            beats = serialize_frame(frame, cfg)
            stream.beats.extend(beats)
            cycle += len(beats)
            emitted.append(frame)
    if emitted:
        stream.tail_gap = gap
        cycle += gap
    return GeneratorRun(stream, starts, emitted, cycle, cfg)


def sweep_source_ports(template, count):
    """``count`` frames from ``template`` with source ports 0..count-1."""
    if template.l4_protocol not in PORTED_PROTOCOLS:
        raise ScheduleError("source-port sweep needs a TCP or UDP template")
    if not 1 <= count <= 0x10000:
        raise ScheduleError("port count must be in 1..65536")
    return [build_frame(replace(template, src_port=port))
            for port in range(count)]


def frame_words(frames, cfg):
    return [frame_word_count(f, cfg.word_bytes) for f in frames]
