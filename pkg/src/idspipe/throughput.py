"""Frame data-rate model and the delay/length sweep.

The rate of a stream of N_FW-word frames separated by N_MAC MAC cycles and
N_DELAY programmed cycles is

    DR = word_bits * N_FW * f_clk / (N_FW + N_MAC + N_DELAY)

which on the 8-byte, 156.25 MHz bus is 1e10 * N_FW / (N_FW + N_MAC + N_DELAY).
All arithmetic is exact (Fraction); values are rounded only for output.
"""

import csv
import io
import os
from dataclasses import dataclass
from fractions import Fraction

from .bus import BUS_10G
from .frames import FrameSpec, build_frame, frame_word_count
from .generator import compile_schedule, run_generator

LENGTHS_10G = (50, 100, 200, 300, 400, 500, 750, 1000, 1500)
LENGTHS_100G = (64, 100, 200, 300, 400, 500, 750, 1000, 1500)
DELAYS = (0, 1, 2, 3, 4, 5, 10, 50, 100, 500, 1000, 5000, 10000, 50000)

CSV_COLUMNS = ("frame_len", "n_fw", "n_delay", "dr_bps")


@dataclass(frozen=True)
class RatePoint:
    frame_len: int
    n_fw: int
    n_delay: int
    dr_bps: Fraction

    @property
    def dr_gbps(self):
        return float(self.dr_bps) / 1e9


def raw_data_rate(n_fw, n_mac, n_delay, cfg):
    """Unclamped bus rate in bit/s as an exact Fraction."""
    if n_fw < 1:
        raise ValueError("n_fw must be at least 1")
    return Fraction(cfg.word_bytes * 8 * n_fw * cfg.clock_hz,
                    n_fw + n_mac + n_delay)


def data_rate(n_fw, n_mac, n_delay, cfg):
    """Bus rate in bit/s, clamped to the configured line rate."""
    return min(raw_data_rate(n_fw, n_mac, n_delay, cfg),
               Fraction(cfg.line_rate_bps))


def sweep_frame(frame_len):
    """UDP frame of the requested length (padded up to the 64-byte minimum)."""
    return build_frame(FrameSpec.with_total_len(frame_len, src_port=1024,
                                                dst_port=1025))


def sweep(frame_lens, delays, cfg=BUS_10G):
    """Evaluate the rate on the full (length x delay) grid."""
    if not frame_lens or not delays:
        raise ValueError("sweep needs at least one length and one delay")
    points = []
    for length in frame_lens:
        n_fw = frame_word_count(sweep_frame(length), cfg.word_bytes)
        for d in delays:
            points.append(RatePoint(length, n_fw, d,
                                    data_rate(n_fw, cfg.n_mac, d, cfg)))
    return points


def format_rate(value, digits=6):
    """Round a positive rate to ``digits`` significant digits, printed as a
    plain decimal."""
    value = Fraction(value)
    if value < 1:
        raise ValueError("rates below 1 bit/s are not rendered")
    exp = max(len(str(int(value))) - digits, 0)
    scale = Fraction(10) ** exp
    rounded = round(value / scale) * scale
    return str(int(rounded))


def sweep_csv(points):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in points:
        writer.writerow((p.frame_len, p.n_fw, p.n_delay, format_rate(p.dr_bps)))
    return buf.getvalue()


def write_series(points, directory):
    """One gnuplot-style ``series_<len>.dat`` per frame length: n_delay and
    rate in Gbit/s. Returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    by_len = {}
    for p in points:
        by_len.setdefault(p.frame_len, []).append(p)
    paths = []
    for length, rows in by_len.items():
        path = os.path.join(directory, "series_%d.dat" % length)
        with open(path, "w") as fh:
            fh.write("# frame_len=%d n_fw=%d\n# n_delay dr_gbps\n"
                     % (length, rows[0].n_fw))
            for p in rows:
                fh.write("%d %.6g\n" % (p.n_delay, p.dr_gbps))
        paths.append(path)
    return paths


def measure_rate(run):
    """Rate observed on a generator run: bits moved on the bus divided by
    elapsed time, capped by what the line can carry."""
    cfg = run.cfg
    bits = len(run.stream.beats) * cfg.word_bytes * 8
    seconds = Fraction(run.stream.total_cycles, cfg.clock_hz)
    return min(bits / seconds, Fraction(cfg.line_rate_bps))


def analytic_rate(frames, n_delay, cfg):
    """Closed form for a (possibly mixed-length) frame list: total words
    over total cycles."""
    words = sum(frame_word_count(f, cfg.word_bytes) for f in frames)
    slots = words + len(frames) * (cfg.n_mac + n_delay)
    raw = Fraction(cfg.word_bytes * 8 * cfg.clock_hz * words, slots)
    return min(raw, Fraction(cfg.line_rate_bps))


def compare_measured_vs_analytic(schedule):
    """Relative deviation of the simulated rate from the closed form."""
    run = run_generator(schedule)
    measured = measure_rate(run)
    expected = analytic_rate(run.frames, schedule.n_delay, schedule.cfg)
    return abs(measured - expected) / expected


def grid_deviation(frame_lens, delays, cfg, frames_per_cell=4):
    """Largest measured-vs-analytic deviation over a sweep grid."""
    worst = Fraction(0)
    for length in frame_lens:
        frames = [sweep_frame(length)] * frames_per_cell
        for d in delays:
            worst = max(worst, compare_measured_vs_analytic(
                compile_schedule(frames, d, cfg=cfg)))
    return worst
