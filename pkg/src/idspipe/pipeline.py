"""End-to-end sniffer: analysis -> rule check -> statistics and alerts."""

import logging
from concurrent.futures import ProcessPoolExecutor

from .alerts import AlertRecord, MemorySink, emit_alert
from .analyzer import (ErrorRecord, MalformedFrameError, analyze,
                       analyze_stream)
from .rules import RuleSet, classify_packet_type, evaluate
from .stats import TrafficStats, merge

log = logging.getLogger(__name__)


class Sniffer:
    """Stateless per frame; the only state is the counters and alert sink.

    ``rules`` may be swapped between frames with ``load_rules``.
    """

    def __init__(self, rules=None, sink=None):
        self.rules = rules if rules is not None else RuleSet()
        self.sink = sink
        self.stats = TrafficStats()
        self.alerts_sent = 0

    def load_rules(self, rules):
        self.rules = rules

    def process_summary(self, summary, timestamp=0.0):
        verdict = evaluate(summary, self.rules)
        self.stats.record(verdict, classify_packet_type(summary),
                          summary.l3_checksum_ok, summary.l4_checksum_ok)
        if not verdict.allowed and self.sink is not None:
            if emit_alert(AlertRecord(timestamp, summary, verdict.code),
                          self.sink):
                self.alerts_sent += 1
        return verdict

    def process_frame(self, frame, timestamp=0.0):
        """Returns the Verdict, or None for frames that could not be
        analyzed (counted as errored)."""
        if frame.errored:
            self.stats.record_error()
            return None
        try:
            summary = analyze(frame)
        except MalformedFrameError:
            self.stats.record_error()
            return None
        return self.process_summary(summary, timestamp)

    def process(self, records):
        """Feed ``(timestamp, frame)`` pairs; returns the verdicts."""
        return [self.process_frame(frame, ts) for ts, frame in records]

    def process_stream(self, beats):
        """Feed a bus beat stream through reassembly and analysis."""
        verdicts = []
        for item in analyze_stream(beats):
            if isinstance(item, ErrorRecord):
                self.stats.record_error()
                verdicts.append(None)
            else:
                verdicts.append(self.process_summary(item))
        return verdicts


def _sniff_chunk(rules, records, collect_alerts):
    sink = MemorySink() if collect_alerts else None
    sniffer = Sniffer(rules, sink)
    sniffer.process(records)
    return sniffer.stats, (sink.lines if sink else [])


def sniff_parallel(records, rules, sink=None, workers=2):
    """Split ``records`` into contiguous chunks, analyze each in its own
    process with private counters, then merge.

    Alerts are replayed into ``sink`` in capture order, so the output is
    identical to a sequential run.
    """
    records = list(records)
    if workers <= 1 or len(records) < 2 * workers:
        sniffer = Sniffer(rules, sink)
        sniffer.process(records)
        return sniffer.stats
    size = -(-len(records) // workers)
    chunks = [records[i:i + size] for i in range(0, len(records), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_sniff_chunk, [rules] * len(chunks), chunks,
                                [sink is not None] * len(chunks)))
    stats = TrafficStats()
    for part, lines in results:
        stats = merge(stats, part)
        for line in lines:
            try:
                sink.send(line)
            except OSError as exc:
                sink.warnings += 1
                log.warning("alert delivery failed: %s", exc)
    return stats
