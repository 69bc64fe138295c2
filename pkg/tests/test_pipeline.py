from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import frame_specs
from idspipe.bus import BUS_10G, BusBeat, serialize_frame
from idspipe.frames import EthernetFrame, FrameSpec, build_frame
from idspipe.generator import compile_schedule, run_generator
from idspipe.pipeline import Sniffer
from idspipe.rules import FirewallRule, RuleSet


@settings(max_examples=50)
@given(st.lists(frame_specs(), min_size=1, max_size=10), st.integers(0, 20))
def test_generator_into_sniffer_counts_every_frame(specs, delay):
    run = run_generator(compile_schedule([build_frame(s) for s in specs],
                                         delay))
    sniffer = Sniffer(RuleSet([FirewallRule()]))
    sniffer.process_stream(run.stream)
    assert sniffer.stats.total_frames == len(run.frames)


def test_errored_and_malformed_frames_are_counted():
    good = build_frame(FrameSpec(src_port=1, dst_port=2))
    beats = serialize_frame(good, BUS_10G)
    bad = serialize_frame(good, BUS_10G)
    bad[-1] = BusBeat(bad[-1].data, bad[-1].keep, True, True)
    runt = serialize_frame(EthernetFrame(bytes(12)), BUS_10G)
    sniffer = Sniffer(RuleSet([FirewallRule()]))
    verdicts = sniffer.process_stream(beats + bad + runt)
    assert [v is None for v in verdicts] == [False, True, True]
    s = sniffer.stats
    assert (s.total_frames, s.errored_frames, s.allowed) == (3, 2, 1)


def test_checksum_bad_frame_still_evaluated():
    data = bytearray(build_frame(FrameSpec(src_port=1, dst_port=2,
                                           payload_len=30)).data)
    data[-1] ^= 0xFF
    sniffer = Sniffer(RuleSet([FirewallRule()]))
    v = sniffer.process_frame(EthernetFrame(bytes(data)))
    assert v.allowed
    assert sniffer.stats.l4_checksum_bad == 1


def test_rule_reload_between_frames():
    frame = build_frame(FrameSpec(src_port=1, dst_port=2))
    sniffer = Sniffer(RuleSet())
    assert not sniffer.process_frame(frame).allowed
    sniffer.load_rules(RuleSet([FirewallRule()]))
    assert sniffer.process_frame(frame).allowed


def test_parallel_equals_sequential():
    from idspipe.alerts import MemorySink
    from idspipe.generator import sweep_source_ports
    from idspipe.pipeline import sniff_parallel
    from idspipe.rules import port_range_rule

    frames = sweep_source_ports(FrameSpec(l4_protocol=6, dst_port=80), 300)
    records = [(i * 1e-6, f) for i, f in enumerate(frames)]
    rules = RuleSet([port_range_rule(0, 9)])
    seq_sink, par_sink = MemorySink(), MemorySink()
    seq = Sniffer(rules, seq_sink)
    seq.process(records)
    par = sniff_parallel(records, rules, par_sink, workers=3)
    assert par == seq.stats
    assert par_sink.lines == seq_sink.lines
    assert len(par_sink.lines) == par.blocked == 290
