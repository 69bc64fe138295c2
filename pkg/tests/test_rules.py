import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import (brute_evaluate, firewall_rules, random_rule,
                     random_summary, summaries)
from idspipe.analyzer import HeaderSummary, analyze
from idspipe.frames import (ETHERTYPE_ARP, PROTO_TCP, FrameSpec, MacAddress,
                            build_frame)
from idspipe.rules import (BLOCKED, FLAG_ARP, FLAG_ENABLED, MAX_RULES,
                           CapacityError, FirewallRule, PacketType,
                           RuleError, RuleParseError, RuleSet,
                           classify_packet_type, dump_binary_rules, evaluate,
                           format_rule, load_ruleset, pack_rule,
                           parse_rule_line, port_range_rule, unpack_rule)

ZERO_MAC = MacAddress(bytes(6))


def tcp_summary(sport, dport=80):
    return HeaderSummary(ZERO_MAC, ZERO_MAC, 0x0800, 64, lev4_prot=6,
                         src_ip=0xC0A80001, dst_ip=0xC0A80002,
                         src_port=sport, dst_port=dport)


ZERO_RULE = FirewallRule(src_port_max=0, dst_port_max=0, l4_proto=0)


def test_pack_all_zero_enabled():
    packed = pack_rule(ZERO_RULE)
    assert len(packed) == 28
    assert packed == bytes(25) + b"\x01" + bytes(2)


def test_pack_port_range_rule():
    rule = FirewallRule(src_port_min=0, src_port_max=3, dst_port_max=0xFFFF,
                        l4_proto=PROTO_TCP)
    packed = pack_rule(rule)
    assert packed[16:20] == bytes.fromhex("00000003")
    assert packed[24] == 6
    assert unpack_rule(packed) == rule


def test_unpack_zero_with_enable():
    assert unpack_rule(bytes(25) + b"\x01" + bytes(2)) == ZERO_RULE


def test_unpack_rejects_reversed_range():
    data = bytearray(pack_rule(ZERO_RULE))
    data[16:20] = bytes.fromhex("00050002")
    with pytest.raises(RuleError):
        unpack_rule(bytes(data))


def test_unpack_rejects_reserved_bits():
    data = bytearray(pack_rule(ZERO_RULE))
    data[27] = 1
    with pytest.raises(RuleError):
        unpack_rule(bytes(data))


def test_unpack_rejects_wrong_size():
    with pytest.raises(RuleError):
        unpack_rule(bytes(27))


@given(firewall_rules())
def test_pack_round_trip(rule):
    assert unpack_rule(pack_rule(rule)) == rule


def test_empty_file_blocks_everything():
    rules = load_ruleset("")
    assert len(rules) == 0
    assert evaluate(tcp_summary(1), rules) == BLOCKED


def test_capacity_boundary():
    line = "allow proto tcp sport 0-3\n"
    assert len(load_ruleset(line * 16)) == 16
    with pytest.raises(CapacityError, match="16"):
        load_ruleset(line * 17)


def test_parse_error_carries_line_number():
    with pytest.raises(RuleParseError) as info:
        load_ruleset("# header\nallow proto tcp\nallow sport 9-1\n")
    assert info.value.lineno == 3


def test_text_rule_fields():
    rule = parse_rule_line("allow src 10.0.0.0/8 dst 192.168.1.7/32 "
                           "sport 0-1023 dport 80 proto udp arp")
    assert rule.src_ip == 0x0A000000 and rule.src_ip_mask == 0xFF000000
    assert rule.dst_ip_mask == 0xFFFFFFFF
    assert (rule.src_port_min, rule.src_port_max) == (0, 1023)
    assert (rule.dst_port_min, rule.dst_port_max) == (80, 80)
    assert rule.l4_proto == 17
    assert rule.flags == FLAG_ENABLED | FLAG_ARP
    assert parse_rule_line(format_rule(rule)) == rule


def test_binary_rule_file_round_trip():
    rs = RuleSet([port_range_rule(0, 3), ZERO_RULE])
    blob = dump_binary_rules(rs)
    assert blob[:5] == b"FWR1\x02" and len(blob) == 5 + 56
    assert load_ruleset(blob) == rs


def test_binary_capacity():
    blob = b"FWR1" + bytes([17]) + pack_rule(ZERO_RULE) * 17
    with pytest.raises(CapacityError):
        load_ruleset(blob)


def test_ruleset_capacity_and_memory_image():
    with pytest.raises(CapacityError):
        RuleSet([ZERO_RULE] * (MAX_RULES + 1))
    image = RuleSet([ZERO_RULE] * 5).memory_image()
    assert len(image) == 4 and all(len(m) == 4 for m in image)
    assert image[1][0] == pack_rule(ZERO_RULE)
    assert image[1][1] == bytes(28)


def test_allowed_code_3():
    v = evaluate(tcp_summary(2), RuleSet([port_range_rule(0, 3)]))
    assert v.code == 3 and v.matched_rule_index == 0


def test_blocked_outside_range():
    v = evaluate(tcp_summary(700), RuleSet([port_range_rule(0, 255)]))
    assert v.code == 0 and v.matched_rule_index is None


def test_first_match_index():
    rules = RuleSet([port_range_rule(100, 200), port_range_rule(0, 10),
                     FirewallRule()])
    assert evaluate(tcp_summary(5), rules).matched_rule_index == 1


def test_arp_needs_arp_flag():
    arp = analyze(build_frame(FrameSpec(l3_protocol=ETHERTYPE_ARP,
                                        l4_protocol=None)))
    assert not evaluate(arp, RuleSet([FirewallRule()])).allowed
    assert evaluate(arp, RuleSet([FirewallRule(flags=FLAG_ENABLED | FLAG_ARP)
                                  ])).allowed


def test_non_ip_non_arp_never_matches():
    ipv6 = HeaderSummary(ZERO_MAC, ZERO_MAC, 0x86DD, 64)
    rule = FirewallRule(flags=FLAG_ENABLED | FLAG_ARP)
    assert not evaluate(ipv6, RuleSet([rule])).allowed


def test_icmp_ports_vacuous():
    icmp = HeaderSummary(ZERO_MAC, ZERO_MAC, 0x0800, 64, lev4_prot=1,
                         src_ip=1, dst_ip=2)
    assert evaluate(icmp, RuleSet([port_range_rule(0, 3, proto=1)])).allowed


@pytest.mark.parametrize("summary,code", [
    (tcp_summary(1), PacketType.TCP),
    (HeaderSummary(ZERO_MAC, ZERO_MAC, 0x0800, 64, lev4_prot=17, src_ip=0,
                   dst_ip=0, src_port=1, dst_port=2), PacketType.UDP),
    (HeaderSummary(ZERO_MAC, ZERO_MAC, 0x0800, 64, lev4_prot=1, src_ip=0,
                   dst_ip=0), PacketType.ICMP),
    (HeaderSummary(ZERO_MAC, ZERO_MAC, 0x0806, 64), PacketType.ARP),
    (HeaderSummary(ZERO_MAC, ZERO_MAC, 0x0800, 64, lev4_prot=47, src_ip=0,
                   dst_ip=0), PacketType.OTHER),
    (HeaderSummary(ZERO_MAC, ZERO_MAC, 0x86DD, 64), PacketType.OTHER),
])
def test_classification_table(summary, code):
    assert classify_packet_type(summary) == code
    assert int(code) in (0, 1, 2, 3, 4)


@pytest.mark.parametrize("k", [4, 16, 32, 64, 128, 256])
def test_exactly_k_of_1024(k):
    rules = RuleSet([port_range_rule(0, k - 1)])
    allowed = sum(evaluate(tcp_summary(p), rules).allowed for p in range(1024))
    assert allowed == k


def test_agrees_with_brute_force_oracle():
    rng = random.Random(5)
    allowed = 0
    for _ in range(100_000):
        s = random_summary(rng)
        rules = [random_rule(rng) for _ in range(rng.randint(0, 16))]
        v = evaluate(s, RuleSet(rules))
        assert (v.allowed, v.matched_rule_index) == brute_evaluate(s, rules)
        allowed += v.allowed
    assert 0 < allowed < 100_000


@given(summaries(), st.lists(firewall_rules(), max_size=8),
       st.lists(firewall_rules(), max_size=8))
def test_whitelist_monotone(s, base, extra):
    if evaluate(s, RuleSet(base)).allowed:
        assert evaluate(s, RuleSet(base + extra)).allowed
        assert evaluate(s, RuleSet(extra + base)).allowed


@given(summaries(), st.lists(firewall_rules(), max_size=8),
       st.lists(firewall_rules().filter(lambda r: not r.enabled), max_size=8))
def test_disabled_rules_are_inert(s, rules, disabled):
    assert (evaluate(s, RuleSet(rules)).allowed
            == evaluate(s, RuleSet(disabled + rules)).allowed
            == evaluate(s, RuleSet(rules + disabled)).allowed)
