"""Independent oracles and hypothesis strategies shared by the tests."""

from hypothesis import strategies as st

from idspipe.analyzer import ChecksumStatus, HeaderSummary
from idspipe.frames import (ETH_MAX_FRAME, ETHERTYPE_ARP, ETHERTYPE_IP,
                            L4_HEADER_LEN, PROTO_ICMP, PROTO_TCP, PROTO_UDP,
                            FrameSpec, MacAddress)
from idspipe.rules import FLAG_ARP, FLAG_ENABLED, PROTO_ANY, FirewallRule


def brute_checksum(data):
    """Byte-at-a-time one's-complement checksum, folding after every word."""
    s = 0
    for i in range(0, len(data), 2):
        hi = data[i]
        lo = data[i + 1] if i + 1 < len(data) else 0
        s += (hi << 8) | lo
        s = (s & 0xFFFF) + (s >> 16)
    return ~s & 0xFFFF


def brute_evaluate(summary, rules):
    """Clause-by-clause rule check; returns (allowed, first matching index)."""
    hits = []
    for i, r in enumerate(rules):
        clauses = [bool(r.flags & 1)]
        if summary.lev3_prot == 0x0806:
            clauses.append(bool(r.flags & 2))
        elif summary.lev3_prot != 0x0800:
            clauses.append(False)
        else:
            m = r.src_ip_mask
            clauses.append(summary.src_ip & m == r.src_ip & m)
            m = r.dst_ip_mask
            clauses.append(summary.dst_ip & m == r.dst_ip & m)
            clauses.append(r.l4_proto in (0xFF, summary.lev4_prot))
            if summary.src_port is not None:
                clauses.append(summary.src_port in range(r.src_port_min,
                                                         r.src_port_max + 1))
            if summary.dst_port is not None:
                clauses.append(summary.dst_port in range(r.dst_port_min,
                                                         r.dst_port_max + 1))
        if all(clauses):
            hits.append(i)
    return (bool(hits), hits[0] if hits else None)


def step_cycles(stream):
    """Count cycles by walking the bus one cycle at a time."""
    n = 0
    for _ in stream.cycles():
        n += 1
    return n


macs = st.binary(min_size=6, max_size=6).map(MacAddress)
ips = st.integers(0, 0xFFFFFFFF)
ports = st.integers(0, 0xFFFF)


@st.composite
def frame_specs(draw, protos=("tcp", "udp", "icmp", "arp")):
    kind = draw(st.sampled_from(protos))
    common = dict(src_mac=draw(macs), dst_mac=draw(macs), src_ip=draw(ips),
                  dst_ip=draw(ips), pad_to_minimum=draw(st.booleans()))
    if kind == "arp":
        return FrameSpec(l3_protocol=ETHERTYPE_ARP, l4_protocol=None, **common)
    l4 = {"tcp": PROTO_TCP, "udp": PROTO_UDP, "icmp": PROTO_ICMP}[kind]
    room = ETH_MAX_FRAME - 14 - 20 - L4_HEADER_LEN[l4]
    payload = draw(st.one_of(st.integers(0, 64), st.integers(0, room)))
    if l4 == PROTO_ICMP:
        return FrameSpec(l4_protocol=l4, payload_len=payload, **common)
    return FrameSpec(l4_protocol=l4, src_port=draw(ports),
                     dst_port=draw(ports), payload_len=payload, **common)


@st.composite
def port_ranges(draw):
    a, b = draw(ports), draw(ports)
    return min(a, b), max(a, b)


@st.composite
def firewall_rules(draw):
    smin, smax = draw(port_ranges())
    dmin, dmax = draw(port_ranges())
    masklen = draw(st.integers(0, 32))
    mask = (0xFFFFFFFF << (32 - masklen)) & 0xFFFFFFFF
    return FirewallRule(
        src_ip=draw(ips), src_ip_mask=draw(st.sampled_from([0, mask,
                                                             draw(ips)])),
        dst_ip=draw(ips), dst_ip_mask=draw(st.sampled_from([0, mask])),
        src_port_min=smin, src_port_max=smax,
        dst_port_min=dmin, dst_port_max=dmax,
        l4_proto=draw(st.sampled_from([PROTO_ANY, PROTO_TCP, PROTO_UDP,
                                       PROTO_ICMP, 47])),
        flags=draw(st.sampled_from([FLAG_ENABLED, FLAG_ENABLED | FLAG_ARP,
                                    0, FLAG_ARP])))


@st.composite
def summaries(draw):
    kind = draw(st.sampled_from(["tcp", "udp", "icmp", "gre", "arp",
                                 "ipv6"]))
    base = dict(src_mac=MacAddress(bytes(6)), dst_mac=MacAddress(bytes(6)),
                frame_len=64)
    if kind == "arp":
        return HeaderSummary(lev3_prot=ETHERTYPE_ARP, **base)
    if kind == "ipv6":
        return HeaderSummary(lev3_prot=0x86DD, **base)
    proto = {"tcp": 6, "udp": 17, "icmp": 1, "gre": 47}[kind]
    ported = proto in (6, 17)
    # small address/port pools make rule hits likely
    addr = st.one_of(ips, st.sampled_from([0, 0xC0A80001, 0x0A000001]))
    port = st.one_of(ports, st.integers(0, 1023))
    return HeaderSummary(
        lev3_prot=ETHERTYPE_IP, lev4_prot=proto, src_ip=draw(addr),
        dst_ip=draw(addr), src_port=draw(port) if ported else None,
        dst_port=draw(port) if ported else None,
        l3_checksum_ok=ChecksumStatus.OK, l4_checksum_ok=ChecksumStatus.OK,
        **base)


def random_summary(rng):
    """Plain-random counterpart of ``summaries()`` for large oracle loops."""
    zero = MacAddress(bytes(6))
    kind = rng.choice(["tcp", "udp", "icmp", "gre", "arp", "ipv6"])
    if kind == "arp":
        return HeaderSummary(zero, zero, ETHERTYPE_ARP, 64)
    if kind == "ipv6":
        return HeaderSummary(zero, zero, 0x86DD, 64)
    proto = {"tcp": 6, "udp": 17, "icmp": 1, "gre": 47}[kind]

    def addr():
        return rng.choice([0, 0xC0A80001, 0x0A000001,
                           rng.getrandbits(32)])

    def port():
        return rng.choice([rng.randrange(1024), rng.getrandbits(16)])

    ported = proto in (6, 17)
    return HeaderSummary(zero, zero, ETHERTYPE_IP, 64, lev4_prot=proto,
                         src_ip=addr(), dst_ip=addr(),
                         src_port=port() if ported else None,
                         dst_port=port() if ported else None)


def random_rule(rng):
    def prange():
        a = rng.choice([rng.randrange(1024), rng.getrandbits(16)])
        b = rng.choice([rng.randrange(1024), rng.getrandbits(16)])
        return min(a, b), max(a, b)

    def mask():
        n = rng.randint(0, 32)
        return rng.choice([0, (0xFFFFFFFF << (32 - n)) & 0xFFFFFFFF])

    (smin, smax), (dmin, dmax) = prange(), prange()
    return FirewallRule(
        src_ip=rng.choice([0xC0A80001, 0x0A000000, rng.getrandbits(32)]),
        src_ip_mask=mask(),
        dst_ip=rng.choice([0xC0A80001, 0x0A000000, rng.getrandbits(32)]),
        dst_ip_mask=mask(), src_port_min=smin, src_port_max=smax,
        dst_port_min=dmin, dst_port_max=dmax,
        l4_proto=rng.choice([PROTO_ANY, 6, 17, 1, 47]),
        flags=rng.choice([FLAG_ENABLED, FLAG_ENABLED | FLAG_ARP, 0, FLAG_ARP]))
