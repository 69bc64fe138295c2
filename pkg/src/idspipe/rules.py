"""Whitelist rule memory and rule check.

Rules live in 16 slots of 224 bits (four memories of four words). A frame
is allowed when at least one enabled rule matches it; everything else is
blocked.
"""

import enum
import ipaddress
import struct
from dataclasses import dataclass
from typing import Optional, Tuple

from .frames import (ETHERTYPE_ARP, ETHERTYPE_IP, PROTO_ICMP, PROTO_TCP,
                     PROTO_UDP, PROTOCOL_NAMES, int_to_ip)

RULE_BYTES = 28
RULE_MEMORIES = 4
WORDS_PER_MEMORY = 4
MAX_RULES = RULE_MEMORIES * WORDS_PER_MEMORY
PROTO_ANY = 0xFF

FLAG_ENABLED = 0x01
FLAG_ARP = 0x02

RULE_STRUCT = struct.Struct("!IIIIHHHHBBH")
BINARY_MAGIC = b"FWR1"

VERDICT_ALLOWED = 3
VERDICT_BLOCKED = 0


class RuleError(ValueError):
    pass


class RuleParseError(RuleError):
    def __init__(self, lineno, message):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


class CapacityError(RuleError):
    pass


class PacketType(enum.IntEnum):
    OTHER = 0
    TCP = 1
    UDP = 2
    ICMP = 3
    ARP = 4


@dataclass(frozen=True)
class FirewallRule:
    src_ip: int = 0
    src_ip_mask: int = 0
    dst_ip: int = 0
    dst_ip_mask: int = 0
    src_port_min: int = 0
    src_port_max: int = 0xFFFF
    dst_port_min: int = 0
    dst_port_max: int = 0xFFFF
    l4_proto: int = PROTO_ANY
    flags: int = FLAG_ENABLED
    reserved: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("src_ip", "src_ip_mask", "dst_ip", "dst_ip_mask"):
            if not 0 <= getattr(self, name) <= 0xFFFFFFFF:
                raise RuleError("%s is not a 32-bit value" % name)
        for name in ("src_port_min", "src_port_max", "dst_port_min",
                     "dst_port_max"):
            if not 0 <= getattr(self, name) <= 0xFFFF:
                raise RuleError("%s is not a 16-bit value" % name)
        if not 0 <= self.l4_proto <= 0xFF or not 0 <= self.flags <= 0xFF:
            raise RuleError("l4_proto and flags are 8-bit fields")
        if self.src_port_min > self.src_port_max:
            raise RuleError("src_port_min %d > src_port_max %d"
                            % (self.src_port_min, self.src_port_max))
        if self.dst_port_min > self.dst_port_max:
            raise RuleError("dst_port_min %d > dst_port_max %d"
                            % (self.dst_port_min, self.dst_port_max))
        if self.reserved:
            raise RuleError("reserved bits must be zero")

    @property
    def enabled(self):
        return bool(self.flags & FLAG_ENABLED)

    @property
    def matches_arp(self):
        return bool(self.flags & FLAG_ARP)


@dataclass(frozen=True)
class RuleSet:
    rules: Tuple[FirewallRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if len(self.rules) > MAX_RULES:
            raise CapacityError("rule memory holds at most %d rules, got %d"
                                % (MAX_RULES, len(self.rules)))

        compiled = tuple(
            (i, r.src_ip & r.src_ip_mask, r.src_ip_mask,
             r.dst_ip & r.dst_ip_mask, r.dst_ip_mask, r.l4_proto,
             r.src_port_min, r.src_port_max, r.dst_port_min, r.dst_port_max)
            for i, r in enumerate(self.rules) if r.enabled)
        object.__setattr__(self, "_compiled", compiled)
        object.__setattr__(self, "_arp_index", next(
            (i for i, r in enumerate(self.rules)
             if r.enabled and r.matches_arp), None))

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def first_match(self, s):
        """Index of the lowest enabled rule matching summary ``s``."""
        if s.lev3_prot != ETHERTYPE_IP:
            return self._arp_index if s.lev3_prot == ETHERTYPE_ARP else None
        sip, dip, proto = s.src_ip, s.dst_ip, s.lev4_prot
        sport, dport = s.src_port, s.dst_port
        ported = sport is not None
        for (i, rsip, smask, rdip, dmask, rproto,
             smin, smax, dmin, dmax) in self._compiled:
            if sip & smask != rsip or dip & dmask != rdip:
                continue
            if rproto != PROTO_ANY and rproto != proto:
                continue
            if ported and not (smin <= sport <= smax and dmin <= dport <= dmax):
                continue
            return i
        return None

    def memory_image(self):
        """Rules laid out as 4 memories x 4 words of 28 bytes; empty slots
        are zero (a zero word has the enable bit clear)."""
        words = [pack_rule(r) for r in self.rules]
        words += [bytes(RULE_BYTES)] * (MAX_RULES - len(words))
        return [words[m * WORDS_PER_MEMORY:(m + 1) * WORDS_PER_MEMORY]
                for m in range(RULE_MEMORIES)]


@dataclass(frozen=True)
class Verdict:
    code: int
    matched_rule_index: Optional[int] = None

    @property
    def allowed(self):
        return self.code == VERDICT_ALLOWED


BLOCKED = Verdict(VERDICT_BLOCKED)


def pack_rule(rule):
    rule.validate()
    return RULE_STRUCT.pack(rule.src_ip, rule.src_ip_mask, rule.dst_ip,
                            rule.dst_ip_mask, rule.src_port_min,
                            rule.src_port_max, rule.dst_port_min,
                            rule.dst_port_max, rule.l4_proto, rule.flags,
                            rule.reserved)


def unpack_rule(data):
    if len(data) != RULE_BYTES:
        raise RuleError("a packed rule is %d bytes, got %d"
                        % (RULE_BYTES, len(data)))
    return FirewallRule(*RULE_STRUCT.unpack(bytes(data)))


def evaluate(summary, rules):
    """Whitelist check: allowed (3) with the lowest matching rule index,
    else blocked (0)."""
    if not isinstance(rules, RuleSet):
        rules = RuleSet(rules)
    i = rules.first_match(summary)
    return BLOCKED if i is None else Verdict(VERDICT_ALLOWED, i)


def classify_packet_type(summary):
    if summary.lev3_prot == ETHERTYPE_ARP:
        return PacketType.ARP
    if summary.lev3_prot == ETHERTYPE_IP:
        return {PROTO_TCP: PacketType.TCP, PROTO_UDP: PacketType.UDP,
                PROTO_ICMP: PacketType.ICMP}.get(summary.lev4_prot,
                                                 PacketType.OTHER)
    return PacketType.OTHER


# -- rule files --------------------------------------------------------------

def _parse_net(token):
    if token == "any":
        return 0, 0
    net = ipaddress.IPv4Network(token, strict=False)
    addr = int(ipaddress.IPv4Address(token.split("/")[0]))
    return addr, int(net.netmask)


def _parse_range(token):
    if token == "any":
        return 0, 0xFFFF
    lo, sep, hi = token.partition("-")
    lo = int(lo)
    hi = int(hi) if sep else lo
    return lo, hi


def parse_rule_line(line, lineno=0):
    """Parse ``allow src <ip>/<len> dst <ip>/<len> sport <a>-<b>
    dport <a>-<b> proto <tcp|udp|icmp|any> [arp]``.

    Every clause is optional and defaults to a wildcard.
    """
    tokens = line.split()
    if not tokens or tokens[0] != "allow":
        raise RuleParseError(lineno, "rule must start with 'allow'")
    fields = {}
    flags = FLAG_ENABLED
    i = 1
    try:
        while i < len(tokens):
            key = tokens[i]
            if key == "arp":
                flags |= FLAG_ARP
                i += 1
                continue
            if key == "disabled":
                flags &= ~FLAG_ENABLED
                i += 1
                continue
            if i + 1 >= len(tokens):
                raise RuleParseError(lineno, "missing value for %r" % key)
            value = tokens[i + 1]
            if key in ("src", "dst"):
                fields[key + "_ip"], fields[key + "_ip_mask"] = _parse_net(value)
            elif key in ("sport", "dport"):
                prefix = "src" if key == "sport" else "dst"
                (fields[prefix + "_port_min"],
                 fields[prefix + "_port_max"]) = _parse_range(value)
            elif key == "proto":
                if value == "any":
                    fields["l4_proto"] = PROTO_ANY
                elif value in PROTOCOL_NAMES:
                    fields["l4_proto"] = PROTOCOL_NAMES[value]
                else:
                    fields["l4_proto"] = int(value)
            else:
                raise RuleParseError(lineno, "unknown keyword %r" % key)
            i += 2
        return FirewallRule(flags=flags, **fields)
    except RuleParseError:
        raise
    except ValueError as exc:
        raise RuleParseError(lineno, str(exc)) from None


def load_text_rules(text):
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if len(rules) == MAX_RULES:
            raise CapacityError("line %d: rule memory holds at most %d rules"
                                % (lineno, MAX_RULES))
        rules.append(parse_rule_line(line, lineno))
    return RuleSet(rules)


def load_binary_rules(data):
    if data[:4] != BINARY_MAGIC:
        raise RuleError("bad magic %r" % data[:4])
    if len(data) < 5:
        raise RuleError("missing rule count")
    count = data[4]
    if count > MAX_RULES:
        raise CapacityError("rule memory holds at most %d rules, file has %d"
                            % (MAX_RULES, count))
    body = data[5:]
    if len(body) != count * RULE_BYTES:
        raise RuleError("expected %d rule bytes, found %d"
                        % (count * RULE_BYTES, len(body)))
    rules = []
    for i in range(count):
        try:
            rules.append(unpack_rule(body[i * RULE_BYTES:(i + 1) * RULE_BYTES]))
        except RuleError as exc:
            raise RuleError("rule %d: %s" % (i, exc)) from None
    return RuleSet(rules)


def load_ruleset(source):
    """Load rules from file content: binary (``FWR1`` magic) or text."""
    if isinstance(source, (bytes, bytearray)):
        if source[:4] == BINARY_MAGIC:
            return load_binary_rules(bytes(source))
        source = source.decode("utf-8")
    return load_text_rules(source)


def dump_binary_rules(ruleset):
    return BINARY_MAGIC + bytes([len(ruleset)]) + b"".join(
        pack_rule(r) for r in ruleset)


def _mask_len(mask):
    return bin(mask).count("1")


def format_rule(rule):
    """Text form of a rule (inverse of parse_rule_line for prefix masks)."""
    parts = ["allow"]
    for side in ("src", "dst"):
        ip = getattr(rule, side + "_ip")
        mask = getattr(rule, side + "_ip_mask")
        parts += [side, "any" if not mask else
                  "%s/%d" % (int_to_ip(ip), _mask_len(mask))]
    for key, side in (("sport", "src"), ("dport", "dst")):
        lo = getattr(rule, side + "_port_min")
        hi = getattr(rule, side + "_port_max")
        parts += [key, "any" if (lo, hi) == (0, 0xFFFF) else "%d-%d" % (lo, hi)]
    names = {v: k for k, v in PROTOCOL_NAMES.items()}
    proto = ("any" if rule.l4_proto == PROTO_ANY
             else names.get(rule.l4_proto, str(rule.l4_proto)))
    parts += ["proto", proto]
    if rule.matches_arp:
        parts.append("arp")
    if not rule.enabled:
        parts.append("disabled")
    return " ".join(parts)


def port_range_rule(lo, hi, proto=PROTO_TCP):
    """Rule allowing only ``proto`` frames whose source port is in lo..hi."""
    return FirewallRule(src_port_min=lo, src_port_max=hi, l4_proto=proto)
