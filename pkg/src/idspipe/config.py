"""Generator config files (JSON).

Example::

    {
      "bus": "10g",
      "n_delay": 0,
      "mode": "continuous",
      "loops": 2,
      "frames": [{"proto": "udp", "total_len": 74, "src_port": 5000}],
      "port_sweep": {"template": {"proto": "tcp", "dst_port": 80},
                     "count": 1024},
      "pcap": "extra_frames.pcap"
    }

``frames``, ``port_sweep`` and ``pcap`` are all optional and concatenate
in that order.
"""

import json
import os

from .bus import BUSES
from .frames import (ETHERTYPE_ARP, ETHERTYPE_IP, PROTOCOL_NAMES, FrameSpec,
                     FrameSpecError, MacAddress, build_frame, ip_to_int)
from .generator import Mode, compile_schedule, sweep_source_ports
from .pcap import read_pcap


class ConfigError(ValueError):
    pass


_SPEC_KEYS = {"proto", "src_mac", "dst_mac", "src_ip", "dst_ip", "src_port",
              "dst_port", "payload_len", "total_len", "pad", "count"}


def frame_spec_from_dict(d):
    unknown = set(d) - _SPEC_KEYS
    if unknown:
        raise ConfigError("unknown frame keys: %s" % ", ".join(sorted(unknown)))
    proto = d.get("proto", "udp")
    kwargs = {}
    if proto == "arp":
        kwargs.update(l3_protocol=ETHERTYPE_ARP, l4_protocol=None)
    elif proto in PROTOCOL_NAMES:
        kwargs.update(l3_protocol=ETHERTYPE_IP,
                      l4_protocol=PROTOCOL_NAMES[proto])
    else:
        raise ConfigError("unknown proto %r" % proto)
    for key in ("src_mac", "dst_mac"):
        if key in d:
            kwargs[key] = MacAddress.parse(d[key])
    for key in ("src_ip", "dst_ip"):
        if key in d:
            kwargs[key] = ip_to_int(d[key])
    for key in ("src_port", "dst_port"):
        if key in d:
            kwargs[key] = int(d[key])
    kwargs["pad_to_minimum"] = bool(d.get("pad", True))
    if "total_len" in d:
        return FrameSpec.with_total_len(int(d["total_len"]), **kwargs)
    return FrameSpec(payload_len=int(d.get("payload_len", 0)), **kwargs)


def schedule_from_config(cfg, base_dir="."):
    try:
        bus = BUSES[cfg.get("bus", "10g")]
    except KeyError:
        raise ConfigError("bus must be one of %s" % ", ".join(BUSES)) from None
    frames = []
    try:
        for i, entry in enumerate(cfg.get("frames", [])):
            try:
                frame = build_frame(frame_spec_from_dict(entry))
            except (FrameSpecError, ValueError) as exc:
                raise ConfigError("frames[%d]: %s" % (i, exc)) from None
            frames.extend([frame] * int(entry.get("count", 1)))
        if "port_sweep" in cfg:
            sweep = cfg["port_sweep"]
            template = frame_spec_from_dict(sweep.get("template", {}))
            frames.extend(sweep_source_ports(template, int(sweep["count"])))
        if "pcap" in cfg:
            path = os.path.join(base_dir, cfg["pcap"])
            frames.extend(f for _, f in read_pcap(path))
        mode = Mode(cfg.get("mode", "single"))
        return compile_schedule(frames, int(cfg.get("n_delay", 0)), mode,
                                cfg=bus, loop_count=int(cfg.get("loops", 1)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def read_config(path):
    with open(path) as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("line %d: %s" % (exc.lineno, exc.msg)) from None
    if not isinstance(cfg, dict):
        raise ConfigError("line 1: config must be a JSON object")
    return cfg


def load_config(path):
    return schedule_from_config(read_config(path),
                                os.path.dirname(os.path.abspath(path)))
