"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 input error, 3 internal error.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace

from . import __version__
from .alerts import open_sink
from .bus import BUSES
from .config import ConfigError, read_config, schedule_from_config
from .generator import Mode, run_generator
from .pcap import PcapError, PcapWriter, read_pcap
from .pipeline import sniff_parallel
from .rules import RuleError, format_rule, load_ruleset, pack_rule
from .stats import render_report
from .throughput import (DELAYS, LENGTHS_10G, LENGTHS_100G, sweep, sweep_csv,
                         write_series)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("idspipe")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _read_rules(path):
    try:
        with open(path, "rb") as fh:
            return load_ruleset(fh.read())
    except OSError as exc:
        raise InputError("cannot read rules: %s" % exc) from None
    except (RuleError, UnicodeDecodeError) as exc:
        raise InputError("%s: %s" % (path, exc)) from None


def cmd_sniff(args):
    rules = _read_rules(args.rules)
    try:
        records = read_pcap(args.input)
    except (OSError, PcapError) as exc:
        raise InputError("%s: %s" % (args.input, exc)) from None
    sink = open_sink(args.alerts) if args.alerts else None
    try:
        stats = sniff_parallel(records, rules, sink, args.workers)
    finally:
        if sink is not None:
            sink.close()
    with open(args.report, "wb") as fh:
        fh.write(render_report(stats, args.format))
    if args.plot:
        from .plotting import plot_stats
        plot_stats(stats, args.plot)
    if sink is not None and sink.warnings:
        log.warning("%d alerts could not be delivered", sink.warnings)
    return EXIT_OK


def cmd_generate(args):
    try:
        cfg = read_config(args.config)
        forever = cfg.get("mode") == Mode.CONTINUOUS.value and \
            cfg.get("loops") == 0
        if forever:
            cfg = dict(cfg, loops=1)
        if args.loops is not None:
            cfg = dict(cfg, mode=Mode.CONTINUOUS.value, loops=args.loops)
            forever = False
        schedule = schedule_from_config(
            cfg, os.path.dirname(os.path.abspath(args.config)))
    except OSError as exc:
        raise InputError("cannot read config: %s" % exc) from None
    except (ConfigError, PcapError) as exc:
        raise InputError("%s: %s" % (args.config, exc)) from None
    run = run_generator(schedule)
    period = run.total_cycles / schedule.cfg.clock_hz
    written = 0
    with PcapWriter(args.out) as writer:
        offset = 0.0
        try:
            while True:
                for frame, ts in zip(run.frames, run.timestamps()):
                    writer.write(frame, offset + ts)
                    written += 1
                if not forever:
                    break
                offset += period
        except KeyboardInterrupt:
            log.info("stopped after %d frames", written)
    print("wrote %d frames (%d cycles, %.6f s) to %s"
          % (written, run.total_cycles, period, args.out))
    return EXIT_OK


def cmd_sweep(args):
    cfg = BUSES[args.bus]
    if args.n_mac is not None:
        cfg = replace(cfg, n_mac=args.n_mac)
    lengths = LENGTHS_10G if args.bus == "10g" else LENGTHS_100G
    points = sweep(lengths, DELAYS, cfg)
    with open(args.out, "w") as fh:
        fh.write(sweep_csv(points))
    if args.series_dir:
        write_series(points, args.series_dir)
    if args.plot:
        from .plotting import plot_sweep
        plot_sweep(points, args.plot,
                   title="%s bus, N_MAC=%d" % (args.bus, cfg.n_mac))
    return EXIT_OK


def cmd_rules_check(args):
    rules = _read_rules(args.file)
    print("%d/16 rules" % len(rules))
    for i, rule in enumerate(rules):
        print("%2d %s %s" % (i, pack_rule(rule).hex(), format_rule(rule)))
    return EXIT_OK


def build_parser():
    p = _Parser(prog="idspipe", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sniff", help="replay a pcap through the sniffer")
    s.add_argument("--in", dest="input", required=True, metavar="PCAP")
    s.add_argument("--rules", required=True)
    s.add_argument("--report", required=True)
    s.add_argument("--alerts", metavar="FILE|udp:HOST:PORT")
    s.add_argument("--format", choices=("text", "csv", "json"), default="text")
    s.add_argument("--plot", metavar="PNG", help="also draw the counters")
    s.add_argument("--workers", type=int, default=1,
                   help="analyze in N processes and merge the counters")
    s.set_defaults(func=cmd_sniff)

    g = sub.add_parser("generate", help="write a generator schedule to pcap")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--loops", type=int,
                   help="force continuous mode with this many passes")
    g.set_defaults(func=cmd_generate)

    w = sub.add_parser("sweep", help="data rate over the length/delay grid")
    w.add_argument("--bus", choices=sorted(BUSES), default="10g")
    w.add_argument("--out", required=True)
    w.add_argument("--n-mac", type=int)
    w.add_argument("--series-dir")
    w.add_argument("--plot", metavar="PNG")
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("rules-check", help="validate and echo a rule file")
    r.add_argument("file")
    r.set_defaults(func=cmd_rules_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover
        print("internal error: %r" % exc, file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
