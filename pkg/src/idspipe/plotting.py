"""Figures written next to the CSV/report outputs."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_sweep(points, path, title=None):
    """Data rate (Gbit/s) against inter-frame delay, one line per length.

    Delay 0 cannot sit on a log axis, so the x axis is symlog.
    """
    by_len = {}
    for p in points:
        by_len.setdefault(p.frame_len, []).append(p)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for length, rows in sorted(by_len.items()):
        ax.plot([p.n_delay for p in rows], [p.dr_gbps for p in rows],
                marker="o", markersize=3, label="%d B" % length)
    ax.set_xscale("symlog", linthresh=1)
    ax.set_xlabel("inter-frame delay (clock cycles)")
    ax.set_ylabel("data rate (Gbit/s)")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_stats(stats, path):
    """Verdict and protocol counters as two bar panels."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(7.5, 3.4))
    left.bar(["allowed", "blocked", "errored"],
             [stats.allowed, stats.blocked, stats.errored_frames],
             color=["tab:green", "tab:red", "tab:gray"])
    left.set_ylabel("frames")
    protos = ["tcp", "udp", "icmp", "arp", "other"]
    right.bar(protos, [getattr(stats, k) for k in protos])
    for ax in (left, right):
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_filtering(runs, path):
    """Allowed vs blocked per transmission; ``runs`` holds
    ``(label, allowed, blocked)`` tuples."""
    labels = [r[0] for r in runs]
    allowed = [r[1] for r in runs]
    blocked = [r[2] for r in runs]
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.bar(labels, blocked, color="tab:red", label="blocked")
    ax.bar(labels, allowed, bottom=blocked, color="tab:green", label="allowed")
    ax.set_xlabel("allowed source ports")
    ax.set_ylabel("frames")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
