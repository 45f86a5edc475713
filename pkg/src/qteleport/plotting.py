"""Static SVG bar charts of reports, theory values as dotted lines."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {"svg.hashsalt": "qteleport", "svg.fonttype": "none"}


def _theory_line(ax, x, width, value, label=None):
    ax.hlines(value, x - width / 2, x + width / 2, colors="black", linestyles="dotted", linewidth=1.5, label=label)


def _bars(ax, labels, values, theory=None):
    xs = range(len(labels))
    ax.bar(xs, values, width=0.6, color="tab:blue", label="measured")
    if theory is not None:
        for i, value in enumerate(theory):
            _theory_line(ax, i, 0.8, value, "theory" if i == 0 else None)
    ax.set_xticks(list(xs), labels)
    ax.set_ylim(0, 1)
    ax.set_ylabel("probability")


def _prep(ax, prep):
    values = [prep["p0"], prep["p1"]]
    _bars(ax, ["|0>", "|1>"], values, [prep["theory_p0"], prep["theory_p1"]])
    ax.set_title(f"initial state, {prep['shots']} shots" if prep["shots"] else "initial state (exact)")


def _teleport(fig, tele):
    outcomes = sorted(tele["per_outcome"])
    panels = fig.subplots(1, 2, sharey=True)
    for ax, key, theory, title in (
        (panels[0], "p_alpha", tele["theory_p_alpha"], "|alpha|^2"),
        (panels[1], "p_beta", tele["theory_p_beta"], "|beta|^2"),
    ):
        values = [tele["per_outcome"][o][key] or 0.0 for o in outcomes]
        _bars(ax, outcomes, values, [theory] * len(outcomes))
        ax.set_xlabel("Alice outcome (m_i m_A)")
        ax.set_title(f"Bob {title} ({tele['mode']})")
    panels[0].legend(loc="center right", fontsize="small")


def _histogram(ax, results):
    dist = results.get("distribution")
    if dist is not None:
        labels, values = dist["bitstrings"], dist["probabilities"]
        ax.set_title("exact distribution")
    else:
        hist = results["histogram"]
        shots = hist["shots"]
        labels = sorted(hist["counts"])
        values = [hist["counts"][k] / shots if shots else 0.0 for k in labels]
        ax.set_title(f"{shots} shots")
    _bars(ax, labels, values)


def render_report(report: dict, out_path) -> None:
    """Write an SVG chart for a validated report."""
    results = report["results"]
    with plt.rc_context(_STYLE):
        if "teleport" in results:
            fig = plt.figure(figsize=(9, 4))
            _teleport(fig, results["teleport"])
        else:
            fig, ax = plt.subplots(figsize=(6, 4))
            if "prep" in results:
                _prep(ax, results["prep"])
                ax.legend(loc="upper right", fontsize="small")
            elif results.get("histogram") is not None or results.get("distribution") is not None:
                _histogram(ax, results)
            else:
                plt.close(fig)
                raise ValueError("report contains no histogram, distribution or protocol results")
        fig.tight_layout()
        try:
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
