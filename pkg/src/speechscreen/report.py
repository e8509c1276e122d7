"""Report consolidation and figure rendering.

Reads the JSON reports a run directory accumulates and emits delimited
data (CSV) plus SVG figures rendered with matplotlib. Rendering is a pure
function of the report data: fixed hash salt, no embedded dates, sorted
inputs — two runs over identical reports produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

matplotlib.rcParams["svg.hashsalt"] = "speechscreen"
matplotlib.rcParams["svg.fonttype"] = "none"  # keep labels as text, diffable

_SAVE_KW = {"metadata": {"Date": None}, "format": "svg"}


class RenderError(Exception):
    pass


_PANEL_KINDS = ("roc", "pr", "gains", "ppv_profile", "sensitivity_profile")


def _load_reports(reports_dir: Path) -> dict[str, dict]:
    reports = {}
    for path in sorted(reports_dir.glob("*_report.json")):
        name = path.name[:-len("_report.json")]
        reports[name] = json.loads(path.read_text(encoding="utf-8"))
    return reports


def _curves_by_kind(report: dict) -> dict:
    out = {}
    for c in report.get("curves", []):
        key = c["kind"] if c["kind"] != "density" else f"density:{c['group']}"
        out[key] = c
    return out


def _axis_labels(kind: str) -> tuple[str, str]:
    return {
        "roc": ("false positive rate", "true positive rate"),
        "pr": ("recall", "precision"),
        "gains": ("fraction of samples taken", "fraction of positives found"),
        "ppv_profile": ("score percentile", "positive predictive value"),
        "sensitivity_profile": ("score percentile", "sensitivity"),
    }[kind]


def render_report(reports_dir: str | Path, out_dir: str | Path) -> list[str]:
    """Consolidate every report in `reports_dir`; returns the list of
    files written (relative names)."""
    reports_dir = Path(reports_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = _load_reports(reports_dir)
    if not reports:
        raise RenderError(f"no *_report.json files in {reports_dir}")
    written: list[str] = []

    # ---- metrics table -------------------------------------------------
    rows = []
    for name, rep in sorted(reports.items()):
        agg = rep.get("aggregate", {})
        row = {"report": name, "model_kind": rep.get("model_kind", "")}
        for metric in ("f1", "auc", "precision", "recall"):
            row[f"{metric}_mean"] = agg.get(metric, {}).get("mean", "")
            row[f"{metric}_std"] = agg.get(metric, {}).get("std", "")
        row["n_extra_train"] = rep.get("n_extra_train", 0)
        rows.append(row)
    with (out / "metrics_summary.csv").open("w", newline="",
                                            encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    written.append("metrics_summary.csv")

    # ---- F1 bar chart --------------------------------------------------
    names = [r["report"] for r in rows]
    means = [r["f1_mean"] or 0.0 for r in rows]
    stds = [r["f1_std"] or 0.0 for r in rows]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(names)), 3.2))
    ax.bar(range(len(names)), means, yerr=stds, capsize=3, color="#4878a8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("test F1 (mean over seeds)")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(out / "f1_bars.svg", **_SAVE_KW)
    plt.close(fig)
    written.append("f1_bars.svg")

    # ---- curve data + six-panel sheet ----------------------------------
    missing = []
    for name, rep in sorted(reports.items()):
        if "curves" not in rep:
            continue
        kinds = _curves_by_kind(rep)
        for want in _PANEL_KINDS:
            if want not in kinds:
                missing.append(f"{name}:{want}")
    if missing:
        raise RenderError("missing curve series: " + ", ".join(missing))

    curve_reports = {n: r for n, r in sorted(reports.items())
                     if "curves" in r}
    if curve_reports:
        with (out / "curves.csv").open("w", newline="",
                                       encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["report", "kind", "group", "x", "y"])
            for name, rep in curve_reports.items():
                for c in rep["curves"]:
                    for x, y in c["points"]:
                        writer.writerow([name, c["kind"], c.get("group", ""),
                                         repr(float(x)), repr(float(y))])
        written.append("curves.csv")

        fig, axes = plt.subplots(2, 3, figsize=(12, 7))
        panel_axes = dict(zip(_PANEL_KINDS, axes.flat))
        density_ax = axes.flat[5]
        for name, rep in curve_reports.items():
            kinds = _curves_by_kind(rep)
            for kind in _PANEL_KINDS:
                c = kinds[kind]
                xs = [p[0] for p in c["points"]]
                ys = [p[1] for p in c["points"]]
                label = name
                if kind == "roc" and c.get("summary") is not None:
                    label = f"{name} (AUC {c['summary']:.3f})"
                panel_axes[kind].plot(xs, ys, label=label, linewidth=1.2)
            for group in ("case", "control"):
                c = kinds.get(f"density:{group}")
                if c and c["points"]:
                    xs = [p[0] for p in c["points"]]
                    ys = [p[1] for p in c["points"]]
                    style = "-" if group == "case" else "--"
                    density_ax.plot(xs, ys, style, linewidth=1.2,
                                    label=f"{name} {group}")
        for kind, ax in panel_axes.items():
            xl, yl = _axis_labels(kind)
            ax.set_xlabel(xl, fontsize=8)
            ax.set_ylabel(yl, fontsize=8)
            ax.tick_params(labelsize=7)
            ax.legend(fontsize=6)
            if kind == "roc":
                ax.plot([0, 1], [0, 1], color="#999999", linewidth=0.6,
                        linestyle=":")
        density_ax.set_xlabel("predicted probability of case", fontsize=8)
        density_ax.set_ylabel("fraction of class", fontsize=8)
        density_ax.tick_params(labelsize=7)
        density_ax.legend(fontsize=6)
        fig.tight_layout()
        fig.savefig(out / "panels.svg", **_SAVE_KW)
        plt.close(fig)
        written.append("panels.svg")

    # ---- quality extras (if the quality stage ran) ----------------------
    bleu_path = reports_dir / "quality_bleu.json"
    if bleu_path.exists():
        doc = json.loads(bleu_path.read_text(encoding="utf-8"))
        gens = sorted(doc)
        fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(gens)), 3.2))
        width = 0.2
        for i, n in enumerate(("1", "2", "3", "4")):
            vals = [doc[g]["scores"][n] for g in gens]
            ax.bar([x + (i - 1.5) * width for x in range(len(gens))],
                   vals, width=width, label=f"BLEU-{n}")
        ax.set_xticks(range(len(gens)))
        ax.set_xticklabels(gens, fontsize=8)
        ax.set_ylabel("score")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(out / "bleu_bars.svg", **_SAVE_KW)
        plt.close(fig)
        written.append("bleu_bars.svg")

    bert_path = reports_dir / "quality_bertscore.json"
    if bert_path.exists():
        doc = json.loads(bert_path.read_text(encoding="utf-8"))
        gens = sorted(doc)
        fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(gens)), 3.2))
        ax.bar(range(len(gens)), [doc[g]["f1"] for g in gens], color="#5a9e6f")
        ax.set_xticks(range(len(gens)))
        ax.set_xticklabels(gens, fontsize=8)
        ax.set_ylabel("token-similarity F1")
        fig.tight_layout()
        fig.savefig(out / "bertscore_bars.svg", **_SAVE_KW)
        plt.close(fig)
        written.append("bertscore_bars.svg")

    tsne_path = reports_dir / "tsne_coordinates.csv"
    if tsne_path.exists():
        groups: dict[str, list[tuple[float, float]]] = {}
        with tsne_path.open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                groups.setdefault(row["group"], []).append(
                    (float(row["x"]), float(row["y"])))
        fig, ax = plt.subplots(figsize=(5, 4.2))
        for group in sorted(groups):
            pts = groups[group]
            ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=8,
                       alpha=0.7, label=group)
        ax.legend(fontsize=7)
        ax.set_xticks([])
        ax.set_yticks([])
        fig.tight_layout()
        fig.savefig(out / "tsne_scatter.svg", **_SAVE_KW)
        plt.close(fig)
        written.append("tsne_scatter.svg")

    return written
