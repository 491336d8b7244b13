"""Report generation for WarpBoost.

This module renders job reports as JSON, Markdown and (for the benchmark)
CSV.
"""

import csv
import io
import json
from pathlib import Path

from warpboost.config.settings import ReportFormat
from warpboost.core.models import (
    BenchReport,
    GfmCheckReport,
    JobReport,
    PropertyCheck,
    RenderReport,
    RunReport,
)


class ReportGenerator:
    """Generates reports of job results.

    JSON output is the full model; Markdown output is a human-readable
    summary with one table per job kind.
    """

    CHECK_ICONS = {
        True: "[x]",  # Passed
        False: "[ ]",  # Failed
    }

    def __init__(self, include_config: bool = True, show_all_checks: bool = True) -> None:
        """Initialize the report generator.

        Args:
            include_config: Whether Markdown reports end with the resolved config.
            show_all_checks: If False, only show failed checks.
        """
        self.include_config = include_config
        self.show_all_checks = show_all_checks

    def generate_json(self, report: JobReport) -> str:
        """Serialize a report to JSON.

        Key order follows the model, so identical reports give identical bytes.
        """
        return json.dumps(report.model_dump(mode="json"), indent=2) + "\n"

    def generate_summary(self, report: JobReport) -> str:
        """One-line summary of a report."""
        status = "PASS" if report.passed else "FAIL"
        failed = len(report.failed_checks)
        if isinstance(report, RunReport):
            body = f"depth on {len(report.views)} views, mean final error {report.mean_final_error():.4f}"
        elif isinstance(report, RenderReport):
            psnrs = ", ".join(f"{m.view}: {m.psnr:.2f} dB" for m in report.targets)
            body = f"render ({report.depth_source.value} depth) {psnrs}"
        elif isinstance(report, BenchReport):
            body = (
                f"bench {report.height}x{report.width} D={report.depth} C={report.channels}, "
                f"min ratio {report.min_ratio:.2f}, max diff {report.max_abs_diff:.2e}"
            )
        elif isinstance(report, GfmCheckReport):
            body = f"gfm-check window={report.window} counts {report.counts}"
        else:
            body = type(report).__name__
        suffix = f" ({failed} check{'s' if failed != 1 else ''} failed)" if failed else ""
        return f"{status}: {body}{suffix}"

    def generate_markdown(self, report: JobReport) -> str:
        """Render a report as Markdown."""
        lines: list[str] = []

        if isinstance(report, RunReport):
            lines.extend(self._run_markdown(report))
        elif isinstance(report, RenderReport):
            lines.extend(self._render_markdown(report))
        elif isinstance(report, BenchReport):
            lines.extend(self._bench_markdown(report))
        elif isinstance(report, GfmCheckReport):
            lines.extend(self._gfm_markdown(report))

        lines.append("## Checks")
        lines.append("")
        lines.extend(self._format_checks(report.checks))
        lines.append("")

        if report.timings:
            lines.append("## Timings")
            lines.append("")
            lines.append("| Stage | Seconds |")
            lines.append("|---|---|")
            for stage, seconds in report.timings.items():
                lines.append(f"| {stage} | {seconds:.4f} |")
            lines.append("")

        if self.include_config:
            lines.append("## Configuration")
            lines.append("")
            lines.append("```json")
            lines.append(json.dumps(report.config, indent=2))
            lines.append("```")
            lines.append("")

        return "\n".join(lines)

    def generate_csv(self, report: BenchReport) -> str:
        """Benchmark trials as CSV, one row per trial."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["trial", "dense_bytes", "sparse_bytes", "ratio", "max_abs_diff", "dense_seconds", "sparse_seconds"]
        )
        for t in report.trials:
            writer.writerow(
                [
                    t.trial,
                    t.dense_bytes,
                    t.sparse_bytes,
                    f"{t.ratio:.4f}",
                    f"{t.max_abs_diff:.3e}",
                    "" if t.dense_seconds is None else t.dense_seconds,
                    "" if t.sparse_seconds is None else t.sparse_seconds,
                ]
            )
        return buffer.getvalue()

    def render(self, report: JobReport, fmt: ReportFormat) -> str:
        if fmt == ReportFormat.MARKDOWN:
            return self.generate_markdown(report)
        return self.generate_json(report)

    def write(self, report: JobReport, path: str | Path, fmt: ReportFormat) -> Path:
        """Write a report, creating parent directories."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(report, fmt), encoding="utf-8")
        return path

    def _format_checks(self, checks: list[PropertyCheck]) -> list[str]:
        lines = []
        for check in checks:
            if self.show_all_checks or not check.passed:
                line = f"- {self.CHECK_ICONS[check.passed]} **{check.name}**"
                if check.detail:
                    line += f": {check.detail}"
                lines.append(line)
        return lines

    def _run_markdown(self, report: RunReport) -> list[str]:
        lines = [f"# Depth Report: {report.scene}", ""]
        lines.append(f"- **Views**: {len(report.views)}")
        lines.append(f"- **Mean final error**: {report.mean_final_error():.4f}")
        lines.append(f"- **Peak correlation bytes**: {report.peak_correlation_bytes:,}")
        lines.append("")
        for view in report.views:
            lines.append(f"## View {view.view}")
            lines.append("")
            lines.append("| Unit | Resolution | D | Range | Mean abs | Mean rel | < half spacing |")
            lines.append("|---|---|---|---|---|---|---|")
            for u in view.units:
                width = "-" if u.range_width is None else f"{u.range_width:.4g}"
                lines.append(
                    f"| {u.unit} | {u.resolution} | {u.candidates} | {width} | "
                    f"{u.mean_abs:.4f} | {u.mean_abs_rel:.4f} | {u.within_half_spacing:.3f} |"
                )
            lines.append("")
        return lines

    def _render_markdown(self, report: RenderReport) -> list[str]:
        lines = [f"# Render Report: {report.scene}", ""]
        lines.append(f"- **Depth source**: {report.depth_source.value}")
        lines.append(f"- **Splats**: {report.splats:,}")
        lines.append("")
        lines.append("| View | PSNR (dB) | SSIM | Held out |")
        lines.append("|---|---|---|---|")
        for m in report.targets:
            lines.append(f"| {m.view} | {m.psnr:.2f} | {m.ssim:.4f} | {'Yes' if m.held_out else 'No'} |")
        lines.append("")
        return lines

    def _bench_markdown(self, report: BenchReport) -> list[str]:
        lines = [f"# Correlation Benchmark: {report.height}x{report.width}, D={report.depth}, C={report.channels}", ""]
        lines.append("| Trial | Dense bytes | Sparse bytes | Ratio | Max diff |")
        lines.append("|---|---|---|---|---|")
        for t in report.trials:
            lines.append(
                f"| {t.trial} | {t.dense_bytes:,} | {t.sparse_bytes:,} | {t.ratio:.2f} | {t.max_abs_diff:.2e} |"
            )
        lines.append("")
        return lines

    def _gfm_markdown(self, report: GfmCheckReport) -> list[str]:
        lines = [f"# GFM Check: seed {report.seed}", ""]
        lines.append(f"- **Window**: {report.window}")
        lines.append(f"- **Heads**: {report.heads}")
        lines.append(f"- **Channels**: {report.channels}")
        lines.append(f"- **Schedule**: {report.retain_schedule}")
        lines.append(f"- **Observed counts**: {report.counts}")
        if report.dense_max_diff is not None:
            lines.append(f"- **Dense reference gap**: {report.dense_max_diff:.3e}")
        lines.append("")
        return lines
