"""Display utilities for formatted console output."""

import csv
import io
import json
import logging
from typing import Dict, Iterable, List, Sequence

from tabulate import tabulate

from core.oracle.verification import VerificationReport
from core.policy.compiler import Compilation


class DisplayUtils:
    """Utility class for formatted display output."""

    @staticmethod
    def banner(title: str, width: int = 60) -> str:
        """
        Centered title between two rules.

        Args:
            title: Text to center
            width: Width of the rules in characters
        """
        return "\n".join(["=" * width, f"{title:^{width}}", "=" * width])

    @staticmethod
    def compile_rows(compilation: Compilation) -> List[List[object]]:
        """Label/value rows describing one compilation."""
        grid = compilation.grid
        stats = compilation.tree.stats
        return [
            ["dimension", compilation.maze.dimension],
            ["obstacles", compilation.maze.k],
            ["list sizes", " ".join(str(len(v)) for v in grid.lists)],
            ["valid corners", len(grid)],
            ["corners inside obstacles", grid.excluded_count],
            ["extended corners", grid.extended_count],
            ["unreachable corners", compilation.solution.unreachable_count],
            ["grid depth", f"{stats.grid_depth} (bound {stats.grid_bound})"],
            ["dir depth", f"{stats.dir_depth} (bound {stats.dir_bound})"],
            ["total depth", stats.total_depth],
            ["nodes", stats.node_count],
            ["leaves", stats.leaf_count],
            ["compile time", f"{compilation.seconds * 1000:.1f} ms"],
        ]

    @staticmethod
    def format_compile_stats(compilation: Compilation) -> str:
        """Format the corner counts and depth statistics printed by ``compile``.

        Args:
            compilation: Result of compile_policy.
        """
        return "\n".join(
            [
                DisplayUtils.banner("COMPILED POLICY"),
                tabulate(DisplayUtils.compile_rows(compilation), tablefmt="grid"),
            ]
        )

    @staticmethod
    def format_report(report: VerificationReport, fmt: str = "table") -> str:
        """Format a verification report.

        Args:
            report: Results of the verification checks.
            fmt: "table" (grid table plus a summary line), "json" or "csv".
        """
        rows = report.as_rows()
        if fmt == "json":
            return json.dumps({"passed": report.passed, "checks": rows}, indent=2)
        if fmt == "csv":
            return DisplayUtils.to_csv(rows, ["check", "passed", "detail"])
        table = [
            [r["check"], "PASS" if r["passed"] else "FAIL", r["detail"]] for r in rows
        ]
        summary = "ALL CHECKS PASSED" if report.passed else (
            f"{len(report.failures)} CHECK(S) FAILED"
        )
        return "\n".join(
            [
                tabulate(table, headers=["Check", "Result", "Detail"], tablefmt="grid"),
                summary,
            ]
        )

    @staticmethod
    def to_csv(rows: Iterable[Dict[str, object]], columns: Sequence[str]) -> str:
        """
        Render dict rows as CSV with a header line.

        Args:
            rows: One dict per row, keyed by column name
            columns: Column order
        """
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        return buffer.getvalue()

    @staticmethod
    def format_table(rows: List[Dict[str, object]], columns: Sequence[str]) -> str:
        """
        Render dict rows as a grid table.

        Args:
            rows: One dict per row, keyed by column name
            columns: Column order, also used as headers
        """
        return tabulate(
            [[row[c] for c in columns] for row in rows],
            headers=list(columns),
            tablefmt="grid",
        )

    @staticmethod
    def log_summary(report: VerificationReport) -> None:
        """Log pass/fail counts of a verification report."""
        logger = logging.getLogger(__name__)
        failed = len(report.failures)
        logger.info(
            f"Verification: {len(report.results) - failed} passed, {failed} failed"
        )
