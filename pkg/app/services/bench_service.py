"""
Benchmark Service

Solves every instance file of a directory and aggregates the results by
(class, n) into the reporting columns: bound sums, preprocessing share,
start values, OPP and cut counters, timings and the number of instances
closed.
"""

import csv
import logging
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from math import ceil
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from pydantic import BaseModel, Field

from app.models.instance import SolveStatus
from app.services.exceptions import SolverError
from app.services.instance_service import read_instance
from app.services.master_service import MasterConfig, solve

logger = logging.getLogger(__name__)

INSTANCE_SUFFIXES = {".2bp", ".bpp", ".txt", ".ins", ".dat"}


class InstanceRow(BaseModel):
    """Result columns of one instance."""

    name: str
    problem_class: int = 0
    n: int = 0
    lc: int = 0
    removed_pct: float = 0.0
    lc_reduced: int = 0
    l0: int = 0
    u0: int = 0
    sec0: float = 0.0
    opt0: bool = False
    L: int = 0
    U: int = 0
    opp_calls: int = 0
    cuts: int = 0
    opp_seconds: float = 0.0
    seconds: float = 0.0
    opt: bool = False
    error: Optional[str] = Field(None, description="Set when the file could not be solved")


class BenchRow(BaseModel):
    """Aggregate of one (class, n) group; counts and sums over its instances."""

    problem_class: int
    n: int
    instances: int = 0
    lc: int = 0
    removed_pct: float = 0.0
    lc_reduced: int = 0
    l0: int = 0
    u0: int = 0
    sec0: float = 0.0
    opt0: int = 0
    L: int = 0
    U: int = 0
    opp_calls: int = 0
    cuts: int = 0
    opp_seconds: float = 0.0
    seconds: float = 0.0
    opt: int = 0


def instance_files(directory: Path) -> List[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() in INSTANCE_SUFFIXES)


def solve_file(path: str, cfg: MasterConfig, dims_order: Optional[str] = None) -> InstanceRow:
    """Solve one file; read and solver errors become an error row."""
    name = Path(path).stem
    try:
        inst = read_instance(path, dims_order=dims_order)
    except (OSError, SolverError) as e:
        logger.warning(f"⚠️ Skipping {name}: {e}")
        return InstanceRow(name=name, error=str(e))

    try:
        sol = solve(inst, cfg)
    except SolverError as e:
        logger.error(f"❌ Solve failed for {name}: {e}")
        return InstanceRow(name=name, problem_class=inst.problem_class or 0, n=inst.n, error=str(e))

    stats = sol.stats
    return InstanceRow(
        name=name,
        problem_class=inst.problem_class or 0,
        n=inst.n,
        lc=ceil(stats.lc - 1e-9),
        removed_pct=stats.removed_pct,
        lc_reduced=ceil(stats.lc_reduced - 1e-9),
        l0=stats.l0,
        u0=stats.u0,
        sec0=stats.sec0,
        opt0=stats.l0 >= stats.u0 and not sol.external_bound,
        L=sol.lower_bound,
        U=sol.upper_bound,
        opp_calls=stats.opp_calls,
        cuts=stats.cuts_added,
        opp_seconds=stats.opp_seconds,
        seconds=stats.seconds,
        opt=sol.status == SolveStatus.OPTIMAL,
    )


def aggregate(rows: Iterable[InstanceRow]) -> List[BenchRow]:
    """One row per (class, n) present, in sorted order; error rows are left out."""
    groups: "OrderedDict[Tuple[int, int], BenchRow]" = OrderedDict()
    for row in sorted(rows, key=lambda r: (r.problem_class, r.n, r.name)):
        if row.error:
            continue
        key = (row.problem_class, row.n)
        group = groups.setdefault(key, BenchRow(problem_class=row.problem_class, n=row.n))
        group.instances += 1
        group.lc += row.lc
        group.lc_reduced += row.lc_reduced
        group.l0 += row.l0
        group.u0 += row.u0
        group.sec0 += row.sec0
        group.opt0 += int(row.opt0)
        group.L += row.L
        group.U += row.U
        group.opp_calls += row.opp_calls
        group.cuts += row.cuts
        group.opp_seconds += row.opp_seconds
        group.seconds += row.seconds
        group.opt += int(row.opt)
        group.removed_pct += row.removed_pct
    for group in groups.values():
        group.removed_pct /= group.instances
    return list(groups.values())


def run_bench(
    directory: Path, cfg: MasterConfig, threads: int = 1, dims_order: Optional[str] = None
) -> Tuple[List[InstanceRow], List[BenchRow]]:
    """
    Solve every instance of a directory.

    Args:
        directory (Path): folder of instance files
        cfg (MasterConfig): solver configuration applied to every instance
        threads (int): worker processes; 1 solves in this process

    Returns:
        Tuple[List[InstanceRow], List[BenchRow]]: per-instance rows in file
        order and the group aggregates
    """
    files = [str(p) for p in instance_files(directory)]
    logger.info(f"🚀 Benchmark over {len(files)} files with {threads} worker(s)")
    if threads > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(solve_file, files, [cfg] * len(files), [dims_order] * len(files)))
    else:
        rows = [solve_file(path, cfg, dims_order) for path in files]
    return rows, aggregate(rows)


TABLE_COLUMNS = [
    ("class", "problem_class", 5, None),
    ("n", "n", 4, None),
    ("Lc", "lc", 6, None),
    ("%rmv", "removed_pct", 6, 1),
    ("L'c", "lc_reduced", 6, None),
    ("L0", "l0", 6, None),
    ("U0", "u0", 6, None),
    ("sec0", "sec0", 8, 2),
    ("opt0", "opt0", 5, None),
    ("L", "L", 6, None),
    ("U", "U", 6, None),
    ("#OPP", "opp_calls", 7, None),
    ("#cuts", "cuts", 7, None),
    ("secOPP", "opp_seconds", 8, 2),
    ("sec", "seconds", 9, 2),
    ("opt", "opt", 4, None),
]


def format_table(groups: Iterable[BenchRow]) -> str:
    """Fixed-width text table, one line per group."""
    lines = [" ".join(f"{title:>{width}}" for title, _, width, _ in TABLE_COLUMNS)]
    for group in groups:
        cells = []
        for _, attr, width, digits in TABLE_COLUMNS:
            value = getattr(group, attr)
            cells.append(f"{value:>{width}.{digits}f}" if digits is not None else f"{value:>{width}}")
        lines.append(" ".join(cells))
    return "\n".join(lines)


CSV_FIELDS = ["kind"] + list(InstanceRow.__fields__) + ["instances"]


def write_bench_csv(path: Path, rows: Iterable[InstanceRow], groups: Iterable[BenchRow]) -> None:
    """One row per instance (kind=instance) followed by one per group (kind=group)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({"kind": "instance", **row.dict()})
        for group in groups:
            writer.writerow({"kind": "group", "name": "", **group.dict()})


def read_bench_csv(path: Path) -> Tuple[List[InstanceRow], List[BenchRow]]:
    rows: List[InstanceRow] = []
    groups: List[BenchRow] = []
    with open(path, newline="", encoding="utf-8") as handle:
        for record in csv.DictReader(handle):
            kind = record.pop("kind")
            values = {k: v for k, v in record.items() if v != ""}
            if kind == "instance":
                values.pop("instances", None)
                rows.append(InstanceRow(**values))
            else:
                values.pop("name", None)
                values.pop("error", None)
                groups.append(BenchRow(**values))
    return rows, groups
