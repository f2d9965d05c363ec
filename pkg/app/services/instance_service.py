"""
Instance Service

Parses and serializes instance files, computes the continuous bound and
verifies solutions. verify_solution is the feasibility oracle every other
service and test relies on.
"""

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.models.instance import (
    Instance,
    Item,
    PackedBin,
    Placement,
    Solution,
    SolveStatus,
    VerificationResult,
)
from app.services.exceptions import InstanceParseError

logger = logging.getLogger(__name__)

NATIVE = "native"
TWOBP = "2bp"
FORMATS = (NATIVE, TWOBP)

CLASS_FROM_NAME = re.compile(r"cl_?(\d+)_(\d+)_(\d+)", re.IGNORECASE)


def _records(text: str) -> List[Tuple[int, List[int]]]:
    """Leading integer tokens of every non-empty line, with 1-based line numbers."""
    records = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        values = []
        for token in line.split():
            try:
                values.append(int(token))
            except ValueError:
                break
        records.append((number, values))
    return records


def _orient(pair: Sequence[int], dims_order: str) -> Tuple[int, int]:
    first, second = pair[0], pair[1]
    return (first, second) if dims_order == "wh" else (second, first)


def _build(
    bin_record: Tuple[int, List[int]],
    item_records: Sequence[Tuple[int, List[int]]],
    dims_order: str,
    **kwargs,
) -> Instance:
    line, values = bin_record
    if len(values) < 2:
        raise InstanceParseError("expected bin dimensions", line)
    W, H = _orient(values, dims_order)
    if W <= 0 or H <= 0:
        raise InstanceParseError("non-positive bin dimension", line)

    items = []
    for index, (line, values) in enumerate(item_records):
        if len(values) < 2:
            raise InstanceParseError(f"expected two dimensions for item {index}", line)
        w, h = _orient(values, dims_order)
        if w <= 0 or h <= 0:
            raise InstanceParseError(f"non-positive dimension for item {index}", line)
        if w > W:
            raise InstanceParseError(f"item {index} exceeds bin width", line)
        if h > H:
            raise InstanceParseError(f"item {index} exceeds bin height", line)
        items.append(Item(id=index, width=w, height=h))

    return Instance(items=items, W=W, H=H, **kwargs)


def _parse_native(text: str, dims_order: str) -> Instance:
    records = _records(text)
    if not records:
        raise InstanceParseError("empty instance", 1)

    line, values = records[0]
    if len(values) != 1:
        raise InstanceParseError("expected the item count", line)
    n = values[0]
    if n < 1:
        raise InstanceParseError("instance has no items", line)
    if len(records) < 2:
        raise InstanceParseError("missing bin dimensions", line + 1)

    item_records = records[2:]
    if len(item_records) != n:
        last = records[-1][0]
        raise InstanceParseError(f"expected {n} items, found {len(item_records)}", last)
    return _build(records[1], item_records, dims_order)


def _parse_twobp(text: str, dims_order: str) -> Instance:
    """
    Classical benchmark layout: optional class line, the item count, an
    optional instance-id line, the bin line, then one line per item.
    Trailing text on each line is ignored.
    """
    records = [record for record in _records(text) if record[1]]
    if not records:
        raise InstanceParseError("empty instance", 1)

    first_error = None
    for position, (line, values) in enumerate(records):
        if len(values) != 1 or values[0] < 1:
            continue
        n = values[0]
        rest = records[position + 1:]
        if len(rest) not in (n + 1, n + 2):
            continue
        bin_record = rest[-n - 1]
        if len(bin_record[1]) < 2 or any(len(v) < 2 for _, v in rest[-n:]):
            continue
        problem_class = records[0][1][0] if position > 0 and len(records[0][1]) == 1 else None
        try:
            return _build(bin_record, rest[-n:], dims_order, problem_class=problem_class)
        except InstanceParseError as e:
            first_error = first_error or e

    if first_error is not None:
        raise first_error
    raise InstanceParseError("could not locate item count, bin line and item lines", records[0][0])


def parse_instance(text: str, fmt: str = NATIVE, dims_order: Optional[str] = None) -> Instance:
    """
    Parse an instance from text.

    Args:
        text (str): file contents, LF or CRLF line endings
        fmt (str): "native" or "2bp"
        dims_order (Optional[str]): "wh" or "hw"; defaults to "wh" for native
            files and "hw" for .2bp files

    Returns:
        Instance: items in file order, m initialized to n

    Raises:
        InstanceParseError: malformed content, naming the offending line
    """
    if fmt not in FORMATS:
        raise InstanceParseError(f"unknown format '{fmt}'")
    order = dims_order or ("wh" if fmt == NATIVE else "hw")
    if order not in ("wh", "hw"):
        raise InstanceParseError(f"unknown dims order '{order}'")

    if fmt == NATIVE:
        return _parse_native(text, order)
    return _parse_twobp(text, order)


def detect_format(path: Path) -> str:
    return TWOBP if path.suffix.lower() in (".2bp", ".bpp") else NATIVE


def read_instance(path, fmt: Optional[str] = None, dims_order: Optional[str] = None) -> Instance:
    """Read an instance file, naming it after the file and inferring its class."""
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise InstanceParseError(f"cannot read {path}: {e}") from e

    instance = parse_instance(text, fmt or detect_format(path), dims_order)
    problem_class = instance.problem_class
    match = CLASS_FROM_NAME.search(path.stem)
    if problem_class is None and match:
        problem_class = int(match.group(1))

    return Instance(
        items=instance.items, W=instance.W, H=instance.H, name=path.stem, problem_class=problem_class
    )


def serialize_instance(inst: Instance, fmt: str = NATIVE, dims_order: Optional[str] = None) -> str:
    """Write an instance in either format; parse_instance reads it back unchanged."""
    order = dims_order or ("wh" if fmt == NATIVE else "hw")

    def pair(w: int, h: int) -> str:
        return f"{w} {h}" if order == "wh" else f"{h} {w}"

    if fmt == NATIVE:
        lines = [str(inst.n), pair(inst.W, inst.H)]
        lines += [pair(item.width, item.height) for item in inst.items]
        return "\n".join(lines) + "\n"

    if fmt != TWOBP:
        raise InstanceParseError(f"unknown format '{fmt}'")
    header = "HBIN,WBIN" if order == "hw" else "WBIN,HBIN"
    lines = []
    if inst.problem_class is not None:
        lines.append(f"{inst.problem_class:5d}   PROBLEM CLASS")
    lines.append(f"{inst.n:5d}   N. OF ITEMS")
    lines.append(f"{1:5d}{1:5d}   RELATIVE AND ABSOLUTE N. OF INSTANCE")
    lines.append(f"{pair(inst.W, inst.H)}   {header}")
    lines += [pair(item.width, item.height) for item in inst.items]
    return "\n".join(lines) + "\n"


def continuous_bound(inst: Instance) -> Fraction:
    """Total item area over bin area, exact."""
    return Fraction(inst.total_area, inst.A)


def _overlap(a: Tuple[int, int, int, int], b: Tuple[int, int, int, int]) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def verify_placement(
    dims: Dict[int, Tuple[int, int]], W: int, H: int, item_ids: Iterable[int], placement: Placement
) -> Optional[str]:
    """First violation of a single-bin placement, or None when it is valid."""
    rects = []
    for j in item_ids:
        if j not in placement.coords:
            return f"item {j} missing coordinates"
        x, y = placement.coords[j]
        w, h = dims[j]
        if x < 0 or y < 0 or x + w > W or y + h > H:
            return f"item {j} out of bounds"
        rects.append((j, (x, y, w, h)))

    rects.sort(key=lambda r: r[0])
    for a in range(len(rects)):
        for b in range(a + 1, len(rects)):
            if _overlap(rects[a][1], rects[b][1]):
                return f"overlap({rects[a][0]},{rects[b][0]})"
    return None


def verify_bins(inst: Instance, bins: Sequence[PackedBin]) -> VerificationResult:
    """Check that bins partition the items and every bin is a valid packing."""
    dims = {item.id: item.dims for item in inst.items}
    seen = set()
    for packed in bins:
        for j in packed.items:
            if j not in dims:
                return VerificationResult(ok=False, violation=f"unknown item {j}")
            if j in seen:
                return VerificationResult(ok=False, violation=f"item {j} assigned twice")
            seen.add(j)
        violation = verify_placement(dims, inst.W, inst.H, packed.items, packed.placement)
        if violation:
            return VerificationResult(ok=False, violation=violation)

    for item in inst.items:
        if item.id not in seen:
            return VerificationResult(ok=False, violation=f"item {item.id} unassigned")
    return VerificationResult(ok=True)


def verify_solution(inst: Instance, sol: Solution) -> VerificationResult:
    """
    Verify a solution against its instance.

    Returns:
        VerificationResult: ok, or the first violated constraint with item ids
    """
    result = verify_bins(inst, sol.bins)
    if not result.ok:
        return result
    if sol.status != SolveStatus.INFEASIBLE and sol.lower_bound > sol.upper_bound:
        return VerificationResult(ok=False, violation=f"lower bound {sol.lower_bound} exceeds upper bound {sol.upper_bound}")
    if sol.status == SolveStatus.OPTIMAL and sol.lower_bound != sol.upper_bound:
        return VerificationResult(ok=False, violation="optimal status with open gap")
    if sol.bins and len(sol.bins) != sol.upper_bound:
        return VerificationResult(ok=False, violation=f"{len(sol.bins)} bins reported as value {sol.upper_bound}")
    return VerificationResult(ok=True)


def solution_to_json(sol: Solution) -> Dict:
    """JSON export: {status, L, U, bins:[{items, coords:[{id,x,y}]}], stats}."""
    return {
        "status": sol.status.value,
        "L": sol.lower_bound,
        "U": sol.upper_bound,
        "external_bound": sol.external_bound,
        "bins": [
            {
                "items": sorted(packed.items),
                "coords": [
                    {"id": j, "x": packed.placement.coords[j][0], "y": packed.placement.coords[j][1]}
                    for j in sorted(packed.items)
                ],
            }
            for packed in sol.bins
        ],
        "stats": sol.stats.dict(),
    }
