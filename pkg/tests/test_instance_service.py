"""
Tests for instance parsing, serialization and solution verification.
"""

from fractions import Fraction

import pytest

from app.models.instance import Instance, PackedBin, Placement, Solution, SolveStatus
from app.models.request import InstanceRequest, SolveRequest
from app.services.exceptions import InstanceParseError
from app.services.instance_service import (
    NATIVE,
    TWOBP,
    continuous_bound,
    parse_instance,
    read_instance,
    serialize_instance,
    solution_to_json,
    verify_bins,
    verify_solution,
)

TWOBP_TEXT = """    1   PROBLEM CLASS
    3   N. OF ITEMS
    1    1   RELATIVE AND ABSOLUTE N. OF INSTANCE
    8   10   HBIN,WBIN
    4    6
    2    3
    8    1
"""


class TestParseInstance:
    """Native and classical formats."""

    def test_native_three_squares(self):
        inst = parse_instance("3\n10 10\n6 6\n6 6\n6 6\n")
        assert inst.n == 3
        assert (inst.W, inst.H) == (10, 10)
        assert all(item.dims == (6, 6) for item in inst.items)
        assert inst.m == 3

    def test_item_equal_to_bin(self):
        inst = parse_instance("1\n7 5\n7 5\n")
        assert inst.n == 1
        assert inst.items[0].dims == (inst.W, inst.H)

    def test_item_exceeding_bin_names_line(self):
        with pytest.raises(InstanceParseError) as excinfo:
            parse_instance("2\n10 10\n11 3\n2 2\n")
        assert excinfo.value.line == 3
        assert "item 0 exceeds bin width" in str(excinfo.value)

    def test_crlf_and_comments(self):
        inst = parse_instance("2\r\n10 10  # bin\r\n5 10\r\n5 10\r\n")
        assert inst.dims == [(5, 10), (5, 10)]

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "2\n10 10\n5 5\n",
            "1\n10 10\n0 3\n",
            "1\n10\n3 3\n",
            "0\n10 10\n",
        ],
    )
    def test_malformed_native(self, text):
        with pytest.raises(InstanceParseError):
            parse_instance(text)

    def test_twobp_height_first(self):
        inst = parse_instance(TWOBP_TEXT, TWOBP)
        assert (inst.W, inst.H) == (10, 8)
        assert inst.dims == [(6, 4), (3, 2), (1, 8)]
        assert inst.problem_class == 1

    def test_twobp_width_first_override(self):
        inst = parse_instance(TWOBP_TEXT, TWOBP, dims_order="wh")
        assert (inst.W, inst.H) == (8, 10)
        assert inst.dims[0] == (4, 6)

    def test_unknown_format(self):
        with pytest.raises(InstanceParseError):
            parse_instance("1\n1 1\n1 1\n", "xml")

    def test_serialize_twobp_reads_back(self):
        inst = Instance.from_dims(10, 8, [(6, 4), (3, 2)], problem_class=3)
        parsed = parse_instance(serialize_instance(inst, TWOBP), TWOBP)
        assert parsed.dims == inst.dims
        assert (parsed.W, parsed.H) == (10, 8)
        assert parsed.problem_class == 3

    def test_read_instance_names_file_and_class(self, tmp_path):
        path = tmp_path / "cl_07_020_01.txt"
        path.write_text(serialize_instance(Instance.from_dims(10, 10, [(2, 2)]), NATIVE))
        inst = read_instance(path)
        assert inst.name == "cl_07_020_01"
        assert inst.problem_class == 7

    def test_read_missing_file(self, tmp_path):
        with pytest.raises(InstanceParseError):
            read_instance(tmp_path / "missing.txt")


class TestContinuousBound:

    def test_three_squares(self, three_squares):
        assert continuous_bound(three_squares) == Fraction(108, 100)

    def test_single_full_item(self):
        assert continuous_bound(Instance.from_dims(7, 5, [(7, 5)])) == 1

    def test_exact_tiling(self):
        assert continuous_bound(Instance.from_dims(10, 10, [(10, 5), (10, 5)])) == 1


class TestVerifySolution:
    """The feasibility oracle."""

    def test_side_by_side_ok(self, two_halves):
        bins = [PackedBin(items=[0, 1], placement=Placement(coords={0: (0, 0), 1: (5, 0)}))]
        sol = Solution(status=SolveStatus.OPTIMAL, lower_bound=1, upper_bound=1, bins=bins)
        assert verify_solution(two_halves, sol).ok

    def test_overlap_reported(self):
        inst = Instance.from_dims(10, 10, [(6, 6), (6, 6)])
        bins = [PackedBin(items=[0, 1], placement=Placement(coords={0: (0, 0), 1: (0, 0)}))]
        result = verify_bins(inst, bins)
        assert not result.ok
        assert result.violation == "overlap(0,1)"

    def test_unassigned_reported(self, three_squares):
        bins = [
            PackedBin(items=[0], placement=Placement(coords={0: (0, 0)})),
            PackedBin(items=[1], placement=Placement(coords={1: (0, 0)})),
        ]
        result = verify_bins(three_squares, bins)
        assert result.violation == "item 2 unassigned"

    def test_out_of_bounds(self, two_halves):
        bins = [PackedBin(items=[0, 1], placement=Placement(coords={0: (0, 0), 1: (6, 0)}))]
        assert verify_bins(two_halves, bins).violation == "item 1 out of bounds"

    def test_duplicate_assignment(self, two_halves):
        bins = [
            PackedBin(items=[0, 1], placement=Placement(coords={0: (0, 0), 1: (5, 0)})),
            PackedBin(items=[1], placement=Placement(coords={1: (0, 0)})),
        ]
        assert verify_bins(two_halves, bins).violation == "item 1 assigned twice"

    def test_optimal_with_gap_rejected(self, two_halves):
        bins = [PackedBin(items=[0, 1], placement=Placement(coords={0: (0, 0), 1: (5, 0)}))]
        sol = Solution(status=SolveStatus.OPTIMAL, lower_bound=0, upper_bound=1, bins=bins)
        assert not verify_solution(two_halves, sol).ok

    def test_json_export(self, two_halves):
        bins = [PackedBin(items=[1, 0], placement=Placement(coords={0: (0, 0), 1: (5, 0)}))]
        sol = Solution(status=SolveStatus.OPTIMAL, lower_bound=1, upper_bound=1, bins=bins)
        exported = solution_to_json(sol)
        assert exported["status"] == "Optimal"
        assert exported["bins"][0]["items"] == [0, 1]
        assert exported["bins"][0]["coords"][1] == {"id": 1, "x": 5, "y": 0}
        assert "opp_calls" in exported["stats"]


class TestSchemaExamples:

    def test_instance_example(self):
        example = Instance.schema()["example"]
        assert example["W"] == 10
        assert len(example["items"]) == 2

    def test_request_example_inherited(self):
        assert InstanceRequest.schema()["example"]["items"][0] == {"width": 6, "height": 6}
        assert SolveRequest.schema()["example"] == InstanceRequest.schema()["example"]
