import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

from vert import identifiers  # noqa: E402
from vert.hdl.parser import parse_module  # noqa: E402

PAPER = HERE / "fixtures" / "paper"
HELDOUT = HERE / "fixtures" / "heldout"


def load(path):
    m, diags = parse_module(Path(path).read_text())
    assert m is not None, diags
    return m


@pytest.fixture(scope="session")
def pool():
    return identifiers.synthesize(400, 7)


@pytest.fixture(scope="session")
def textbox3():
    return load(PAPER / "textbox3.sv")


@pytest.fixture(scope="session")
def textbox4():
    return load(PAPER / "textbox4.sv")


CANONICAL = """module canon (
  input logic clk,
  input logic a,
  output logic q
);
  always_ff @(posedge clk) begin
    if (a) q <= 1'b1; else q <= 1'b0;
  end
endmodule
"""


@pytest.fixture
def canonical():
    m, _ = parse_module(CANONICAL)
    return m
