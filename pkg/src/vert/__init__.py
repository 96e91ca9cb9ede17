"""Toolkit for synthesising and grading SystemVerilog assertions over RTL conditional blocks."""

__version__ = "0.1.0"
