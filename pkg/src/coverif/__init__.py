"""Bounded co-verification of Verilog hardware with firmware drivers."""

__version__ = "0.1.0"
