"""Compiler for zoned neutral-atom arrays."""
