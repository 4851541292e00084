"""The specification language: syntax tree, parser, printer and checks."""

from probe.lang.parser import parse_density, parse_expr, parse_proc, parse_spec
from probe.lang.printer import format_proc, pretty_print
from probe.lang.validate import Diagnostic, validate

__all__ = ["parse_spec", "parse_proc", "parse_expr", "parse_density",
           "pretty_print", "format_proc", "validate", "Diagnostic"]
