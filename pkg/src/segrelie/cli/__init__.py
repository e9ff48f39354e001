from .parser import ParseError, SourceSystem, parse_expression, parse_system_file
from .printer import print_linear, print_segre, print_source, print_system

__all__ = ["ParseError", "SourceSystem", "parse_expression", "parse_system_file",
           "print_linear", "print_segre", "print_source", "print_system"]
