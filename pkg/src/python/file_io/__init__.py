"""File Input/Output module for heteronet"""

from .input_parser import InputParser, RunConfig
from .output_writer import OutputWriter
