"""Core parameters, sections and errors for heteronet"""

from .model import ModelParams, DerivedConstants, ValidationReport
from .sections import SectionId, SectionPoint, State4
