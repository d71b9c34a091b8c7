from .expr import (Constant, Expr, NoiseRef, ParseError, Product, Scaled, Sum, Unary, VarRef,
                   add, mul, parse_expr, scale)
from .model import Dataset, ModelError, NoiseSpec, SamplingError, ScmModel, sample
from .presets import PRESET_NAMES, PRESETS, TABLE1_PRESETS, preset, preset_info
from .specfile import format_model_spec, load_model_spec, parse_model_spec
from .taxonomy import TermTaxonomy, decompose

__all__ = [
    "Constant", "Expr", "NoiseRef", "ParseError", "Product", "Scaled", "Sum", "Unary", "VarRef",
    "add", "mul", "scale", "parse_expr", "Dataset", "ModelError", "NoiseSpec", "SamplingError", "ScmModel", "sample",
    "PRESET_NAMES", "PRESETS", "TABLE1_PRESETS", "preset", "preset_info",
    "format_model_spec", "load_model_spec", "parse_model_spec", "TermTaxonomy", "decompose",
]
