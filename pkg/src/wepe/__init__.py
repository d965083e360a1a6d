"""Weierstrass elliptic positional encoding for 2-D patch grids."""

from .lattice import LatticeParams, lemniscatic_preset
from .wp import wp, wp_prime, wp_pair, wp_addition, relative_wp, DegenerateArguments
from .encoder import EncoderConfig, encode, encode_grid
from .surrogate import SurrogateConfig, ft_grid, hybrid_blend
from .lut import Lut, build_lut, query_bilinear, read_lut, write_lut

__all__ = [
    "LatticeParams", "lemniscatic_preset",
    "wp", "wp_prime", "wp_pair", "wp_addition", "relative_wp", "DegenerateArguments",
    "EncoderConfig", "encode", "encode_grid",
    "SurrogateConfig", "ft_grid", "hybrid_blend",
    "Lut", "build_lut", "query_bilinear", "read_lut", "write_lut",
]
