"""Dense simulation of block encodings of linear maps applied to density matrices."""

__version__ = "0.1.0"

from belt.blockenc import BlockEncoding, exact_dilation, lcu, sparse_block_encoding, verify
from belt.core import PurificationOracle, belt_assemble, postselect, purify
from belt.maps import LinearMapRep, choi, choi_t1, invert

__all__ = [
    "BlockEncoding",
    "LinearMapRep",
    "PurificationOracle",
    "belt_assemble",
    "choi",
    "choi_t1",
    "exact_dilation",
    "invert",
    "lcu",
    "postselect",
    "purify",
    "sparse_block_encoding",
    "verify",
    "__version__",
]
