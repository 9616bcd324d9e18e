"""
Interval Tree Module
Addresses the binary tree of dyadic intervals by (depth, index): navigation,
leaf lookup, graph distance and on-path tests, without materializing nodes
"""

import math
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT, MAX_PRICE_LEVEL
from modules.core import DyadicPrice, Valuation, ConfigError, TreeContractError

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class NodeRef:
    """Node (depth, index) standing for [index / 2^depth, (index + 1) / 2^depth)"""

    depth: int
    index: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.index < (1 << self.depth):
            raise TreeContractError(f"No node ({self.depth}, {self.index}) in the tree")

    def __str__(self):
        left, right = endpoints(self)
        return f"({self.depth},{self.index})=[{left}, {right})"


@dataclass(frozen=True)
class TreeParams:
    """Tree depth D; leaves have length 2^-D"""

    depth: int

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_PRICE_LEVEL:
            raise ConfigError(f"Tree depth must lie in [1, {MAX_PRICE_LEVEL}], got {self.depth}")

    @classmethod
    def from_horizon(cls, horizon: int) -> 'TreeParams':
        """D = ceil(log2 T), so that every leaf is at most 1/T wide"""
        if horizon < 2:
            raise ConfigError(f"Horizon must be >= 2, got {horizon}")
        return cls(depth=(horizon - 1).bit_length())

    @property
    def leaf_count(self) -> int:
        return 1 << self.depth

    def is_leaf(self, node: NodeRef) -> bool:
        return node.depth == self.depth

    def contains(self, node: NodeRef) -> bool:
        return node.depth <= self.depth


ROOT = NodeRef(0, 0)


def root() -> NodeRef:
    return ROOT


def left_child(n: NodeRef, params: Optional[TreeParams] = None) -> NodeRef:
    if params is not None and n.depth >= params.depth:
        raise TreeContractError(f"Leaf {n} has no children")
    return NodeRef(n.depth + 1, 2 * n.index)


def right_child(n: NodeRef, params: Optional[TreeParams] = None) -> NodeRef:
    if params is not None and n.depth >= params.depth:
        raise TreeContractError(f"Leaf {n} has no children")
    return NodeRef(n.depth + 1, 2 * n.index + 1)


def parent(n: NodeRef) -> NodeRef:
    if n.depth == 0:
        raise TreeContractError("The root has no parent")
    return NodeRef(n.depth - 1, n.index >> 1)


def endpoints(n: NodeRef) -> Tuple[DyadicPrice, DyadicPrice]:
    """Left and right endpoints L, R of the node's interval [L, R)"""
    return DyadicPrice(n.index, n.depth), DyadicPrice(n.index + 1, n.depth)


def midpoint(n: NodeRef) -> DyadicPrice:
    """M = (L + R) / 2, the left endpoint of the right child"""
    return DyadicPrice(2 * n.index + 1, n.depth + 1)


def leaf_of(v: Valuation, params: TreeParams) -> NodeRef:
    """The unique leaf [L, R) with L <= v* < R"""
    # scaling by a power of two is exact, so the floor is exact too
    index = int(math.floor(math.ldexp(v.value, params.depth)))
    return NodeRef(params.depth, index)


def leaf_at(index: int, params: TreeParams) -> NodeRef:
    return NodeRef(params.depth, index)


def lowest_common_depth(a: NodeRef, b: NodeRef) -> int:
    shallow = min(a.depth, b.depth)
    x = a.index >> (a.depth - shallow)
    y = b.index >> (b.depth - shallow)
    return shallow - (x ^ y).bit_length()


def tree_distance(a: NodeRef, b: NodeRef) -> int:
    """Length of the shortest path between two nodes of the tree"""
    lca = lowest_common_depth(a, b)
    return (a.depth - lca) + (b.depth - lca)


def is_ancestor(a: NodeRef, b: NodeRef) -> bool:
    """True iff a is b or one of b's ancestors"""
    return a.depth <= b.depth and (b.index >> (b.depth - a.depth)) == a.index


def is_on_path(n: NodeRef, leaf_star: NodeRef) -> bool:
    """On-path: n lies on the root-to-leaf_star path"""
    return is_ancestor(n, leaf_star)
