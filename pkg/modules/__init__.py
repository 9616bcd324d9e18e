"""
Robust Pricing Lab Modules
"""

from .core import DyadicPrice, Valuation, Feedback, RoundRecord, EpisodeConfig, EpisodeResult
from .tree import NodeRef, TreeParams
from .environment import PricingEnvironment
from .adversaries import AdversarySpec, build_adversary
from .algorithms import run_episode
from .instrumentation import Ledger, final_report
