"""Test support: brute-force oracles and golden scenario fixtures."""

from .oracles import oracle_mine, oracle_topo_check
from .scenarios import ScenarioFixture, list_scenarios, load_scenario

__all__ = [
    "oracle_mine",
    "oracle_topo_check",
    "ScenarioFixture",
    "list_scenarios",
    "load_scenario",
]
