"""Association rule mining over install transactions.

Rules are limited to one antecedent and one consequent. A rule survives when
its co-occurrence count clears the support floor and its confidence clears
the confidence threshold; both directions of a pair are scored.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, List, Tuple

from .kb import AssociationRule, KnowledgeGraph, PackageKey, ValidationError, normalize_name
from .acquisition import split_item


@dataclass(frozen=True)
class MiningConfig:
    min_confidence: float = 0.8
    max_rule_length: int = 2
    min_support_count: int = 3

    def __post_init__(self):
        if not 0.0 < self.min_confidence <= 1.0:
            raise ValidationError(f"min_confidence out of range: {self.min_confidence}")
        if self.max_rule_length != 2:
            raise ValidationError("only rules of length 2 are supported")
        if self.min_support_count < 1:
            raise ValidationError(f"min_support_count must be >= 1: {self.min_support_count}")


@dataclass(frozen=True)
class MinedRule:
    antecedent: str
    consequent: str
    support: float
    confidence: float
    lift: float
    count: int


def mine_rules(transactions: Iterable[Iterable[str]], config: MiningConfig) -> List[MinedRule]:
    """Mine antecedent -> consequent rules from item sets.

    support = count(a, c) / N, confidence = count(a, c) / count(a) and
    lift = confidence / (count(c) / N), with N the number of transactions.
    Results are sorted by (antecedent, consequent).
    """
    baskets = [frozenset(t) for t in transactions]
    n = len(baskets)
    if n == 0:
        raise ValidationError("cannot mine an empty transaction list")

    item_counts: Dict[str, int] = {}
    for basket in baskets:
        for item in basket:
            item_counts[item] = item_counts.get(item, 0) + 1
    frequent = {item for item, c in item_counts.items() if c >= config.min_support_count}

    pair_counts: Dict[Tuple[str, str], int] = {}
    for basket in baskets:
        present = sorted(item for item in basket if item in frequent)
        for pair in combinations(present, 2):
            pair_counts[pair] = pair_counts.get(pair, 0) + 1

    rules = []
    for (x, y), together in pair_counts.items():
        if together < config.min_support_count:
            continue
        for antecedent, consequent in ((x, y), (y, x)):
            confidence = together / item_counts[antecedent]
            if confidence < config.min_confidence:
                continue
            support = together / n
            lift = confidence / (item_counts[consequent] / n)
            rules.append(
                MinedRule(
                    antecedent=antecedent,
                    consequent=consequent,
                    support=support,
                    confidence=confidence,
                    lift=lift,
                    count=together,
                )
            )
    rules.sort(key=lambda r: (r.antecedent, r.consequent))
    return rules


def rule_endpoints(rule: MinedRule) -> Tuple[PackageKey, Tuple[str, str], PackageKey, Tuple[str, str]]:
    """Package keys for a mined rule's items plus their (system, raw name)."""
    ant_system, ant_name = split_item(rule.antecedent)
    cons_system, cons_name = split_item(rule.consequent)
    ant = PackageKey(ant_system, normalize_name(ant_system, ant_name))
    cons = PackageKey(cons_system, normalize_name(cons_system, cons_name))
    return ant, (ant_system, ant_name), cons, (cons_system, cons_name)


def install_rules(rules: Iterable[MinedRule], graph: KnowledgeGraph) -> int:
    """Upsert mined rules into the graph; packages missing from the graph
    are created on the way. Returns the number of rules installed."""
    installed = 0
    for rule in rules:
        ant, (_, ant_raw), cons, (_, cons_raw) = rule_endpoints(rule)
        graph.upsert_package(ant, ant_raw)
        graph.upsert_package(cons, cons_raw)
        graph.upsert_rule(
            AssociationRule(
                antecedent=ant,
                consequent=cons,
                support=rule.support,
                confidence=rule.confidence,
                lift=rule.lift,
                count=rule.count,
            )
        )
        installed += 1
    return installed
