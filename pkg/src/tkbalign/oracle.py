"""Bounded countermodel search for TCQ entailment.

Looks for a lasso trace over a domain of at most ``n`` elements whose
first positions model the ABoxes, whose every position models the TBox,
and which falsifies the query.  Finding one proves non-entailment; finding
none proves nothing.  The search works on types: :func:`type_table`
gives, per individual mapping, the query types realizable at each ABox
slot, and lassos of types are checked with the plain LTL evaluator.
"""

from __future__ import annotations

import itertools
from typing import Optional

from .automata.ltl import LassoWord, eval_ltl_lasso, map_atoms, Prop
from .bounded import type_table
from .cq import QLeaf
from .dl import individuals_of, signature_of
from .temporal import LassoTrace, TCQ, TemporalKB, prop_abstraction

__all__ = ["find_tkb_countermodel"]


def find_tkb_countermodel(g: TemporalKB, q: TCQ, n: int = 2, max_loop: int = 2,
                          extra_prefix: int = 1) -> Optional[LassoTrace]:
    """A lasso model of ``g`` violating ``q`` with domain ``<= n``, or ``None``.

    The prefix covers the ABoxes plus up to ``extra_prefix`` free positions;
    the loop has at most ``max_loop`` positions.
    """
    pa = prop_abstraction(q)
    ltl = map_atoms(pa.ltl, lambda p: Prop(pa.props.index(p)))
    queries = [QLeaf(cq) for cq in pa.queries]
    sig = signature_of(list(g.tbox)) | signature_of([a for abox in g.aboxes for a in abox])
    for cq in pa.queries:
        sig = sig | cq.signature()
    inds = sorted(individuals_of(a for abox in g.aboxes for a in abox)
                  | {i for cq in pa.queries for i in cq.individuals()})
    k = len(g.aboxes)
    for size in range(1, n + 1):
        table = type_table(sig, inds, size, g.tbox, g.aboxes, queries)
        for imap in sorted(table):
            slots = table[imap]
            free = sorted(slots.get(None, {}), key=sorted)
            if not free:
                continue
            per_abox = [sorted(slots.get(i, {}), key=sorted) for i in range(k)]
            if any(not opts for opts in per_abox):
                continue
            for extra in range(extra_prefix + 1):
                for loop_len in range(1, max_loop + 1):
                    for word in itertools.product(*per_abox, *([free] * (extra + loop_len))):
                        prefix, loop = word[:k + extra], word[k + extra:]
                        if eval_ltl_lasso(LassoWord(tuple(prefix), tuple(loop)), ltl):
                            continue
                        interps = [slots[i][ty] for i, ty in enumerate(word[:k])]
                        interps += [slots[None][ty] for ty in word[k:]]
                        return LassoTrace.of(interps[:k + extra], interps[k + extra:])
    return None
