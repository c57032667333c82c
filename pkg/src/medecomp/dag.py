"""Causal DAGs, single-world intervention graphs, and d-separation.

A :class:`CausalDag` carries the study topology: one binary exposure, one
outcome, one or more binary mediators, plus observed covariates and
(optionally) latent confounders. DAGs are parsed from a line-oriented text
format (``node``/``edge`` lines, see :func:`parse_dag`) and are immutable
once validated, so all queries are safe to run concurrently.

Interventions are analysed on a single-world intervention graph
(:class:`Swig`): each intervened node splits into a random half that keeps
its observed parents and a fixed half that takes over its outgoing edges;
nodes downstream of a fixed half are relabelled as potential outcomes.
An intervened node that is itself downstream of another intervention keeps
its observed random half and additionally gains a potential-outcome copy,
so e.g. intervening on the exposure and on mediator ``M2`` leaves three
versions of ``M2`` in the graph: the observed ``M2``, the potential outcome
``M2(a)``, and the fixed value ``m``.

:func:`d_separated` decides conditional independence with the linear-time
reachability ("Bayes-ball") formulation, returning a lexicographically
smallest d-connecting witness path when the sets are not separated. Fixed
intervention nodes are constants: they may not appear in query sets and
they block every path through them.

:func:`check_ignorability` mechanically verifies, for mediator ``k``, that

* the potential mediator is independent of the exposure given the
  covariates (in the graph intervened on the exposure), and
* the potential outcome is independent of the exposure and the observed
  mediator given the covariates (in the graph intervened on the exposure
  and on mediator ``k``).
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

ROLE_COVARIATE = "covariate"
ROLE_EXPOSURE = "exposure"
ROLE_MEDIATOR = "mediator"
ROLE_OUTCOME = "outcome"
ROLE_LATENT = "latent"

ROLES = (ROLE_COVARIATE, ROLE_EXPOSURE, ROLE_MEDIATOR, ROLE_OUTCOME, ROLE_LATENT)

# Exogenous roles: only covariate/latent edges may point into them.
_EXOGENOUS_ROLES = (ROLE_COVARIATE, ROLE_LATENT)

KIND_RANDOM = "random"
KIND_FIXED = "fixed-intervention"
KIND_POTENTIAL = "potential-outcome"

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class DagError(ValueError):
    """Invalid graph structure or query."""


class DagSyntaxError(DagError):
    """Malformed DAG-spec text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class DagNode:
    name: str
    role: str


@dataclass(frozen=True)
class _DsepView:
    """Minimal digraph view consumed by the d-separation routines."""

    names: tuple[str, ...]
    parents: Mapping[str, tuple[str, ...]]
    children: Mapping[str, tuple[str, ...]]
    blocked: frozenset[str]


def _build_maps(names, edges):
    parents = {n: [] for n in names}
    children = {n: [] for n in names}
    for parent, child in edges:
        parents[child].append(parent)
        children[parent].append(child)
    return (
        {n: tuple(v) for n, v in parents.items()},
        {n: tuple(v) for n, v in children.items()},
    )


def _topological_order(names, parents, children):
    """Topological order, breaking ties by declaration index.

    Raises :class:`DagError` naming a cycle if the graph is cyclic.
    """
    index = {n: i for i, n in enumerate(names)}
    indegree = {n: len(parents[n]) for n in names}
    ready = sorted((n for n in names if indegree[n] == 0), key=index.get)
    order = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        changed = False
        for child in children[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
                changed = True
        if changed:
            ready.sort(key=index.get)
    if len(order) < len(names):
        cycle = _find_cycle(names, children, set(order), index)
        raise DagError("cycle detected: " + " -> ".join(cycle))
    return tuple(order)


def _find_cycle(names, children, acyclic, index):
    remaining = [n for n in names if n not in acyclic]
    start = remaining[0]
    seen = {}
    walk = [start]
    seen[start] = 0
    node = start
    while True:
        node = min(
            (c for c in children[node] if c not in acyclic),
            key=index.get,
        )
        if node in seen:
            cycle = walk[seen[node]:]
            pivot = min(range(len(cycle)), key=lambda i: index[cycle[i]])
            cycle = cycle[pivot:] + cycle[:pivot]
            return cycle + [cycle[0]]
        seen[node] = len(walk)
        walk.append(node)


@dataclass(frozen=True)
class Digraph:
    """A bare directed acyclic graph, for d-separation on arbitrary node sets.

    :class:`CausalDag` enforces study roles on top of this; tests and
    generic conditional-independence queries can use ``Digraph`` directly.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        seen = set()
        for name in self.nodes:
            if name in seen:
                raise DagError(f"duplicate node name {name!r}")
            seen.add(name)
        edge_seen = set()
        for parent, child in self.edges:
            for endpoint in (parent, child):
                if endpoint not in seen:
                    raise DagError(f"edge references undeclared node {endpoint!r}")
            if (parent, child) in edge_seen:
                raise DagError(f"duplicate edge {parent!r} -> {child!r}")
            edge_seen.add((parent, child))
        parents, children = _build_maps(self.nodes, self.edges)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)
        object.__setattr__(
            self, "_topo", _topological_order(self.nodes, parents, children)
        )

    def dsep_view(self) -> _DsepView:
        return _DsepView(self.nodes, self._parents, self._children, frozenset())


@dataclass(frozen=True)
class CausalDag:
    """Validated causal DAG with node roles.

    Invariants enforced at construction: the graph is acyclic; there is
    exactly one exposure and one outcome and at least one mediator; no edge
    leaves the outcome; edges into covariates (and latents) come only from
    covariates or latents. Nodes keep their declaration order, which also
    breaks ties in the topological order, so iteration is deterministic.
    """

    nodes: tuple[DagNode, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = []
        seen = set()
        for node in self.nodes:
            if node.role not in ROLES:
                raise DagError(f"unknown role {node.role!r} for node {node.name!r}")
            if not _NAME_RE.match(node.name):
                raise DagError(f"invalid node name {node.name!r}")
            if node.name in seen:
                raise DagError(f"duplicate node name {node.name!r}")
            seen.add(node.name)
            names.append(node.name)
        role_of = {n.name: n.role for n in self.nodes}

        n_exposure = sum(1 for n in self.nodes if n.role == ROLE_EXPOSURE)
        n_outcome = sum(1 for n in self.nodes if n.role == ROLE_OUTCOME)
        n_mediator = sum(1 for n in self.nodes if n.role == ROLE_MEDIATOR)
        if n_exposure != 1:
            raise DagError(f"exactly one exposure node required, found {n_exposure}")
        if n_outcome != 1:
            raise DagError(f"exactly one outcome node required, found {n_outcome}")
        if n_mediator < 1:
            raise DagError("at least one mediator node required")

        edge_seen = set()
        for parent, child in self.edges:
            for endpoint in (parent, child):
                if endpoint not in seen:
                    raise DagError(f"edge references undeclared node {endpoint!r}")
            if (parent, child) in edge_seen:
                raise DagError(f"duplicate edge {parent!r} -> {child!r}")
            edge_seen.add((parent, child))
            if role_of[parent] == ROLE_OUTCOME:
                raise DagError(f"edge leaves outcome: {parent!r} -> {child!r}")
            if (
                role_of[child] in _EXOGENOUS_ROLES
                and role_of[parent] not in _EXOGENOUS_ROLES
            ):
                raise DagError(
                    f"edge {parent!r} -> {child!r} points into {role_of[child]} "
                    f"{child!r} from a non-covariate"
                )

        parents, children = _build_maps(names, self.edges)
        topo = _topological_order(tuple(names), parents, children)
        object.__setattr__(self, "_names", tuple(names))
        object.__setattr__(self, "_role_of", role_of)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)
        object.__setattr__(self, "_topo", topo)

    # -- queries ---------------------------------------------------------

    @property
    def node_names(self) -> tuple[str, ...]:
        return self._names

    @property
    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    @cached_property
    def exposure(self) -> str:
        return next(n.name for n in self.nodes if n.role == ROLE_EXPOSURE)

    @cached_property
    def outcome(self) -> str:
        return next(n.name for n in self.nodes if n.role == ROLE_OUTCOME)

    @cached_property
    def mediators(self) -> tuple[str, ...]:
        """Mediator names in topological order; index ``k`` is 1-based."""
        return tuple(n for n in self._topo if self._role_of[n] == ROLE_MEDIATOR)

    @cached_property
    def covariates(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.role == ROLE_COVARIATE)

    @cached_property
    def latents(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.role == ROLE_LATENT)

    @property
    def n_mediators(self) -> int:
        return len(self.mediators)

    def role(self, name: str) -> str:
        return self._role_of[name]

    def parents(self, name: str) -> tuple[str, ...]:
        return self._parents[name]

    def children(self, name: str) -> tuple[str, ...]:
        return self._children[name]

    def dsep_view(self) -> _DsepView:
        return _DsepView(self._names, self._parents, self._children, frozenset())


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def parse_dag(text: str) -> CausalDag:
    """Parse the line-oriented DAG-spec format.

    Comment lines start with ``#``. ``node <name> <role>`` lines come first,
    then ``edge <parent> -> <child>`` lines. Declaration order is preserved.
    Syntax problems raise :class:`DagSyntaxError` with line and column;
    structural problems (cycles, role counts, undeclared nodes) raise
    :class:`DagError`.
    """
    nodes: list[DagNode] = []
    edges: list[tuple[str, str]] = []
    edges_started = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]
        word, col = tokens[0]
        if word == "node":
            if edges_started:
                raise DagSyntaxError(
                    "node declared after first edge", lineno, col
                )
            if len(tokens) != 3:
                raise DagSyntaxError(
                    "expected 'node <name> <role>'", lineno, col
                )
            name, name_col = tokens[1]
            role, role_col = tokens[2]
            if not _NAME_RE.match(name):
                raise DagSyntaxError(f"invalid node name {name!r}", lineno, name_col)
            if role not in ROLES:
                raise DagSyntaxError(
                    f"unknown role {role!r} (expected one of {', '.join(ROLES)})",
                    lineno,
                    role_col,
                )
            nodes.append(DagNode(name, role))
        elif word == "edge":
            edges_started = True
            if len(tokens) != 4 or tokens[2][0] != "->":
                raise DagSyntaxError(
                    "expected 'edge <parent> -> <child>'", lineno, col
                )
            parent, parent_col = tokens[1]
            child, child_col = tokens[3]
            if not _NAME_RE.match(parent):
                raise DagSyntaxError(f"invalid node name {parent!r}", lineno, parent_col)
            if not _NAME_RE.match(child):
                raise DagSyntaxError(f"invalid node name {child!r}", lineno, child_col)
            edges.append((parent, child))
        else:
            raise DagSyntaxError(
                f"unknown directive {word!r} (expected 'node' or 'edge')", lineno, col
            )
    return CausalDag(tuple(nodes), tuple(edges))


def serialize_dag(dag: CausalDag) -> str:
    """Canonical text form: nodes in declaration order, edges sorted."""
    lines = [f"node {n.name} {n.role}" for n in dag.nodes]
    lines.extend(f"edge {p} -> {c}" for p, c in sorted(dag.edges))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Canonical topologies
# ---------------------------------------------------------------------------


def independent_mediators_dag(n_covariates: int = 2, n_mediators: int = 2) -> CausalDag:
    """Exposure acting on the outcome through causally independent mediators.

    Covariates point into the exposure, every mediator, and the outcome;
    the exposure points into every mediator and the outcome; mediators point
    only into the outcome.
    """
    return _standard_dag(n_covariates, n_mediators, dependent=False)


def dependent_mediators_dag(n_covariates: int = 2, n_mediators: int = 3) -> CausalDag:
    """Like :func:`independent_mediators_dag` plus every upstream mediator
    feeding each downstream one (``Mi -> Mj`` for all ``i < j``)."""
    return _standard_dag(n_covariates, n_mediators, dependent=True)


def _standard_dag(n_covariates, n_mediators, dependent):
    if n_covariates < 0 or n_mediators < 1:
        raise DagError("need n_covariates >= 0 and n_mediators >= 1")
    covs = [f"L{i + 1}" for i in range(n_covariates)]
    meds = [f"M{i + 1}" for i in range(n_mediators)]
    nodes = [DagNode(c, ROLE_COVARIATE) for c in covs]
    nodes.append(DagNode("A", ROLE_EXPOSURE))
    nodes.extend(DagNode(m, ROLE_MEDIATOR) for m in meds)
    nodes.append(DagNode("Y", ROLE_OUTCOME))
    edges = []
    for c in covs:
        edges.append((c, "A"))
        edges.extend((c, m) for m in meds)
        edges.append((c, "Y"))
    edges.extend(("A", m) for m in meds)
    edges.append(("A", "Y"))
    if dependent:
        for i in range(n_mediators):
            for j in range(i + 1, n_mediators):
                edges.append((meds[i], meds[j]))
    edges.extend((m, "Y") for m in meds)
    return CausalDag(tuple(nodes), tuple(edges))


# ---------------------------------------------------------------------------
# Single-world intervention graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwigNode:
    name: str
    kind: str  # KIND_RANDOM | KIND_FIXED | KIND_POTENTIAL
    source: str  # name of the originating DAG node


@dataclass(frozen=True)
class Swig:
    """Intervention graph produced by :func:`build_swig`.

    ``interventions`` maps intervened source-node names to their fixed value
    labels. Name lookups by source node: :meth:`observed` (random half),
    :meth:`potential` (potential-outcome version), :meth:`fixed`.
    """

    nodes: tuple[SwigNode, ...]
    edges: tuple[tuple[str, str], ...]
    interventions: tuple[tuple[str, str], ...]

    def __post_init__(self):
        parents, children = _build_maps([n.name for n in self.nodes], self.edges)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)
        observed = {}
        potential = {}
        for node in self.nodes:
            if node.kind == KIND_RANDOM:
                observed[node.source] = node.name
            elif node.kind == KIND_POTENTIAL:
                potential[node.source] = node.name
        object.__setattr__(self, "_observed", observed)
        object.__setattr__(self, "_potential", potential)

    @property
    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def kind(self, name: str) -> str:
        return next(n.kind for n in self.nodes if n.name == name)

    def observed(self, source: str) -> str:
        """Name of the random (observed-world) node for ``source``."""
        try:
            return self._observed[source]
        except KeyError:
            raise DagError(f"{source!r} has no observed node in this graph") from None

    def potential(self, source: str) -> str:
        """Name of the potential-outcome version of ``source``.

        For nodes untouched by the interventions this is the node itself.
        """
        if source in self._potential:
            return self._potential[source]
        if source in self._observed:
            return self._observed[source]
        raise DagError(f"unknown source node {source!r}")

    def fixed(self, source: str) -> str:
        for name, label in self.interventions:
            if name == source:
                return label
        raise DagError(f"{source!r} is not intervened on")

    def dsep_view(self) -> _DsepView:
        blocked = frozenset(n.name for n in self.nodes if n.kind == KIND_FIXED)
        return _DsepView(self.node_names, self._parents, self._children, blocked)


def build_swig(dag: CausalDag, interventions: Mapping[str, str]) -> Swig:
    """Split each intervened node and relabel its downstream world.

    ``interventions`` maps node names (exposure or mediators only) to fixed
    value labels. With an empty map the result is an isomorphic copy of the
    input. Value labels must be valid names, distinct from each other and
    from every node name.
    """
    items = [(n, interventions[n]) for n in dag.topological_order if n in interventions]
    if len(items) != len(interventions):
        missing = set(interventions) - set(dag.node_names)
        raise DagError(f"intervention on unknown node(s): {sorted(missing)}")
    taken = set(dag.node_names)
    for name, label in items:
        if dag.role(name) not in (ROLE_EXPOSURE, ROLE_MEDIATOR):
            raise DagError(
                f"cannot intervene on {dag.role(name)} node {name!r}; "
                "only exposure and mediator nodes are manipulable"
            )
        if not _NAME_RE.match(label):
            raise DagError(f"invalid intervention label {label!r}")
        if label in taken:
            raise DagError(f"intervention label {label!r} collides with another name")
        taken.add(label)

    intervened = [name for name, _ in items]
    label_of = dict(items)

    # Fixed labels reaching each node through directed paths that do not
    # pass through another intervened node; these are the potential-outcome
    # name arguments, ordered like the interventions themselves.
    reached: dict[str, set[str]] = {n: set() for n in dag.node_names}
    for source in intervened:
        queue = deque(dag.children(source))
        seen = set()
        while queue:
            node = queue.popleft()
            if node in seen:
                continue
            seen.add(node)
            reached[node].add(source)
            if node not in label_of:  # interventions cut the downstream flow
                queue.extend(dag.children(node))

    def labels(node: str) -> tuple[str, ...]:
        return tuple(label_of[s] for s in intervened if s in reached[node])

    # Node naming per source node.
    single_name: dict[str, str] = {}  # non-intervened nodes
    potential_name: dict[str, str] = {}
    for node in dag.node_names:
        args = labels(node)
        if node in label_of:
            if args:
                potential_name[node] = f"{node}({','.join(args)})"
        else:
            single_name[node] = f"{node}({','.join(args)})" if args else node

    swig_nodes: list[SwigNode] = []
    for node in dag.node_names:
        if node in label_of:
            swig_nodes.append(SwigNode(node, KIND_RANDOM, node))
            if node in potential_name:
                swig_nodes.append(SwigNode(potential_name[node], KIND_POTENTIAL, node))
            swig_nodes.append(SwigNode(label_of[node], KIND_FIXED, node))
        else:
            kind = KIND_POTENTIAL if single_name[node] != node else KIND_RANDOM
            swig_nodes.append(SwigNode(single_name[node], kind, node))

    def outgoing_rep(node: str) -> str:
        """Node carrying ``node``'s causal influence downstream."""
        return label_of.get(node) or single_name[node]

    def observed_rep(node: str) -> str | None:
        """Observed-world version of ``node``, if one survives."""
        if node in label_of:
            return node  # random half keeps the plain name
        name = single_name[node]
        return name if name == node else None

    swig_edges: list[tuple[str, str]] = []
    for parent, child in dag.edges:
        if child in label_of:
            # Observed half: keeps edges only from parents that are still
            # observed random nodes.
            obs = observed_rep(parent)
            if obs is not None:
                swig_edges.append((obs, child))
            if child in potential_name:
                swig_edges.append((outgoing_rep(parent), potential_name[child]))
        else:
            swig_edges.append((outgoing_rep(parent), single_name[child]))

    return Swig(tuple(swig_nodes), tuple(swig_edges), tuple(items))


def contract_swig(swig: Swig) -> Digraph:
    """Merge every split node back into its source; inverse of the split.

    Used to verify the round-trip property: contracting a SWIG yields a
    graph isomorphic to the DAG it was built from.
    """
    sources = []
    seen = set()
    for node in swig.nodes:
        if node.source not in seen:
            seen.add(node.source)
            sources.append(node.source)
    source_of = {n.name: n.source for n in swig.nodes}
    edges = []
    edge_seen = set()
    for parent, child in swig.edges:
        edge = (source_of[parent], source_of[child])
        if edge not in edge_seen:
            edge_seen.add(edge)
            edges.append(edge)
    return Digraph(tuple(sources), tuple(edges))


# ---------------------------------------------------------------------------
# d-separation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DSeparation:
    """Verdict of a d-separation query; truthy iff the sets are separated."""

    separated: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self) -> bool:
        return self.separated


def d_separated(graph, x: Iterable[str], y: Iterable[str], z: Iterable[str] = ()) -> DSeparation:
    """Decide whether node sets ``x`` and ``y`` are d-separated given ``z``.

    ``graph`` may be a :class:`CausalDag`, :class:`Swig`, or :class:`Digraph`.
    Chains and forks are blocked by conditioning; colliders are open only if
    the collider or one of its descendants is conditioned on. Fixed
    intervention nodes are constants: they cannot appear in the query sets
    and no path may pass through them. When the sets are d-connected the
    result carries the lexicographically smallest d-connecting path.
    """
    view = graph.dsep_view()
    x = frozenset(x)
    y = frozenset(y)
    z = frozenset(z)
    universe = set(view.names)
    for label, nodes in (("X", x), ("Y", y), ("Z", z)):
        for node in nodes:
            if node not in universe:
                raise DagError(f"unknown node {node!r} in {label}")
            if node in view.blocked:
                raise DagError(
                    f"fixed intervention node {node!r} may not appear in {label}"
                )
    if x & y or x & z or y & z:
        raise DagError("X, Y, Z must be pairwise disjoint")
    if not x or not y:
        raise DagError("X and Y must be non-empty")

    allowed = universe - view.blocked
    parents = {n: tuple(p for p in view.parents[n] if p in allowed) for n in allowed}
    children = {n: tuple(c for c in view.children[n] if c in allowed) for n in allowed}

    ancestors_z = _ancestors_with(z, parents)

    if _reachable(x, y, z, ancestors_z, parents, children):
        witness = _lex_smallest_witness(x, y, z, ancestors_z, parents, children)
        return DSeparation(False, witness)
    return DSeparation(True, None)


def _ancestors_with(z, parents):
    out = set(z)
    queue = deque(z)
    while queue:
        node = queue.popleft()
        for parent in parents[node]:
            if parent not in out:
                out.add(parent)
                queue.append(parent)
    return out


def _reachable(x, y, z, ancestors_z, parents, children):
    """Bayes-ball reachability: is any ``y`` touched by an active trail?"""
    UP, DOWN = 0, 1  # arrived from a child / arrived from a parent
    queue = deque((s, UP) for s in sorted(x))
    visited = set(queue)
    while queue:
        node, direction = queue.popleft()
        if node in y:
            return True
        moves = []
        if direction == UP and node not in z:
            moves.extend((p, UP) for p in parents[node])
            moves.extend((c, DOWN) for c in children[node])
        elif direction == DOWN:
            if node not in z:
                moves.extend((c, DOWN) for c in children[node])
            if node in ancestors_z:  # collider with a conditioned descendant
                moves.extend((p, UP) for p in parents[node])
        for state in moves:
            if state not in visited:
                visited.add(state)
                queue.append(state)
    return False


def _lex_smallest_witness(x, y, z, ancestors_z, parents, children):
    """Depth-first search in name order; first complete active path wins."""

    def neighbours(node):
        out = [(c, True) for c in children[node]]  # move lands via an arrow into w
        out.extend((p, False) for p in parents[node])
        out.sort()
        return out

    def extend(path, on_path, arrived_head):
        node = path[-1]
        for other, head_at_other in neighbours(node):
            if other in on_path or other in x:
                continue
            if len(path) >= 2:
                # legality of passing through `node`
                depart_up = not head_at_other  # we leave via an edge into `node`
                if arrived_head and depart_up:
                    if node not in ancestors_z:  # closed collider
                        continue
                elif node in z:  # blocked chain or fork
                    continue
            if other in y:
                return path + [other]
            on_path.add(other)
            found = extend(path + [other], on_path, head_at_other)
            on_path.discard(other)
            if found is not None:
                return found
        return None

    for start in sorted(x):
        found = extend([start], {start}, False)
        if found is not None:
            return tuple(found)
    return None  # unreachable when called after a positive reachability check


# ---------------------------------------------------------------------------
# Ignorability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IgnorabilityReport:
    """Mechanical verification of the two identification conditions for
    mediator ``k``: the potential-mediator condition and the
    potential-outcome condition, each decided by d-separation on the
    corresponding intervention graph. ``witness`` is a d-connecting path for
    the first failing condition (None when both hold)."""

    k: int
    mediator: str
    condition_m: bool
    condition_y: bool
    witness: tuple[str, ...] | None = None
    witness_condition: str | None = None  # "M" or "Y"

    @property
    def holds(self) -> bool:
        return self.condition_m and self.condition_y


def _fresh_label(base: str, taken) -> str:
    label = base
    while label in taken:
        label += "_"
    return label


def check_ignorability(dag: CausalDag, k: int) -> IgnorabilityReport:
    """Check both identification conditions for the ``k``-th mediator.

    Conditioning is on the covariate nodes only; latent nodes stay in the
    graph but are excluded from the conditioning set, which is how an
    unobserved confounder makes a condition fail.
    """
    if not 1 <= k <= dag.n_mediators:
        raise DagError(f"mediator index {k} out of range 1..{dag.n_mediators}")
    mediator = dag.mediators[k - 1]
    exposure = dag.exposure
    taken = set(dag.node_names)
    a_label = _fresh_label("a", taken)
    taken.add(a_label)
    m_label = _fresh_label("m", taken)
    covariates = set(dag.covariates)

    swig_m = build_swig(dag, {exposure: a_label})
    res_m = d_separated(
        swig_m, {swig_m.potential(mediator)}, {exposure}, covariates
    )

    swig_y = build_swig(dag, {exposure: a_label, mediator: m_label})
    res_y = d_separated(
        swig_y,
        {swig_y.potential(dag.outcome)},
        {exposure, swig_y.observed(mediator)},
        covariates,
    )

    witness = None
    witness_condition = None
    if not res_m.separated:
        witness, witness_condition = res_m.witness, "M"
    elif not res_y.separated:
        witness, witness_condition = res_y.witness, "Y"
    return IgnorabilityReport(
        k=k,
        mediator=mediator,
        condition_m=res_m.separated,
        condition_y=res_y.separated,
        witness=witness,
        witness_condition=witness_condition,
    )
