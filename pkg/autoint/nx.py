"""
.. py:module:: nx
    :platform: Unix

Functions to convert :class:`~autoint.core.graph.ComputeGraph` objects to
`NetworkX <https://networkx.github.io/>`_ graph structures and to plain-text
DOT listings, and to summarize their structure.
"""
from networkx import DiGraph

from autoint.core.graph import ComputeGraph

__all__ = ['graph_to_nx', 'to_dot', 'graph_summary']


def graph_to_nx(graph):
    """Create a NetworkX graph from a computational graph.

    Each node carries the attributes ``kind``, ``label``, ``width``,
    ``creation_index``, ``key`` and ``output`` (whether it is an output of
    the graph). Edges point from a dependency to the node using it.

    :param graph: :class:`~autoint.core.graph.ComputeGraph`
    :rtype: :class:`~networkx.digraph.DiGraph`
    """
    if not isinstance(graph, ComputeGraph):
        raise TypeError("Graph must be a ComputeGraph, got {}.".format(type(graph).__name__))
    outputs = set(graph.outputs)
    G = DiGraph(name=graph.name)
    for n in graph.nodes:
        G.add_node(n.id, kind=str(n.kind), label=n.label, width=n.width,
                   creation_index=n.creation_index, key=n.key, output=n.id in outputs)
    for n in graph.nodes:
        G.add_edges_from((i, n.id) for i in n.inputs)
    return G


def to_dot(graph):
    """DOT listing of *graph*: one line per node (id, kind, width) and one
    per dependency edge. Output nodes are drawn with a double border.

    :returns: DOT source
    :rtype: str
    """
    G = graph_to_nx(graph)
    lines = ['digraph "{}" {{'.format(_escape(G.graph['name'])), '  rankdir=BT;']
    for nid, data in G.nodes(data=True):
        shape = 'doubleoctagon' if data['output'] else 'box'
        lines.append('  n{} [label="{}: {} [{}]", shape={}];'.format(
            nid, nid, _escape(data['label']), data['width'], shape))
    for u, v in G.edges():
        lines.append('  n{} -> n{};'.format(u, v))
    lines.append('}')
    return '\n'.join(lines) + '\n'


def graph_summary(graph):
    """Structure counts of *graph*.

    :returns:
        dict with ``nodes``, ``unique_nodes`` (distinct structural keys),
        ``edges`` and a per-kind node count under ``kinds``
    """
    G = graph_to_nx(graph)
    kinds = {}
    for _, k in G.nodes(data='kind'):
        kinds[k] = kinds.get(k, 0) + 1
    return {
        'nodes': G.number_of_nodes(),
        'unique_nodes': len({k for _, k in G.nodes(data='key')}),
        'edges': G.number_of_edges(),
        'kinds': dict(sorted(kinds.items())),
    }


def _escape(s):
    return str(s).replace('\\', '\\\\').replace('"', '\\"')
