'''
.. :py:module:: test_nx
    :platform: Unix

Tests for autoint.nx-module.
'''
import unittest

import networkx

from autoint.core.gradnet import AutoIntPair
from autoint.nets import MLPSpec, init_params
from autoint.nx import graph_to_nx, to_dot, graph_summary


def make_pair(depth=2):
    spec = MLPSpec(hidden=[4] * depth, nl='swish')
    return AutoIntPair.from_spec(spec, init_params(spec, 0))


class NXTestCase(unittest.TestCase):

    def test_nx_asserts(self):
        with self.assertRaises(TypeError):
            graph_to_nx(networkx.DiGraph())
        with self.assertRaises(TypeError):
            to_dot([(1, 2), (3, 4)])

    def test_graph_to_nx(self):
        pair = make_pair()
        for graph in (pair.integral, pair.grad):
            G = graph_to_nx(graph)
            self.assertEqual(len(G), len(graph))
            self.assertTrue(networkx.is_directed_acyclic_graph(G))
            self.assertTrue(networkx.is_isomorphic(G, graph.nx_graph))
            outputs = [n for n, out in G.nodes(data='output') if out]
            self.assertEqual(outputs, graph.outputs)
            for n in graph.nodes:
                self.assertEqual(G.nodes[n.id]['label'], n.label)

    def test_dot(self):
        pair = make_pair()
        dot = to_dot(pair.integral)
        self.assertTrue(dot.startswith('digraph "phi" {'))
        self.assertEqual(dot.count('->'), graph_summary(pair.integral)['edges'])
        self.assertEqual(dot.count('doubleoctagon'), 1)
        self.assertIn('Affine(phi.layer0)', dot)

    def test_summary(self):
        for depth in (1, 2, 3):
            pair = make_pair(depth)
            s = graph_summary(pair.grad)
            self.assertEqual(s['nodes'], len(pair.grad))
            self.assertEqual(sum(s['kinds'].values()), s['nodes'])
            if depth >= 2:
                # Repeated primal legs share structural keys.
                self.assertLess(s['unique_nodes'], s['nodes'])
            i = graph_summary(pair.integral)
            self.assertEqual(i['unique_nodes'], i['nodes'])
