#!/usr/bin/env python3
"""Export the Les Miserables co-occurrence network (Knuth, 77 nodes / 254 edges)
to the qlat graph document format.

Usage: python3 scripts/export_lmcn.py > fixtures/<name>/graph.json
"""
import json
import sys

import networkx as nx


def main() -> int:
    g = nx.les_miserables_graph()
    doc = {
        "directed": False,
        "nodes": [{"id": n, "attrs": {"name": n}} for n in g.nodes()],
        "edges": [
            {"id": f"e{i}", "source": u, "target": v, "attrs": {"value": d["weight"]}}
            for i, (u, v, d) in enumerate(g.edges(data=True))
        ],
    }
    json.dump(doc, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
