"""Read-only retrieval HTTP API for the explorer UI.

Serves an immutable embedding snapshot: /nodes lists the node metadata,
/retrieve returns threshold-filtered ranked results ordered by ascending
norm (the display ordering), and /tree returns the hierarchy JSON.
"""

from __future__ import annotations

import json
import math

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from hierembed import evaluation
from hierembed.hierarchy import HierarchyTree
from hierembed.trainer import EmbeddingTable

DIRECTIONS = {"p2c": "parent_to_child", "c2p": "child_to_parent"}


def create_app(
    table: EmbeddingTable,
    tree: HierarchyTree,
    nodes: dict[str, tuple[str, str]],
) -> FastAPI:
    """Build the FastAPI app over an immutable snapshot."""
    app = FastAPI(title="hierembed retrieval service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )
    norms = table.norms()

    def _meta(node_id: str) -> tuple[str, str]:
        return nodes.get(node_id, ("", "unknown"))

    @app.get("/nodes")
    def list_nodes() -> list[dict]:
        return [
            {
                "id": node_id,
                "label": _meta(node_id)[0],
                "group": _meta(node_id)[1],
                "norm": norms[node_id],
            }
            for node_id in table.node_ids
        ]

    @app.get("/tree")
    def get_tree() -> dict:
        return json.loads(tree.to_json())

    @app.get("/retrieve")
    def retrieve(
        query: str,
        direction: str = Query("p2c"),
        threshold: float = Query(0.0),
        k: int = Query(10, ge=1),
    ) -> dict:
        if direction not in DIRECTIONS:
            raise HTTPException(status_code=400, detail="direction must be p2c or c2p")
        if not math.isfinite(threshold):
            raise HTTPException(status_code=400, detail="threshold must be finite")
        if query not in table:
            raise HTTPException(status_code=404, detail=f"unknown node id {query!r}")
        candidates = {n: table[n] for n in table.node_ids if n != query}
        result = evaluation.rank_candidates(
            query, table[query], candidates, DIRECTIONS[direction],
            table.space_kind, k=len(candidates), c=table.c,
        )
        kept = [(cid, score) for cid, score in result.ranked if score >= threshold][:k]
        kept.sort(key=lambda t: (norms[t[0]], t[0]))  # display order: ascending norm
        return {
            "query": query,
            "direction": direction,
            "threshold": threshold,
            "results": [
                {
                    "id": cid,
                    "label": _meta(cid)[0],
                    "group": _meta(cid)[1],
                    "score": score,
                    "norm": norms[cid],
                }
                for cid, score in kept
            ],
        }

    return app
