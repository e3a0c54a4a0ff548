import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def data_dir() -> Path:
    return Path(os.environ.get("CRITNET_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def benchmark_file(name: str) -> Path:
    """Locate a real benchmark edge list, or skip the calling test.

    The sandbox this package was developed in has no route to the public
    benchmark hosts, so the files cannot be vendored; drop them into data/
    (or point CRITNET_DATA_DIR at them) to activate the gated tests.
    """
    path = data_dir() / name
    if not path.exists():
        pytest.skip(
            f"benchmark file {name} not present; place it at {path} "
            "(or set CRITNET_DATA_DIR) to run this check"
        )
    return path


# --- shared graph builders and oracles -------------------------------------


def path_graph(k):
    from critnet.graph import build_graph

    return build_graph(k, [(i, i + 1) for i in range(k - 1)])


def complete_graph(k):
    from critnet.graph import build_graph

    return build_graph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def cycle_graph(k):
    from critnet.graph import build_graph

    return build_graph(k, [(i, (i + 1) % k) for i in range(k)])


def star_graph(k):
    """Star on k nodes, node 0 at the center."""
    from critnet.graph import build_graph

    return build_graph(k, [(0, i) for i in range(1, k)])


def random_graph(rng, max_n=30):
    """One of ER/BA/WS with small random parameters (test corpus mix)."""
    from critnet.graph import gen_ba, gen_er, gen_ws

    kind = rng.integers(3)
    seed = int(rng.integers(2**31))
    if kind == 0:
        n = int(rng.integers(4, max_n + 1))
        return gen_er(n, float(rng.uniform(0.05, 0.4)), seed)
    if kind == 1:
        n = int(rng.integers(5, max_n + 1))
        return gen_ba(n, int(rng.integers(1, 4)), seed)
    n = int(rng.integers(6, max_n + 1))
    return gen_ws(n, 4, float(rng.uniform(0.0, 0.5)), seed)


def bfs_components(g):
    """Independent BFS labeling used as the union-find oracle."""
    from collections import deque

    seen = set()
    groups = []
    for s in range(g.n):
        if not g.alive[s] or s in seen:
            continue
        comp = []
        queue = deque([s])
        seen.add(s)
        while queue:
            v = queue.popleft()
            comp.append(v)
            for u in g.adj[v]:
                if g.alive[u] and u not in seen:
                    seen.add(u)
                    queue.append(u)
        groups.append(frozenset(comp))
    return set(groups)


def brute_pairwise(g, removed=()):
    """Count unordered reachable pairs by BFS from every alive node."""
    from collections import deque

    dead = set(removed)
    alive = [v for v in range(g.n) if g.alive[v] and v not in dead]
    alive_set = set(alive)
    total = 0
    for s in alive:
        reach = {s}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u in g.adj[v]:
                if u in alive_set and u not in reach:
                    reach.add(u)
                    queue.append(u)
        total += len(reach) - 1
    return total // 2
