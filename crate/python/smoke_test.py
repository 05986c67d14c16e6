"""Smoke test for the kosr_py extension.

Build and install first, e.g. `pip install ./crates/python`, then run
`python python/smoke_test.py`.
"""

import tempfile

import kosr_py


def main():
    idx = kosr_py.KosrIndex.example()
    print(idx)
    seq = ["MA", "RE", "CI"]

    expected = [
        (20, ["s", "a", "b", "d", "t"]),
        (21, ["s", "a", "e", "d", "t"]),
        (22, ["s", "c", "b", "d", "t"]),
    ]
    for engine in kosr_py.ENGINES:
        assert idx.query("s", "t", seq, 3, engine=engine) == expected, engine
    assert idx.oracle("s", "t", seq, 3) == expected

    routes, stats = idx.query_with_stats("s", "t", seq, 2, engine="sk")
    assert [c for c, _ in routes] == [20, 21]
    assert stats["examined_routes"] == 9, stats
    _, stats = idx.query_with_stats("s", "t", seq, 2, engine="pk")
    assert stats["examined_routes"] == 13, stats

    assert idx.find_nn("s", "MA", 1) == ("a", 8)
    assert idx.find_nn("s", "MA", 2) == ("c", 10)
    assert idx.find_nn("s", "MA", 3) is None
    assert idx.dist("s", "t") is not None
    path = idx.path("s", "t")
    assert path[0] == "s" and path[-1] == "t"

    assert idx.remove_vertex_category("a", "MA")
    assert idx.find_nn("s", "MA", 1) == ("c", 10)
    assert not idx.remove_vertex_category("a", "MA")
    assert idx.add_vertex_category("a", "MA")

    with tempfile.TemporaryDirectory() as d:
        idx.save(d)
        again = kosr_py.KosrIndex.load(d)
        assert again.query("s", "t", seq, 3) == expected

    small = kosr_py.KosrIndex.from_text("x y 3\ny z 4\nx z 9\n", "y P\nz Q\n")
    assert small.query("x", "z", ["P"], 1) == [(7, ["x", "y", "z"])]

    for bad in (
        lambda: idx.query("s", "t", seq, 0),
        lambda: idx.query("s", "nowhere", seq, 1),
        lambda: idx.query("s", "t", ["NOPE"], 1),
        lambda: idx.query("s", "t", seq, 1, engine="warp"),
    ):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
