import pytest

from mitbench.errors import InvalidGraphError, WiringError
from mitbench.mitigation import INPUT, TaskGraph, run_task_graph


def diamond():
    g = TaskGraph()
    g.add_task("dup", lambda x: (x, x), 1, 2)
    g.add_task("inc_a", lambda x: x + 1, 1)
    g.add_task("inc_b", lambda x: x + 1, 1)
    g.add_task("pair", lambda a, b: (a, b), 2)
    g.connect(INPUT, "dup")
    g.connect("dup", "inc_a", 0)
    g.connect("dup", "inc_b", 1)
    g.connect("inc_a", "pair", 0, 0)
    g.connect("inc_b", "pair", 0, 1)
    g.set_outputs([("pair", 0)])
    return g


def test_pass_through():
    g = TaskGraph()
    g.add_task("id", lambda x: x, 1)
    g.connect(INPUT, "id")
    g.set_outputs([("id", 0)])
    assert run_task_graph(g, ["payload"]) == ("payload",)


@pytest.mark.parametrize("workers", [1, 4])
def test_diamond(workers):
    assert run_task_graph(diamond(), [1], workers) == ((2, 2),)


def test_each_task_runs_once():
    calls = []
    g = TaskGraph()
    g.add_task("src", lambda x: calls.append("src") or x * 2, 1)
    for name in "abc":
        g.add_task(name, lambda x, name=name: calls.append(name) or x + 1, 1)
        g.connect("src", name)
    g.set_outputs([("a", 0), ("b", 0), ("c", 0)])
    g.connect(INPUT, "src")
    assert run_task_graph(g, [5], 3) == (11, 11, 11)
    assert sorted(calls) == ["a", "b", "c", "src"]


def test_cycle_rejected():
    g = TaskGraph()
    g.add_task("a", lambda x: x, 1)
    g.add_task("b", lambda x: x, 1)
    g.connect("a", "b")
    g.connect("b", "a")
    with pytest.raises(InvalidGraphError):
        run_task_graph(g, [])


def test_unwired_port():
    g = TaskGraph()
    g.add_task("a", lambda x, y: x, 2)
    g.connect(INPUT, "a")
    with pytest.raises(WiringError):
        run_task_graph(g, [1])


def test_input_arity():
    with pytest.raises(WiringError):
        run_task_graph(diamond(), [1, 2])


def test_output_arity_checked():
    g = TaskGraph()
    g.add_task("a", lambda x: (x, x, x), 1, 2)
    g.connect(INPUT, "a")
    g.set_outputs([("a", 0)])
    with pytest.raises(WiringError):
        run_task_graph(g, [1])


@pytest.mark.parametrize(
    "build",
    [
        lambda g: g.connect(INPUT, "a", 0, 3),
        lambda g: g.connect("a", "b", 5, 0),
        lambda g: (g.connect(INPUT, "b"), g.connect("a", "b")),
        lambda g: g.add_task("a", len, 1),
    ],
)
def test_wiring_errors(build):
    g = TaskGraph()
    g.add_task("a", lambda x: x, 1)
    g.add_task("b", lambda x: x, 1)
    with pytest.raises(WiringError):
        build(g)


def test_unknown_task():
    g = TaskGraph()
    with pytest.raises(InvalidGraphError):
        g.connect(INPUT, "nope")
