"""A small dataflow executor.

Tasks are pure functions with a declared number of input and output ports.
Wires connect an output port of one task (or a graph input) to an input port
of another. Execution visits tasks in a topological order and runs each one
exactly once; independent tasks may be dispatched to a thread pool.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from ..errors import InvalidGraphError, WiringError

INPUT = "__input__"


@dataclass(frozen=True)
class Task:
    name: str
    fn: object
    n_inputs: int
    n_outputs: int = 1


class TaskGraph:
    """Directed acyclic graph of :class:`Task` nodes.

    Example:
        >>> g = TaskGraph()
        >>> g.add_task("inc", lambda x: x + 1, 1)
        >>> g.connect(INPUT, "inc")
        >>> g.set_outputs([("inc", 0)])
        >>> run_task_graph(g, [1])
        (2,)
    """

    def __init__(self):
        self.tasks = {}
        self.wires = {}  # (dst, dst_port) -> (src, src_port)
        self.outputs = []
        self.n_inputs = 0

    def add_task(self, name, fn, n_inputs, n_outputs=1):
        if name in self.tasks or name == INPUT:
            raise WiringError(f"duplicate task name {name!r}")
        if n_inputs < 0 or n_outputs < 1:
            raise WiringError(f"task {name!r} has invalid arity")
        self.tasks[name] = Task(name, fn, int(n_inputs), int(n_outputs))
        return name

    def connect(self, src, dst, src_port=0, dst_port=0):
        """Wire ``src``'s output ``src_port`` (or graph input ``src_port``) to ``dst``'s input ``dst_port``."""
        if dst not in self.tasks:
            raise InvalidGraphError(f"unknown task {dst!r}")
        if src != INPUT and src not in self.tasks:
            raise InvalidGraphError(f"unknown task {src!r}")
        if not 0 <= dst_port < self.tasks[dst].n_inputs:
            raise WiringError(f"{dst!r} has no input port {dst_port}")
        if src != INPUT and not 0 <= src_port < self.tasks[src].n_outputs:
            raise WiringError(f"{src!r} has no output port {src_port}")
        if src == INPUT and src_port < 0:
            raise WiringError("graph input ports are non-negative")
        if (dst, dst_port) in self.wires:
            raise WiringError(f"input port {dst_port} of {dst!r} is wired twice")
        self.wires[(dst, dst_port)] = (src, src_port)
        if src == INPUT:
            self.n_inputs = max(self.n_inputs, src_port + 1)

    def set_outputs(self, ports):
        for name, port in ports:
            if name not in self.tasks:
                raise InvalidGraphError(f"unknown task {name!r}")
            if not 0 <= port < self.tasks[name].n_outputs:
                raise WiringError(f"{name!r} has no output port {port}")
        self.outputs = list(ports)

    def validate(self):
        """Check wiring and acyclicity; return a :class:`TopologicalSorter` ready to run."""
        for name, t in self.tasks.items():
            for port in range(t.n_inputs):
                if (name, port) not in self.wires:
                    raise WiringError(f"input port {port} of {name!r} is not wired")
        ts = TopologicalSorter()
        for name in self.tasks:
            ts.add(name)
        for (dst, _), (src, _) in self.wires.items():
            if src != INPUT:
                ts.add(dst, src)
        try:
            ts.prepare()
        except CycleError as exc:
            raise InvalidGraphError(f"task graph has a cycle: {exc.args[1]}") from exc
        return ts


def run_task_graph(g, inputs, max_workers=1):
    """Execute ``g`` on ``inputs`` and return the values of its output ports.

    Args:
        g: the graph.
        inputs: sequence of values for graph input ports ``0..n-1``.
        max_workers: threads used to run independent tasks; 1 runs serially.

    Returns:
        Tuple of output values in the order given to ``set_outputs``.
    """
    ts = g.validate()
    inputs = list(inputs)
    if len(inputs) != g.n_inputs:
        raise WiringError(f"graph expects {g.n_inputs} inputs, got {len(inputs)}")
    results = {}

    def gather(name):
        t = g.tasks[name]
        args = []
        for port in range(t.n_inputs):
            src, sport = g.wires[(name, port)]
            args.append(inputs[sport] if src == INPUT else results[src][sport])
        return args

    def execute(name):
        t = g.tasks[name]
        out = t.fn(*gather(name))
        if t.n_outputs == 1:
            return (out,)
        out = tuple(out)
        if len(out) != t.n_outputs:
            raise WiringError(f"task {name!r} returned {len(out)} values, declared {t.n_outputs}")
        return out

    if max_workers <= 1:
        while ts.is_active():
            for name in sorted(ts.get_ready()):
                results[name] = execute(name)
                ts.done(name)
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            while ts.is_active():
                ready = sorted(ts.get_ready())
                for name, out in zip(ready, pool.map(execute, ready)):
                    results[name] = out
                ts.done(*ready)
    return tuple(results[name][port] for name, port in g.outputs)
