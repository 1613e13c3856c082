"""Reverse-mode automatic differentiation over a fixed operator set.

A :class:`Graph` records nodes in creation order, which is always a valid
topological order. Every node evaluates eagerly when created and can be
re-evaluated later with :meth:`Graph.forward` after parameters or named
inputs change; this is what the finite-difference checker relies on.

Operators: matmul, broadcasting add and mul, relu, exp, concat,
embedding gather, log-softmax, sum, mean, L1 norm, transpose, clamp and
row-wise L2 normalisation. All values are float64 numpy arrays.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from tabgen.errors import ContractError, NumericError, ShapeError

Tensor = np.ndarray

ForwardFn = Callable[..., Tensor]
BackwardFn = Callable[["Node", Tensor], Sequence[Optional[Tensor]]]


def as_tensor(value) -> Tensor:
    """Coerce a value into a float64 array."""
    return np.asarray(value, dtype=np.float64)


class Parameter:
    """A learnable tensor with its gradient accumulator."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value):
        self.name = name
        self.value = as_tensor(value).copy()
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.value)

    def __repr__(self) -> str:
        return f"Parameter({self.name}, shape={self.shape})"


class Node:
    """One operator application inside a graph."""

    __slots__ = (
        "graph", "op", "inputs", "value", "grad", "param", "name",
        "_forward", "_backward", "_holder",
    )

    def __init__(
        self,
        graph: "Graph",
        op: str,
        inputs: Tuple["Node", ...],
        forward: ForwardFn,
        backward: Optional[BackwardFn],
    ):
        self.graph = graph
        self.op = op
        self.inputs = inputs
        self.value: Tensor = np.zeros(0)
        self.grad: Optional[Tensor] = None
        self.param: Optional[Parameter] = None
        self.name: Optional[str] = None
        self._forward = forward
        self._backward = backward
        self._holder: Optional[list] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def item(self) -> float:
        """Scalar value as a Python float."""
        return float(self.value.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Node({self.op}, shape={self.shape})"


def _unbroadcast(grad: Tensor, shape: Tuple[int, ...]) -> Tensor:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Graph:
    """An append-only computation graph."""

    def __init__(self):
        self.nodes: List[Node] = []
        self._inputs: Dict[str, Node] = {}
        self._params: Dict[int, Node] = {}

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def _add(
        self,
        op: str,
        inputs: Sequence[Node],
        forward: ForwardFn,
        backward: Optional[BackwardFn],
    ) -> Node:
        for node in inputs:
            if node.graph is not self:
                raise ContractError(f"{op}: operand belongs to a different graph")
        node = Node(self, op, tuple(inputs), forward, backward)
        self._evaluate(node)
        self.nodes.append(node)
        return node

    def _evaluate(self, node: Node) -> None:
        value = as_tensor(node._forward(*[i.value for i in node.inputs]))
        if not np.all(np.isfinite(value)):
            raise NumericError(f"Non-finite result in '{node.op}' node")
        node.value = value

    def constant(self, value, name: Optional[str] = None) -> Node:
        """
        Add a constant leaf. Named constants can be rebound by :meth:`forward`.

        Args:
            value: Array-like value
            name: Optional input name

        Returns:
            Leaf node
        """
        holder = [as_tensor(value)]
        node = self._add("input" if name else "const", (), lambda: holder[0], None)
        node.name = name
        if name is not None:
            node._holder = holder
            self._inputs[name] = node
        return node

    def param(self, parameter: Parameter) -> Node:
        """Leaf bound to a :class:`Parameter`; reused if already present."""
        existing = self._params.get(id(parameter))
        if existing is not None:
            return existing
        node = self._add("param", (), lambda: parameter.value, None)
        node.param = parameter
        node.name = parameter.name
        self._params[id(parameter)] = node
        return node

    def parameters(self) -> List[Parameter]:
        """Parameters referenced by this graph, in first-use order."""
        return [node.param for node in self._params.values()]

    # ------------------------------------------------------------------
    # Operators
    # ------------------------------------------------------------------

    def matmul(self, a: Node, b: Node) -> Node:
        if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")

        def backward(node: Node, g: Tensor):
            x, w = node.inputs
            return g @ w.value.T, x.value.T @ g

        return self._add("matmul", (a, b), lambda x, w: x @ w, backward)

    def add(self, a: Node, b: Node) -> Node:
        _check_broadcast("add", a, b)

        def backward(node: Node, g: Tensor):
            x, y = node.inputs
            return _unbroadcast(g, x.shape), _unbroadcast(g, y.shape)

        return self._add("add", (a, b), lambda x, y: x + y, backward)

    def mul(self, a: Node, b: Node) -> Node:
        _check_broadcast("mul", a, b)

        def backward(node: Node, g: Tensor):
            x, y = node.inputs
            return _unbroadcast(g * y.value, x.shape), _unbroadcast(g * x.value, y.shape)

        return self._add("mul", (a, b), lambda x, y: x * y, backward)

    def scale(self, a: Node, factor: float) -> Node:
        """Multiply by a Python scalar."""
        return self.mul(a, self.constant(float(factor)))

    def shift(self, a: Node, offset: float) -> Node:
        """Add a Python scalar."""
        return self.add(a, self.constant(float(offset)))

    def relu(self, a: Node) -> Node:
        def backward(node: Node, g: Tensor):
            return (g * (node.inputs[0].value > 0),)

        return self._add("relu", (a,), lambda x: np.maximum(x, 0.0), backward)

    def exp(self, a: Node) -> Node:
        def backward(node: Node, g: Tensor):
            return (g * node.value,)

        return self._add("exp", (a,), np.exp, backward)

    def clamp(self, a: Node, low: float, high: float) -> Node:
        def backward(node: Node, g: Tensor):
            x = node.inputs[0].value
            return (g * ((x >= low) & (x <= high)),)

        return self._add("clamp", (a,), lambda x: np.clip(x, low, high), backward)

    def transpose(self, a: Node) -> Node:
        if a.value.ndim != 2:
            raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")
        return self._add("transpose", (a,), lambda x: x.T, lambda node, g: (g.T,))

    def concat(self, parts: Sequence[Node], axis: int = 1) -> Node:
        if not parts:
            raise ContractError("concat: nothing to concatenate")
        rows = {p.shape[0] for p in parts}
        if len(rows) != 1 or any(p.value.ndim != 2 for p in parts):
            raise ShapeError(f"concat: mismatched shapes {[p.shape for p in parts]}")

        def backward(node: Node, g: Tensor):
            bounds = np.cumsum([p.shape[axis] for p in node.inputs])[:-1]
            return tuple(np.split(g, bounds, axis=axis))

        return self._add("concat", parts, lambda *xs: np.concatenate(xs, axis=axis), backward)

    def gather(self, table: Node, indices) -> Node:
        """Embedding lookup: rows of ``table`` selected by integer ``indices``."""
        idx = np.asarray(indices, dtype=np.int64)
        if table.value.ndim != 2:
            raise ShapeError(f"gather: table must be a matrix, got {table.shape}")
        if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
            raise ContractError(
                f"gather: index out of range for table with {table.shape[0]} rows"
            )

        def backward(node: Node, g: Tensor):
            grad = np.zeros_like(node.inputs[0].value)
            np.add.at(grad, idx, g)
            return (grad,)

        return self._add("gather", (table,), lambda t: t[idx], backward)

    def log_softmax(self, a: Node) -> Node:
        """Log-softmax over the last axis."""

        def forward(x: Tensor) -> Tensor:
            shifted = x - x.max(axis=-1, keepdims=True)
            return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))

        def backward(node: Node, g: Tensor):
            probs = np.exp(node.value)
            return (g - probs * g.sum(axis=-1, keepdims=True),)

        return self._add("log_softmax", (a,), forward, backward)

    def sum(self, a: Node, axis: Optional[int] = None, keepdims: bool = False) -> Node:
        def backward(node: Node, g: Tensor):
            x = node.inputs[0].value
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, x.shape).copy(),)

        return self._add("sum", (a,), lambda x: x.sum(axis=axis, keepdims=keepdims), backward)

    def mean(self, a: Node, axis: Optional[int] = None, keepdims: bool = False) -> Node:
        def backward(node: Node, g: Tensor):
            x = node.inputs[0].value
            count = x.size if axis is None else x.shape[axis]
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, x.shape) / count,)

        return self._add("mean", (a,), lambda x: x.mean(axis=axis, keepdims=keepdims), backward)

    def l1(self, a: Node) -> Node:
        """Sum of absolute values (scalar). Subgradient at zero is zero."""

        def backward(node: Node, g: Tensor):
            return (g * np.sign(node.inputs[0].value),)

        return self._add("l1", (a,), lambda x: np.abs(x).sum(), backward)

    def l2_normalize(self, a: Node, eps: float = 1e-8) -> Node:
        """Scale each row to unit Euclidean norm (norms below ``eps`` use ``eps``)."""

        def forward(x: Tensor) -> Tensor:
            norms = np.sqrt((x * x).sum(axis=1, keepdims=True))
            return x / np.maximum(norms, eps)

        def backward(node: Node, g: Tensor):
            x = node.inputs[0].value
            y = node.value
            norms = np.sqrt((x * x).sum(axis=1, keepdims=True))
            guarded = norms < eps
            projected = g - y * (g * y).sum(axis=1, keepdims=True)
            return (np.where(guarded, g / eps, projected / np.maximum(norms, eps)),)

        return self._add("l2_normalize", (a,), forward, backward)

    # ------------------------------------------------------------------
    # Execution
    # ------------------------------------------------------------------

    def forward(self, inputs: Optional[Dict[str, Tensor]] = None) -> Tensor:
        """
        Re-evaluate every node in creation order.

        Args:
            inputs: New values for named constants

        Returns:
            Value of the last node (the root)

        Raises:
            ContractError: If an input name is unknown
            NumericError: If any node produces non-finite values
        """
        for name, value in (inputs or {}).items():
            node = self._inputs.get(name)
            if node is None:
                raise ContractError(f"Unknown graph input: {name}")
            node._holder[0] = as_tensor(value)
        for node in self.nodes:
            self._evaluate(node)
        return self.nodes[-1].value

    def backward(self, root: Node) -> Dict[str, Tensor]:
        """
        Reverse-accumulate d(root)/d(parameter) into every parameter's gradient.

        Parameter gradients are reset first, so calling this twice without a
        new forward pass yields identical gradients.

        Args:
            root: Scalar node to differentiate

        Returns:
            Mapping of parameter name to gradient

        Raises:
            ContractError: If root is not scalar or not in this graph
        """
        if root.graph is not self:
            raise ContractError("backward: root belongs to a different graph")
        if root.value.size != 1:
            raise ContractError(f"backward: root must be scalar, got shape {root.shape}")

        for node in self.nodes:
            node.grad = None
        for parameter in self.parameters():
            parameter.zero_grad()

        root.grad = np.ones_like(root.value)
        stop = self.nodes.index(root)
        for node in reversed(self.nodes[: stop + 1]):
            if node.grad is None:
                continue
            if node.param is not None:
                node.param.grad += node.grad
                continue
            if node._backward is None:
                continue
            for child, child_grad in zip(node.inputs, node._backward(node, node.grad)):
                if child_grad is None:
                    continue
                if child_grad.shape != child.shape:
                    raise ShapeError(
                        f"{node.op}: adjoint shape {child_grad.shape} != value shape {child.shape}"
                    )
                child.grad = child_grad if child.grad is None else child.grad + child_grad

        return {p.name: p.grad for p in self.parameters()}


def _check_broadcast(op: str, a: Node, b: Node) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast")


def forward(graph: Graph, inputs: Optional[Dict[str, Tensor]] = None) -> Tensor:
    """Evaluate ``graph`` and return its root value."""
    return graph.forward(inputs)


def backward(graph: Graph, root: Node) -> Dict[str, Tensor]:
    """Gradients of the scalar ``root`` for every parameter in ``graph``."""
    return graph.backward(root)
