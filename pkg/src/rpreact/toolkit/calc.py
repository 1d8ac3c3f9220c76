"""Formula calculator behind the Calculate tool.

Accepts arithmetic over numbers with + - * / and parentheses, plus the
aggregates mean(...) and sqrt(...). Evaluation walks a whitelisted AST;
nothing else in the expression language is reachable.
"""

from __future__ import annotations

import ast
import math

from rpreact.toolkit.errors import ToolError

_BIN_OPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}

_FUNCTIONS = {"mean", "sqrt"}


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        left = _eval_node(node.left)
        right = _eval_node(node.right)
        try:
            return _BIN_OPS[type(node.op)](left, right)
        except ZeroDivisionError:
            raise ToolError("division by zero") from None
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _eval_node(node.operand)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        name = node.func.id
        if name not in _FUNCTIONS:
            raise ToolError(f"unknown function: {name}")
        if node.keywords:
            raise ToolError(f"{name} takes positional arguments only")
        args = [_eval_node(a) for a in node.args]
        if not args:
            raise ToolError(f"{name} needs at least one argument")
        if name == "mean":
            return sum(args) / len(args)
        if len(args) != 1:
            raise ToolError("sqrt takes one argument")
        if args[0] < 0:
            raise ToolError("sqrt of a negative number")
        return math.sqrt(args[0])
    raise ToolError("unsupported expression")


def format_result(value: float) -> str:
    """Up to six fractional digits, trailing zeros trimmed."""
    text = f"{value:.6f}"
    return text.rstrip("0").rstrip(".") if "." in text else text


def calculate(formula: str) -> str:
    try:
        tree = ast.parse(formula.strip(), mode="eval")
    except SyntaxError:
        raise ToolError(f"could not parse formula: {formula!r}") from None
    return format_result(_eval_node(tree.body))
