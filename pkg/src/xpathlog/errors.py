"""Exception hierarchy shared by all xpathlog modules."""

from __future__ import annotations


class XPathLogError(Exception):
    """Base class for every error raised by the engine."""


class NodeUnknown(XPathLogError):
    def __init__(self, node: object) -> None:
        super().__init__(f"unknown node {node!r}")
        self.node = node


class CyclicDescent(XPathLogError):
    def __init__(self, node: object) -> None:
        super().__init__(f"descendant traversal revisits {node} (cycle in child edges)")
        self.node = node


class MalformedXml(XPathLogError):
    pass


class DanglingIdref(UserWarning):
    """Issued when a reference attribute names an id that no element carries."""

    def __init__(self, value: str, element: str = "", attribute: str = "") -> None:
        super().__init__(f"dangling reference {value!r} in {element}/@{attribute}")
        self.value = value
        self.element = element
        self.attribute = attribute


class DocumentUnavailable(XPathLogError):
    pass


class CyclicView(XPathLogError):
    pass


class XPathLogSyntaxError(XPathLogError):
    def __init__(self, message: str, line: int = 0, col: int = 0, expected: str = "") -> None:
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected


class DefinitenessError(XPathLogError):
    def __init__(self, construct: str) -> None:
        super().__init__(f"not definite: {construct}")
        self.construct = construct


class HeadNotDefinite(DefinitenessError):
    def __init__(self, rule: str, reason: str) -> None:
        XPathLogError.__init__(self, f"head of rule `{rule}` is not definite: {reason}")
        self.construct = reason
        self.rule = rule


class UnsafeHeadVariable(XPathLogError):
    def __init__(self, var: str) -> None:
        super().__init__(f"head variable {var} does not occur in the body")
        self.var = var


class SafetyError(XPathLogError):
    def __init__(self, var: str, location: str) -> None:
        super().__init__(f"unsafe occurrence of {var} in {location}")
        self.var = var
        self.location = location


class UnboundVariable(XPathLogError):
    def __init__(self, var: str) -> None:
        super().__init__(f"variable {var} is unbound where a value is required")
        self.var = var


class NotAtomizable(XPathLogError):
    pass


class InsertionError(XPathLogError):
    pass


class UnboundHeadVariable(InsertionError):
    def __init__(self, var: str) -> None:
        super().__init__(f"head variable {var} has no binding")
        self.var = var


class HostUnknown(InsertionError):
    pass


class IndexOutOfRange(InsertionError):
    pass


class UnsupportedFusion(InsertionError):
    pass


class DivergenceError(XPathLogError):
    def __init__(self, iterations: int, state: object = None) -> None:
        super().__init__(f"no fixpoint after {iterations} iterations")
        self.iterations = iterations
        self.state = state


class ResourceLimitError(XPathLogError):
    pass
