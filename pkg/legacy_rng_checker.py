import astroid
from pylint.checkers import BaseChecker
from pylint.interfaces import IAstroidChecker
from pylint.lint import PyLinter

# Everything else under numpy.random touches the global legacy state
ALLOWED = {"default_rng", "Generator", "SeedSequence", "PCG64", "BitGenerator"}


class LegacyRngChecker(BaseChecker):
    __implements__ = IAstroidChecker

    name = "legacy-rng-checker"
    msgs = {
        "E9997": (
            "Use of the global numpy.random state (%s)",
            "legacy-numpy-random",
            "Randomness must come from an explicit numpy.random.Generator so "
            "trials stay reproducible",
        ),
    }

    def visit_attribute(self, node: astroid.Attribute):
        if node.attrname in ALLOWED:
            return

        parent = node.expr
        if not isinstance(parent, astroid.Attribute) or parent.attrname != "random":
            return
        if isinstance(parent.expr, astroid.Name) and parent.expr.name in (
            "np",
            "numpy",
        ):
            self.add_message("legacy-numpy-random", node=node, args=node.attrname)


def register(linter: PyLinter):
    linter.register_checker(LegacyRngChecker(linter))
