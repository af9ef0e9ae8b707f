"""Sessions: a ready-to-use state plus the read/expand/transform/eval
pipeline shared by the REPL, the batch subcommands and the tests."""

from __future__ import annotations

import importlib.resources
import random
import sys

from . import expand, interp, sexpr
from .state import GlobalState

DEFAULT_FUEL = interp.DEFAULT_FUEL


def build_state(closure_transforms=True):
    """A base state: reserved globals, default type table, host
    procedures, and (unless disabled) the closure-conversion transforms
    prepended so lambdas work everywhere."""
    state = GlobalState()
    expand.install_defaults(state)
    if closure_transforms:
        expand.install_closure_transforms(state)
    return state


def prelude_text() -> str:
    return (importlib.resources.files("ezero") / "prelude.e").read_text(encoding="utf-8")


class Session:
    """One user-visible interpreter instance.

    The prelude loads exactly once; the scheduler seed (None for plain
    round-robin) and the per-toplevel-form fuel bound stay fixed for
    the session's lifetime.
    """

    def __init__(self, seed=None, fuel=None, prelude=True, trace=None,
                 input=None, output=None, state=None):
        self.state = build_state() if state is None else state
        self.state.input = sys.stdin if input is None else input
        self.state.output = sys.stdout if output is None else output
        self.seed = seed
        self.rng = random.Random(seed) if seed is not None else None
        self.fuel = DEFAULT_FUEL if fuel is None else fuel
        self.trace = trace
        self.prelude_loaded = False
        self.prelude_symbol_ids = frozenset()
        if prelude:
            self.load_prelude()

    # -- pipeline -------------------------------------------------------

    def expand_and_transform(self, s):
        e = expand.macroexpand(s, self.state)
        return expand.transform_expression(e, self.state)

    def eval_expression(self, e):
        machine = interp.Machine(self.state, trace=self.trace)
        machine.rng = self.rng
        owner = self.state.fuel is None
        if owner:
            self.state.fuel = self.fuel
        try:
            return machine.run(interp.initial_thread(e))
        finally:
            if owner:
                self.state.fuel = None

    def eval_sexpr(self, s):
        return self.eval_expression(self.expand_and_transform(s))

    def read_all(self, text):
        return sexpr.read_string(self.state, text)

    def eval_source(self, text):
        """Evaluate every form in the text; results of the last one."""
        results = []
        for s in self.read_all(text):
            results = self.eval_sexpr(s)
        return results

    # -- prelude ----------------------------------------------------------

    def load_prelude(self):
        if self.prelude_loaded:
            return
        for s in self.read_all(prelude_text()):
            self.eval_sexpr(s)
        self.prelude_loaded = True
        self.prelude_symbol_ids = frozenset(id(sym) for sym in self.state.symbols.values())

    def user_procedures(self):
        """Procedure symbols defined after the prelude (all of them when
        no prelude was loaded)."""
        return [sym for sym in self.state.procedure_names()
                if id(sym) not in self.prelude_symbol_ids]

    def is_definition_form(self, s):
        if not sexpr.is_cons(s):
            return False
        head = sexpr.s_car(s)
        if not sexpr.is_symbol(head):
            return False
        name = self.state.symbol_name(sexpr.eject_symbol(head))
        return name in ("e1:define", "e1:trivial-define-macro")
