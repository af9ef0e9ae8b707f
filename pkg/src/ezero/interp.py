"""The small-step abstract machine.

Each thread owns two stacks, written here as Python lists with the top
at the end:

* the main stack holds (possibly-holed expression, local environment)
  pairs; local environments are dicts from symbol buffers to words;
* the value stack holds words and the two separators VSEP and ASEP;
  a reachable value stack always has VSEP on top between rule firings.

step_thread performs exactly one sequential step and reports what
happened; the Machine schedules the foreground thread and the
background threads in the futures table, round-robin by default with a
quantum of one step, or by a seeded random choice when probing
schedule sensitivity.  The parallel rule never propagates a background
failure anywhere.
"""

from __future__ import annotations

import random

from . import expr as E
from .errors import (CheckedRuntimeError, EvalFailure, FuelExhausted,
                     PrimitiveFailure, ResourceOverflow)
from .expr import (BundleHole, CallClosureHole, CallHole, CallIndirectHole,
                   ForkHole, IfHole, JoinHole, LetHole, PrimitiveHole)
from .state import ThreadState
from .store import Buffer, Future, word_eq

DEFAULT_FUEL = 10 ** 8
DEFAULT_STACK_LIMIT = 10 ** 6
DEFAULT_VALUE_LIMIT = 10 ** 6


class _Separator:
    __slots__ = ("glyph",)

    def __init__(self, glyph):
        self.glyph = glyph

    def __repr__(self):
        return self.glyph


VSEP = _Separator("▹")   # value separator
ASEP = _Separator("‖")   # activation separator

_EMPTY_RHO: dict = {}


class FailureKind:
    ENVIRONMENT = "environment"
    DIMENSION = "dimension"
    PRIMITIVE = "primitive"


class Final:
    __slots__ = ("results",)

    def __init__(self, results):
        self.results = results


class Failed:
    __slots__ = ("kind", "message", "handle")

    def __init__(self, kind, message, handle=None):
        self.kind = kind
        self.message = message
        self.handle = handle

    def __repr__(self):
        return f"Failed({self.kind}, {self.message!r})"


class Waiting:
    __slots__ = ("thread",)

    def __init__(self, thread):
        self.thread = thread


class Overflow:
    __slots__ = ("message",)

    def __init__(self, message):
        self.message = message


class Closure:
    """Host closure value used only by the extended (oracle) machine
    mode; never appears in images or converted programs."""

    __slots__ = ("formals", "body", "environment")

    def __init__(self, formals, body, environment):
        self.formals = formals
        self.body = body
        self.environment = environment

    def __repr__(self):
        return f"<closure/{len(self.formals)}>"


class Configuration:
    """A foreground thread paired with its global state."""

    __slots__ = ("thread", "state")

    def __init__(self, thread, state):
        self.thread = thread
        self.state = state


def initial_thread(e, env=None):
    return ThreadState(0, [(e, _EMPTY_RHO if env is None else env)], [VSEP])


def initial_configuration(e, state, env=None):
    return Configuration(initial_thread(e, env), state)


_MISSING = object()


def _decode_list(w):
    items = []
    while w != 0:
        items.append(w.cells[0])
        w = w.cells[1]
    return items


def _scan_groups(vs, want_singletons):
    """Scan the value stack down from the top until the first ASEP.
    Returns the groups in evaluation (deepest-first) order, each a list
    of values in evaluation order, or None if the stack does not match
    the VSEP (value* VSEP)* ASEP pattern.  When want_singletons is set,
    returns None as soon as a non-singleton group appears."""
    i = len(vs) - 1
    if i < 0 or vs[i] is not VSEP:
        return None
    groups = []
    group = []
    i -= 1
    while i >= 0:
        item = vs[i]
        if item is ASEP:
            if group:
                return None  # value directly above ASEP, no closing VSEP
            groups.reverse()
            return groups
        if item is VSEP:
            if want_singletons and len(group) != 1:
                return None
            group.reverse()
            groups.append(group)
            group = []
        else:
            group.append(item)
        i -= 1
    return None


def step_thread(ts, state, extended=False,
                stack_limit=DEFAULT_STACK_LIMIT,
                value_limit=DEFAULT_VALUE_LIMIT):
    """One sequential step of the given thread.  Returns the fired rule
    name on success (mutating the thread in place), or a Final, Failed,
    Waiting or Overflow outcome."""
    stack = ts.stack
    if not stack:
        vs = ts.vstack
        if len(vs) >= 2 and vs[0] is VSEP and vs[-1] is VSEP:
            return Final([w for w in vs[1:-1]])
        return Failed(FailureKind.PRIMITIVE, "malformed final value stack")
    vs = ts.vstack
    item, rho = stack[-1]
    cls = item.__class__
    try:
        if cls is Buffer:
            cells = item.cells
            tag = cells[0]
            if tag == 0:  # variable
                sym = cells[2]
                val = rho.get(sym, _MISSING)
                if val is _MISSING:
                    scells = sym.cells
                    if scells is None or len(scells) != 9 or scells[1] == 0:
                        return Failed(FailureKind.ENVIRONMENT,
                                      f"unbound variable {_name(state, sym)}",
                                      cells[1])
                    val = scells[2]
                stack.pop()
                vs.append(val)
                vs.append(VSEP)
                return "variable"
            if tag == 1:  # constant
                stack.pop()
                vs.append(cells[2])
                vs.append(VSEP)
                return "constant"
            if len(stack) >= stack_limit or len(vs) >= value_limit:
                return Overflow(f"stack depth limit exceeded at handle {cells[1]}")
            if tag == 5:  # call, expansive
                actuals = _decode_list(cells[3])
                stack[-1] = (CallHole(cells[1], cells[2], len(actuals)), _EMPTY_RHO)
                for a in reversed(actuals):
                    stack.append((a, rho))
                vs[-1] = ASEP
                vs.append(VSEP)
                return "call_e"
            if tag == 3:  # primitive, expansive
                actuals = _decode_list(cells[3])
                stack[-1] = (PrimitiveHole(cells[1], cells[2], len(actuals)), _EMPTY_RHO)
                for a in reversed(actuals):
                    stack.append((a, rho))
                vs[-1] = ASEP
                vs.append(VSEP)
                return "primitive_e"
            if tag == 7:  # if-in, expansive
                stack[-1] = (IfHole(cells[1], _decode_list(cells[3]), cells[4], cells[5]), rho)
                stack.append((cells[2], rho))
                return "if_e"
            if tag == 4:  # let, expansive
                stack[-1] = (LetHole(cells[1], _decode_list(cells[2]), cells[4]), rho)
                stack.append((cells[3], rho))
                return "let_e"
            if tag == 2:  # bundle, expansive
                items = _decode_list(cells[2])
                stack[-1] = (BundleHole(cells[1], len(items)), _EMPTY_RHO)
                for a in reversed(items):
                    stack.append((a, rho))
                vs[-1] = ASEP
                vs.append(VSEP)
                return "bundle_e"
            if tag == 8:  # fork, expansive
                actuals = _decode_list(cells[3])
                stack[-1] = (ForkHole(cells[1], cells[2], len(actuals)), _EMPTY_RHO)
                for a in reversed(actuals):
                    stack.append((a, rho))
                vs[-1] = ASEP
                vs.append(VSEP)
                return "fork_e"
            if tag == 9:  # join, expansive
                stack[-1] = (JoinHole(cells[1]), rho)
                stack.append((cells[2], rho))
                return "join_e"
            if tag == 6:  # call-indirect, expansive
                actuals = _decode_list(cells[3])
                stack[-1] = (CallIndirectHole(cells[1], len(actuals)), _EMPTY_RHO)
                for a in reversed(actuals):
                    stack.append((a, rho))
                stack.append((cells[2], rho))
                vs[-1] = ASEP
                vs.append(VSEP)
                return "call-indirect_e"
            if tag == 10:  # lambda (extended interpreter only)
                if not extended:
                    return Failed(FailureKind.PRIMITIVE,
                                  "lambda reached the core machine (not closure-converted)",
                                  cells[1])
                formals = _decode_list(cells[2])
                captured = {}
                for sym in E.free_variables(item, state):
                    if sym in rho:
                        captured[sym] = rho[sym]
                stack.pop()
                vs.append(Closure(formals, cells[3], captured))
                vs.append(VSEP)
                return "lambda"
            if tag == 11:  # call-closure (extended interpreter only)
                if not extended:
                    return Failed(FailureKind.PRIMITIVE,
                                  "call-closure reached the core machine (not closure-converted)",
                                  cells[1])
                actuals = _decode_list(cells[3])
                stack[-1] = (CallClosureHole(cells[1], len(actuals)), _EMPTY_RHO)
                for a in reversed(actuals):
                    stack.append((a, rho))
                stack.append((cells[2], rho))
                vs[-1] = ASEP
                vs.append(VSEP)
                return "call-closure_e"
            return Failed(FailureKind.PRIMITIVE, f"malformed expression (tag {tag!r})")

        if cls is LetHole:
            # one bundle of m >= n values on top, all of them popped
            i = len(vs) - 1
            if vs[i] is not VSEP:
                return Failed(FailureKind.DIMENSION, "let: malformed value stack", item.handle)
            j = i - 1
            while j >= 0 and vs[j] is not VSEP and vs[j] is not ASEP:
                j -= 1
            if j < 0 or vs[j] is not VSEP:
                return Failed(FailureKind.DIMENSION, "let: malformed value stack", item.handle)
            variables = item.variables
            n = len(variables)
            m = i - 1 - j
            if m < n:
                return Failed(FailureKind.DIMENSION,
                              f"let of {n} variables received a bundle of {m}", item.handle)
            if n:
                rho2 = dict(rho)
                for k in range(n):
                    rho2[variables[k]] = vs[j + 1 + k]
            else:
                rho2 = rho
            del vs[j + 1:]
            stack[-1] = (item.body, rho2)
            return "let_c"

        if cls is CallHole:
            f = item.name
            fcells = f.cells
            body = fcells[4]
            if body != 0:
                formals = _decode_list(fcells[3])
                n = len(formals)
                groups = _scan_groups(vs, True)
                if groups is None or len(groups) != n:
                    return Failed(FailureKind.DIMENSION,
                                  f"call of {_name(state, f)}: bad actual bundles", item.handle)
                rho2 = {}
                for k in range(n):
                    rho2[formals[k]] = groups[k][0]
                del vs[len(vs) - 2 * n - 2:]
                vs.append(VSEP)
                stack[-1] = (body, rho2)
                return "call_c"
            hp = state.host_procedures.get(id(f))
            if hp is None:
                return Failed(FailureKind.DIMENSION,
                              f"call of undefined procedure {_name(state, f)}", item.handle)
            n, fn = hp[0], hp[1]
            groups = _scan_groups(vs, True)
            if groups is None or len(groups) != n:
                return Failed(FailureKind.DIMENSION,
                              f"call of {_name(state, f)}: bad actual bundles", item.handle)
            results = fn([g[0] for g in groups], state)
            del vs[len(vs) - 2 * n - 2:]
            vs.append(VSEP)
            vs.extend(results)
            vs.append(VSEP)
            stack.pop()
            return "call_c"

        if cls is PrimitiveHole:
            pi = item.name
            d = state.catalog.by_index(pi.cells[7])
            if d is None:
                return Failed(FailureKind.PRIMITIVE,
                              f"unknown primitive {_name(state, pi)}", item.handle)
            n = d.in_dim
            groups = _scan_groups(vs, True)
            if groups is None or len(groups) != n:
                return Failed(FailureKind.DIMENSION,
                              f"primitive {d.name}: bad actual bundles", item.handle)
            results = d.fn([g[0] for g in groups], state)
            del vs[len(vs) - 2 * n - 2:]
            vs.append(VSEP)
            vs.extend(results)
            vs.append(VSEP)
            stack.pop()
            return "primitive_c"

        if cls is IfHole:
            i = len(vs) - 1
            if i < 2 or vs[i] is not VSEP or vs[i - 2] is not VSEP:
                return Failed(FailureKind.DIMENSION,
                              "conditional discriminand is not a singleton", item.handle)
            c = vs[i - 1]
            if c is VSEP or c is ASEP:
                return Failed(FailureKind.DIMENSION,
                              "conditional discriminand is not a singleton", item.handle)
            del vs[i - 1:]
            hit = False
            for v in item.values:
                if word_eq(c, v):
                    hit = True
                    break
            stack[-1] = ((item.then_branch if hit else item.else_branch), rho)
            return "if_c_in" if hit else "if_c_notin"

        if cls is BundleHole:
            groups = _scan_groups(vs, True)
            if groups is None:
                return Failed(FailureKind.DIMENSION,
                              "bundle items produced non-singleton bundles", item.handle)
            n = len(groups)
            del vs[len(vs) - 2 * n - 2:]
            vs.append(VSEP)
            for g in groups:
                vs.append(g[0])
            vs.append(VSEP)
            stack.pop()
            return "bundle_c"

        if cls is ForkHole:
            f = item.name
            fcells = f.cells
            body = fcells[4]
            if body == 0:
                return Failed(FailureKind.DIMENSION,
                              f"fork of undefined procedure {_name(state, f)}", item.handle)
            formals = _decode_list(fcells[3])
            n = len(formals) - 1
            if n < 0:
                return Failed(FailureKind.DIMENSION,
                              f"fork target {_name(state, f)} declares no future formal",
                              item.handle)
            groups = _scan_groups(vs, True)
            if groups is None or len(groups) != n:
                return Failed(FailureKind.DIMENSION,
                              f"fork of {_name(state, f)}: bad actual bundles", item.handle)
            t = state.next_thread_id
            state.next_thread_id += 1
            fw = state.future_word(t)
            rho2 = {formals[0]: fw}
            for k in range(n):
                rho2[formals[k + 1]] = groups[k][0]
            state.futures[t] = ThreadState(t, [(body, rho2)], [VSEP])
            del vs[len(vs) - 2 * n - 2:]
            vs.append(VSEP)
            vs.append(fw)
            vs.append(VSEP)
            stack.pop()
            return "fork_c"

        if cls is JoinHole:
            i = len(vs) - 1
            if i < 2 or vs[i] is not VSEP or vs[i - 2] is not VSEP:
                return Failed(FailureKind.DIMENSION,
                              "join operand is not a singleton", item.handle)
            c = vs[i - 1]
            if c is VSEP or c is ASEP:
                return Failed(FailureKind.DIMENSION,
                              "join operand is not a singleton", item.handle)
            if c.__class__ is not Future:
                return Failed(FailureKind.PRIMITIVE,
                              f"join of a non-future: {c!r}", item.handle)
            target = state.futures.get(c.thread)
            if target is None:
                return Failed(FailureKind.PRIMITIVE,
                              f"join of unknown thread {c.thread}", item.handle)
            if target.status == ThreadState.FINISHED and len(target.results) == 1:
                vs[i - 1] = target.results[0]
                stack.pop()
                return "join_c"
            return Waiting(c.thread)

        if cls is CallIndirectHole:
            n = item.n
            groups = _scan_groups(vs, True)
            if groups is None or len(groups) != n + 1:
                return Failed(FailureKind.DIMENSION,
                              "indirect call: bad actual bundles", item.handle)
            op = groups[0][0]
            args = [g[0] for g in groups[1:]]
            if (not isinstance(op, Buffer) or op.cells is None
                    or len(op.cells) != 9):
                return Failed(FailureKind.PRIMITIVE,
                              f"indirect call of a non-procedure: {op!r}", item.handle)
            body = op.cells[4]
            if body != 0:
                formals = _decode_list(op.cells[3])
                if len(formals) != n:
                    return Failed(FailureKind.DIMENSION,
                                  f"indirect call of {_name(state, op)}: arity mismatch",
                                  item.handle)
                rho2 = dict(zip(formals, args))
                del vs[len(vs) - 2 * (n + 1) - 2:]
                vs.append(VSEP)
                stack[-1] = (body, rho2)
                return "call-indirect_c"
            hp = state.host_procedures.get(id(op))
            if hp is None:
                return Failed(FailureKind.PRIMITIVE,
                              f"indirect call of undefined procedure {_name(state, op)}",
                              item.handle)
            if hp[0] != n:
                return Failed(FailureKind.DIMENSION,
                              f"indirect call of {_name(state, op)}: arity mismatch",
                              item.handle)
            results = hp[1](args, state)
            del vs[len(vs) - 2 * (n + 1) - 2:]
            vs.append(VSEP)
            vs.extend(results)
            vs.append(VSEP)
            stack.pop()
            return "call-indirect_c"

        if cls is CallClosureHole:
            n = item.n
            groups = _scan_groups(vs, True)
            if groups is None or len(groups) != n + 1:
                return Failed(FailureKind.DIMENSION,
                              "closure call: bad actual bundles", item.handle)
            op = groups[0][0]
            if op.__class__ is not Closure:
                return Failed(FailureKind.PRIMITIVE,
                              f"closure call of a non-closure: {op!r}", item.handle)
            if len(op.formals) != n:
                return Failed(FailureKind.DIMENSION,
                              "closure call: arity mismatch", item.handle)
            rho2 = dict(op.environment)
            for k in range(n):
                rho2[op.formals[k]] = groups[k + 1][0]
            del vs[len(vs) - 2 * (n + 1) - 2:]
            vs.append(VSEP)
            stack[-1] = (op.body, rho2)
            return "call-closure_c"

        return Failed(FailureKind.PRIMITIVE, f"malformed frame {item!r}")
    except PrimitiveFailure as pf:
        handle = getattr(item, "handle", None) if cls is not Buffer else item.cells[1]
        return Failed(FailureKind.PRIMITIVE, str(pf), handle)
    except EvalFailure as ef:
        # a nested evaluation inside a host procedure failed; it belongs
        # to this thread's step, not to whoever drives the machine
        handle = getattr(item, "handle", None) if cls is not Buffer else item.cells[1]
        return Failed(ef.kind, str(ef), handle)
    except (AttributeError, IndexError, TypeError, KeyError, CheckedRuntimeError) as err:
        return Failed(FailureKind.PRIMITIVE, f"malformed program data: {err!r}")


def _name(state, sym):
    try:
        return state.symbol_name(sym)
    except Exception:
        return repr(sym)


def step_sequential(config, extended=False):
    """One step of the sequential sub-relation on a configuration."""
    return step_thread(config.thread, config.state, extended=extended)


class Machine:
    """Drives a foreground thread (and the background threads living in
    the state's futures table) to a final configuration."""

    def __init__(self, state, seed=None, trace=None, extended_lambdas=False,
                 stack_limit=DEFAULT_STACK_LIMIT, value_limit=DEFAULT_VALUE_LIMIT):
        self.state = state
        self.rng = random.Random(seed) if seed is not None else None
        self.trace = trace  # callable taking (thread_id, rule_name)
        self.extended = extended_lambdas
        self.stack_limit = stack_limit
        self.value_limit = value_limit
        self._rotation_index = 0

    @staticmethod
    def _unblocked(ts, futures):
        if ts.blocked_on is None:
            return True
        target = futures.get(ts.blocked_on)
        if (target is not None and target.status == ThreadState.FINISHED
                and len(target.results) == 1):
            ts.blocked_on = None
            return True
        return False

    def _runnable(self, foreground):
        futures = self.state.futures
        threads = []
        if self._unblocked(foreground, futures):
            threads.append(foreground)
        for t in sorted(futures):
            ts = futures[t]
            if ts.status == ThreadState.RUNNING and self._unblocked(ts, futures):
                threads.append(ts)
        return threads

    def step_parallel(self, foreground):
        """Perform one step of some thread.  Returns (thread, outcome);
        outcome is None when nothing can step (deadlock)."""
        runnable = self._runnable(foreground)
        if not runnable:
            return None, None
        if self.rng is not None:
            ts = runnable[self.rng.randrange(len(runnable))]
        else:
            self._rotation_index += 1
            ts = runnable[self._rotation_index % len(runnable)]
        outcome = step_thread(ts, self.state, extended=self.extended,
                              stack_limit=self.stack_limit,
                              value_limit=self.value_limit)
        if isinstance(outcome, str):
            if self.trace is not None:
                self.trace(ts.thread, outcome)
            return ts, outcome
        if isinstance(outcome, Waiting):
            ts.blocked_on = outcome.thread
            return ts, outcome
        if ts.thread != 0:
            # background outcomes are recorded, never propagated
            if isinstance(outcome, Final):
                ts.status = ThreadState.FINISHED
                ts.results = outcome.results
            else:
                ts.status = ThreadState.FAILED
                ts.failure = outcome
            if self.trace is not None:
                self.trace(ts.thread, ts.status)
        return ts, outcome

    def run(self, foreground):
        """Iterate until the foreground thread finishes.  Returns its
        result bundle; raises EvalFailure, FuelExhausted or
        ResourceOverflow."""
        state = self.state
        step = step_thread
        extended = self.extended
        stack_limit = self.stack_limit
        value_limit = self.value_limit
        trace = self.trace
        while True:
            if not state.futures and foreground.blocked_on is None and trace is None:
                # single-threaded fast path, identical scheduling
                self._rotation_index += 1
                outcome = step(foreground, state, extended, stack_limit, value_limit)
                if outcome.__class__ is str:
                    fuel = state.fuel
                    if fuel is not None:
                        if fuel <= 0:
                            raise FuelExhausted("step budget exhausted")
                        state.fuel = fuel - 1
                    continue
                if outcome.__class__ is Waiting:
                    foreground.blocked_on = outcome.thread
                    continue
                ts = foreground
            else:
                ts, outcome = self.step_parallel(foreground)
                if ts is None:
                    raise FuelExhausted(
                        "all threads blocked on join; the awaited results can never arrive")
                if isinstance(outcome, str):
                    fuel = state.fuel
                    if fuel is not None:
                        if fuel <= 0:
                            raise FuelExhausted("step budget exhausted")
                        state.fuel = fuel - 1
                    continue
            if ts.thread != 0 or isinstance(outcome, Waiting):
                continue
            if isinstance(outcome, Final):
                return outcome.results
            if isinstance(outcome, Failed):
                raise EvalFailure(outcome.kind, outcome.message, outcome.handle)
            raise ResourceOverflow(outcome.message)


def eval_expression(e, state, env=None, fuel=None, seed=None, trace=None,
                    extended=False, stack_limit=DEFAULT_STACK_LIMIT,
                    value_limit=DEFAULT_VALUE_LIMIT):
    """Evaluate one expression to its result bundle.

    The step budget lives on the state so that nested evaluations
    (macro procedures, e0:fast-eval) share the enclosing budget instead
    of resetting it.
    """
    owner = state.fuel is None
    if owner:
        state.fuel = DEFAULT_FUEL if fuel is None else fuel
    try:
        machine = Machine(state, seed=seed, trace=trace, extended_lambdas=extended,
                          stack_limit=stack_limit, value_limit=value_limit)
        return machine.run(initial_thread(e, env))
    finally:
        if owner:
            state.fuel = None


def apply_procedure(name, args, state):
    """Call a procedure (interpreted or host) on already-evaluated
    arguments; results come back as a Python list."""
    cells = name.cells
    if cells is not None and len(cells) == 9 and cells[4] != 0:
        formals = state.store.list_items(cells[3])
        if len(formals) != len(args):
            raise EvalFailure(FailureKind.DIMENSION,
                              f"{state.symbol_name(name)}: arity mismatch "
                              f"({len(args)} for {len(formals)})")
        return eval_expression(cells[4], state, env=dict(zip(formals, args)))
    hp = state.host_procedure(name) if cells is not None and len(cells) == 9 else None
    if hp is not None:
        if hp[0] != len(args):
            raise EvalFailure(FailureKind.DIMENSION,
                              f"{state.symbol_name(name)}: arity mismatch")
        try:
            return hp[1](list(args), state)
        except PrimitiveFailure as pf:
            raise EvalFailure(FailureKind.PRIMITIVE, str(pf)) from None
    raise EvalFailure(FailureKind.ENVIRONMENT,
                      f"apply of unbound procedure: {_name(state, name)}")


def apply_primitive(name, args, state):
    from . import primitives

    descriptor = state.catalog.get(name if isinstance(name, str) else state.symbol_name(name))
    if descriptor is None:
        raise EvalFailure(FailureKind.ENVIRONMENT, f"apply of unknown primitive: {name!r}")
    if len(args) != descriptor.in_dim:
        raise EvalFailure(FailureKind.DIMENSION,
                          f"{descriptor.name}: arity mismatch ({len(args)} for {descriptor.in_dim})")
    try:
        return primitives.invoke(descriptor, list(args), state)
    except PrimitiveFailure as pf:
        raise EvalFailure(FailureKind.PRIMITIVE, str(pf)) from None
