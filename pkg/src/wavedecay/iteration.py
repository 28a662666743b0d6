"""Decay bootstrap: exterior, interior and cone channels, assembled into a prediction.

Every channel starts from the initial estimate ``|phi| <~ <t-r>^1/2 / <t+r>`` and
repeatedly feeds its current bound back through the one-dimensional reduction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bounds import (EPS, ONE, ZERO, BoundExpr, DecayTerm, ExtRational, absorb_log,
                     combine, leading_u_exponent)
from .conversion import (ExteriorState, FinalBound, SourceBound, convert_cone,
                         convert_interior, convert_min, exterior_seed, exterior_step)

HALF = ExtRational(Fraction(1, 2))
MAX_STEPS = 500


class IterationError(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


@dataclass(frozen=True)
class CoefficientProfile:
    """Decay classes of the perturbation.

    ``sigma``: h, A decay like ``<r>^(-1-sigma)``; ``delta``: V like ``<r>^(-2-delta)``.
    ``None`` means the corresponding coefficient is absent.
    """

    sigma: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    part: int = 1
    amp_h: float = 0.0
    amp_A: float = 0.0
    amp_V: float = 0.0

    def __post_init__(self):
        for name in ("sigma", "delta"):
            v = getattr(self, name)
            if v is not None:
                v = Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(10**6)
                if v <= 0:
                    raise ValueError(f"{name}={v} violates the hypothesis 0<σ,δ<∞")
                object.__setattr__(self, name, v)
        if self.sigma is None and self.delta is None:
            raise ValueError("at least one of sigma, delta must be given")
        if self.part not in (1, 2):
            raise ValueError("part must be 1 or 2")

    def _min(self, *vals):
        vals = [v for v in vals if v is not None]
        return min(vals)

    def potential_rate(self) -> Fraction:
        """``min(1 + sigma, delta)``."""
        return self._min(None if self.sigma is None else 1 + self.sigma, self.delta)

    def lockstep_rate(self) -> Fraction:
        """``min(sigma, delta)``."""
        return self._min(self.sigma, self.delta)

    def theorem_rate(self) -> Fraction:
        """Closed-form ``<t-r>`` decay rate of the solution."""
        return 1 + (self.lockstep_rate() if self.part == 1 else self.potential_rate())


@dataclass
class TraceStep:
    channel: str
    step: int
    op: str
    inputs: tuple
    output: object
    note: str = ""

    def to_json(self):
        return {"channel": self.channel, "step": self.step, "op": self.op,
                "inputs": [_to_json(x) for x in self.inputs],
                "output": _to_json(self.output), "note": self.note}


def _to_json(x):
    if isinstance(x, (BoundExpr, SourceBound)):
        return x.to_json()
    if isinstance(x, ExteriorState):
        d = {"phase": x.phase, "N": x.N, "a": x.a.to_json()}
        if x.c is not None:
            d["c"] = x.c.to_json()
        return d
    if isinstance(x, FinalBound):
        return {"final": x.exponent.to_json()}
    if isinstance(x, ExtRational):
        return x.to_json()
    return x


def radial_to_temporal(expr: BoundExpr) -> BoundExpr:
    """Trade ``<r>^-p`` (p <= 1) for ``<t>^-p`` termwise."""
    groups = []
    for g in expr.groups:
        new = []
        for t in g:
            if t.alpha.q0 > 1:
                raise ValueError(f"radial exponent {t.alpha} exceeds 1")
            new.append(DecayTerm(t.m, ZERO, t.beta + t.alpha, t.eta))
        groups.append(tuple(new))
    return BoundExpr(tuple(groups))


def _radial_bound(expr: BoundExpr) -> BoundExpr:
    """From a bound on ``<r> w`` in ``<t-r>`` to one on ``w``."""
    return BoundExpr(tuple(tuple(DecayTerm(t.m, t.alpha + 1, t.beta, t.eta) for t in g)
                           for g in expr.groups))


def _fixed_point(channel, seed_eta, make_sources, trace, extra_note=None):
    """Shared loop: source eta -> conversion -> log absorption -> new eta.

    ``make_sources(eta)`` returns the majorants bounding the source when the
    solution obeys ``<r>w <~ <t-r>^-eta``.  Stops when the leading rate repeats.
    """
    eta = seed_eta
    prev = None
    step = 0
    while True:
        step += 1
        if step > MAX_STEPS:
            raise IterationError(f"{channel} channel did not terminate", trace)
        sources = make_sources(eta)
        out = convert_min(sources) if len(sources) > 1 else convert_interior(sources[0])
        note = extra_note(step, eta) if extra_note else ""
        trace.append(TraceStep(channel, step, "convert_min" if len(sources) > 1 else "convert_interior",
                               tuple(sources), out, note))
        if any(t.m for t in out.terms()):
            absorbed = absorb_log(out)
            trace.append(TraceStep(channel, step, "absorb_log", (out,), absorbed))
            out = absorbed
        new_eta, _ = leading_u_exponent(out)
        # w <~ <r>^-1 <t-r>^-eta  ->  <t>^-1 <t-r>^-eta for the next source
        w_bound = _radial_bound(BoundExpr.term(DecayTerm(0, ZERO, ZERO, new_eta)))
        as_t = radial_to_temporal(w_bound)
        trace.append(TraceStep(channel, step, "radial_to_temporal", (w_bound,), as_t,
                               "interior regime r < t"))
        if prev is not None and new_eta == prev:
            return new_eta
        prev = new_eta
        eta = new_eta


def iterate_interior(profile: CoefficientProfile, lockstep: bool = False):
    """Potential channel for r < t.  Returns ``(trace, bound on w)``.

    Target ``A = min(1+sigma, delta)`` (or ``min(sigma, delta)`` in lockstep).
    For ``A < 1`` the gain per step is ``nu = A``; otherwise ``nu = 1 - eps`` and
    the source is the minimum of ``<r>^-(2+nu)`` and ``<r>^-(2+A)`` weights.
    """
    A = ExtRational(profile.lockstep_rate() if lockstep else profile.potential_rate())
    channel = "interior-lockstep" if lockstep else "interior"
    trace: list[TraceStep] = []
    one_minus = ONE - EPS
    if A < ONE:
        nu = A
        n_prime = _max_n(lambda n: HALF + nu * n < ONE)

        def sources(eta):
            out = [SourceBound(0, nu + 2, ONE, eta)]
            if eta > ONE:
                # <r>^-(3+nu) weight serves the far radii once eta > 1
                out.append(SourceBound(0, nu + 3, ZERO, eta))
            return out

        note = f"part one: nu={nu}, n'={n_prime}"
    else:
        nu = one_minus
        n_dbl = _max_n(lambda n: nu * n < A)
        alpha_far = A + 2
        if alpha_far == ExtRational(3):
            alpha_far = alpha_far - EPS

        def sources(eta):
            return [SourceBound(0, nu + 2, ONE, eta), SourceBound(0, alpha_far, ONE, eta)]

        note = f"part two: nu={nu}, n''={n_dbl}"
    seed = -HALF
    trace.append(TraceStep(channel, 0, "seed", (), BoundExpr.term(DecayTerm(0, ZERO, ONE, seed)),
                           "initial estimate <t-r>^1/2/<t+r>; " + note))
    final_eta = _fixed_point(channel, seed, sources, trace)
    return trace, BoundExpr.term(DecayTerm(0, ONE, ZERO, final_eta))


def _max_n(pred, limit=10_000):
    """Largest n >= 0 with pred(n); pred must be monotone decreasing."""
    n = -1
    while n + 1 <= limit and pred(n + 1):
        n += 1
    return n


def iterate_cone(profile: CoefficientProfile):
    """Cone channel: source ``h * d phi`` supported near ``r = t``.

    Coefficient decay ``q = sigma`` (part 1) or ``1 + sigma`` (part 2, the gain
    from commuting with time derivatives).  The solution inside the source
    improves in lockstep by ``a = min(target, 1-)`` per step and never beyond
    the solution's own rate ``1 + target``.
    """
    if profile.sigma is None:
        raise ValueError("cone channel needs sigma")
    sigma = ExtRational(profile.sigma)
    q = sigma if profile.part == 1 else sigma + 1
    target = ExtRational(profile.lockstep_rate() if profile.part == 1 else profile.potential_rate())
    cap = ONE + target
    a = min(target, ONE - EPS)
    trace: list[TraceStep] = []
    e = -HALF
    trace.append(TraceStep("cone", 0, "seed", (), BoundExpr.term(DecayTerm(0, ZERO, ONE, e)),
                           f"q={q}, lockstep a={a}"))
    prev = None
    step = 0
    while True:
        step += 1
        if step > MAX_STEPS:
            raise IterationError("cone channel did not terminate", trace)
        src = SourceBound(0, q + 2, ZERO, e)
        out = convert_cone(src)
        trace.append(TraceStep("cone", step, "convert_cone", (src,), out))
        if any(t.m for t in out.terms()):
            absorbed = absorb_log(out)
            trace.append(TraceStep("cone", step, "absorb_log", (out,), absorbed))
            out = absorbed
        c, _ = leading_u_exponent(out)
        c = min(c, cap)
        state = (c, e)
        if state == prev:
            break
        prev = state
        e = min(e + a, c)
    return trace, BoundExpr.term(DecayTerm(0, ONE, ZERO, c))


def iterate_exterior(profile: CoefficientProfile):
    a = ExtRational(profile.potential_rate())
    trace: list[TraceStep] = []
    state = exterior_seed(a)
    trace.append(TraceStep("exterior", 0, "seed", (), state,
                           "reconstructed: first iteration seeded from <u>^1/2/<v> <= <r>^-1/2"))
    step = 0
    while not isinstance(state, FinalBound):
        step += 1
        if step > MAX_STEPS:
            raise IterationError("exterior channel did not terminate", trace)
        nxt = exterior_step(state)
        trace.append(TraceStep("exterior", step, "exterior_step", (state,), nxt))
        state = nxt
    return trace, state.bound()


@dataclass
class PredictionReport:
    profile: CoefficientProfile
    final: BoundExpr
    channel_bounds: dict
    trace: list
    theorem_exponent: Fraction
    exact_exponent: ExtRational
    discrepancies: list = field(default_factory=list)
    indices: dict = field(default_factory=dict)

    def to_json(self):
        p = self.profile
        return {
            "profile": {"sigma": _opt_str(p.sigma), "delta": _opt_str(p.delta), "part": p.part},
            "theorem_exponent": str(self.theorem_exponent),
            "exact_exponent": self.exact_exponent.to_json(),
            "local_decay_exponent": str(self.theorem_exponent + 1),
            "final": self.final.to_json(),
            "channel_bounds": {k: v.to_json() for k, v in self.channel_bounds.items()},
            "discrepancies": self.discrepancies,
            "trace": [s.to_json() for s in self.trace],
            "notes": ["symbolic layer ignores data terms of intermediate iterates",
                      "implicit constants are not tracked"],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def step_table(self) -> str:
        rows = [f"{'channel':<18} {'step':>4}  {'op':<20} output"]
        for s in self.trace:
            rows.append(f"{s.channel:<18} {s.step:>4}  {s.op:<20} {_short(s.output)}")
        return "\n".join(rows)


def _short(x):
    if isinstance(x, FinalBound):
        return f"final <r>^-1 <t-r>^-({x.exponent})"
    if isinstance(x, ExteriorState):
        return f"{x.phase}(N={x.N})" + (f" c={x.c}" if x.c is not None else "")
    return str(x)


def _opt_str(x):
    return None if x is None else str(x)


def predict(profile: CoefficientProfile) -> PredictionReport:
    channels = {}
    trace: list[TraceStep] = []
    t_ext, b_ext = iterate_exterior(profile)
    channels["exterior"] = b_ext
    trace += t_ext
    t_int, b_int = iterate_interior(profile)
    channels["interior"] = b_int
    trace += t_int
    if profile.sigma is not None:
        t_cone, b_cone = iterate_cone(profile)
        channels["cone"] = b_cone
        trace += t_cone
    temporal = {k: radial_to_temporal(v) for k, v in channels.items()}
    assembled = combine("sum", list(temporal.values()))
    worst, _ = leading_u_exponent(
        BoundExpr(tuple((DecayTerm(t.m, ZERO, ZERO, t.eta),) for t in assembled.terms())))
    final = BoundExpr.term(DecayTerm(0, ZERO, ONE, worst))
    theorem = worst.standard
    expected = profile.theorem_rate()
    discrepancies = []
    if theorem != expected:
        discrepancies.append({"kind": "exponent", "derived": str(theorem),
                              "closed_form": str(expected)})
    return PredictionReport(profile, final, channels, trace, theorem, worst, discrepancies)


def replay(step: TraceStep):
    """Recompute a trace step's output from its recorded inputs."""
    if step.op == "convert_interior":
        return convert_interior(step.inputs[0])
    if step.op == "convert_min":
        return convert_min(list(step.inputs))
    if step.op == "convert_cone":
        return convert_cone(step.inputs[0])
    if step.op == "exterior_step":
        return exterior_step(step.inputs[0])
    if step.op == "absorb_log":
        return absorb_log(step.inputs[0])
    if step.op == "radial_to_temporal":
        return radial_to_temporal(step.inputs[0])
    if step.op == "seed":
        return step.output
    raise ValueError(step.op)
