"""Validated, executable circuit plans and the built-in two-source preset."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Mapping

from . import dsl
from .dsl import (
    Bs2Stmt,
    BsStmt,
    CircuitAst,
    DetectStmt,
    Diagnostic,
    DmStmt,
    MergeStmt,
    ParamRef,
    PhaseStmt,
    PrepareStmt,
    SourceStmt,
    Statement,
    Value,
    WavePlateStmt,
)
from .elements import (
    MergeRule,
    PreparationSpec,
    WavePlateSetting,
    apply_bs_dual,
    apply_bs_single,
    apply_dichroic,
    apply_merge,
    apply_phase,
    apply_waveplate,
    prepare_beam,
)
from .modes import Band
from .state import DEFAULT_PRUNE_EPSILON, BiphotonState, SourceSpec, initial_state


class PlanError(ValueError):
    """Parameter or normalization failure when building/binding/running a plan."""

    def __init__(self, code: str, message: str) -> None:
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class CircuitPlan:
    sources: tuple[SourceStmt, ...]
    pipeline: tuple[Statement, ...]
    detect_path: str
    detect_band: Band
    free_parameters: frozenset[str]
    bindings: dict

    def bind(self, params: Mapping[str, float]) -> "CircuitPlan":
        """Attach parameter values (radians for angles); unknown names fail."""
        unknown = sorted(set(params) - self.free_parameters)
        if unknown:
            raise PlanError(
                "E_UNKNOWN_PARAM",
                f"not free parameters of this plan: {', '.join(unknown)}",
            )
        merged = dict(self.bindings)
        merged.update({k: float(v) for k, v in params.items()})
        return replace(self, bindings=merged)


@dataclass(frozen=True)
class ValidationResult:
    plan: CircuitPlan | None
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.plan is not None


def _collect_params(values: list[Value], out: set[str]) -> None:
    for v in values:
        if isinstance(v, ParamRef):
            out.add(v.name)


def validate(ast: CircuitAst) -> ValidationResult:
    """Check path flow, source ids and detect uniqueness; build the plan."""
    diags: list[Diagnostic] = []

    def err(stmt: Statement, code: str, message: str) -> None:
        diags.append(Diagnostic("error", stmt.span.line, stmt.span.column, code, message))

    sources: list[SourceStmt] = []
    pipeline: list[Statement] = []
    detects: list[DetectStmt] = []
    written: set[str] = set()
    params: set[str] = set()
    seen_ids: set[int] = set()
    elements_started = False

    def need(stmt: Statement, *paths: str) -> None:
        for p in paths:
            if p not in written:
                err(stmt, "E_UNKNOWN_PATH", f"path '{p}' is never produced before use")

    for stmt in ast.statements:
        if isinstance(stmt, SourceStmt):
            if elements_started:
                err(stmt, "E_SOURCE_ORDER", "source statements must precede elements")
            if stmt.source_id not in (1, 2):
                err(stmt, "E_SOURCE_ID", f"source id must be 1 or 2, got {stmt.source_id}")
            elif stmt.source_id in seen_ids:
                err(stmt, "E_DUP_SOURCE", f"duplicate source id {stmt.source_id}")
            else:
                seen_ids.add(stmt.source_id)
            written.update((stmt.signal, stmt.idler))
            sources.append(stmt)
            continue
        elements_started = True
        if isinstance(stmt, DetectStmt):
            need(stmt, stmt.path)
            detects.append(stmt)
            continue
        if isinstance(stmt, PrepareStmt):
            need(stmt, stmt.path)
            _collect_params([stmt.alpha, stmt.beta, stmt.gamma], params)
        elif isinstance(stmt, WavePlateStmt):
            need(stmt, stmt.path)
            _collect_params([stmt.angle], params)
        elif isinstance(stmt, BsStmt):
            need(stmt, stmt.in_path)
            written.update((stmt.out_t, stmt.out_r))
        elif isinstance(stmt, Bs2Stmt):
            need(stmt, stmt.in_a, stmt.in_b)
            written.update((stmt.out_a, stmt.out_b))
        elif isinstance(stmt, DmStmt):
            need(stmt, stmt.in_path)
            if stmt.signal_out == stmt.idler_out:
                err(stmt, "E_DM_ALIAS", "dichroic outputs must be distinct paths")
            written.update((stmt.signal_out, stmt.idler_out))
        elif isinstance(stmt, PhaseStmt):
            need(stmt, stmt.path)
            _collect_params([stmt.value], params)
        elif isinstance(stmt, MergeStmt):
            need(stmt, stmt.path)
        pipeline.append(stmt)

    if not sources:
        diags.append(Diagnostic("error", 1, 1, "E_NO_SOURCE", "no source statements"))
    if not detects:
        diags.append(Diagnostic("error", 1, 1, "E_NO_DETECT", "no detect statement"))
    for extra in detects[1:]:
        err(extra, "E_MULTI_DETECT", "more than one detect statement")

    if diags:
        return ValidationResult(None, tuple(diags))
    detect = detects[0]
    plan = CircuitPlan(
        sources=tuple(sources),
        pipeline=tuple(pipeline),
        detect_path=detect.path,
        detect_band=detect.band,
        free_parameters=frozenset(params),
        bindings={},
    )
    return ValidationResult(plan, tuple(diags))


def compile_text(text: str) -> tuple[CircuitPlan | None, tuple[Diagnostic, ...]]:
    """Parse then validate; diagnostics from both stages are concatenated."""
    parsed = dsl.parse(text)
    if not parsed.ok:
        return None, parsed.diagnostics
    validated = validate(parsed.ast)
    return validated.plan, parsed.diagnostics + validated.diagnostics


def _resolve_angle(value: Value | None, bindings: Mapping[str, float]) -> float:
    """Literal angles are degrees in the DSL; bound parameters are radians."""
    if value is None:
        return 0.0
    if isinstance(value, ParamRef):
        if value.name not in bindings:
            raise PlanError("E_UNBOUND_PARAM", f"unbound parameter '{value.name}'")
        return bindings[value.name]
    return math.radians(value)


def _resolve_plain(value: Value, bindings: Mapping[str, float]) -> float:
    if isinstance(value, ParamRef):
        if value.name not in bindings:
            raise PlanError("E_UNBOUND_PARAM", f"unbound parameter '{value.name}'")
        return bindings[value.name]
    return value


def iter_plan(
    plan: CircuitPlan,
    *,
    merge_enabled: bool = True,
    bs_convention: str = "symmetric",
    prune_epsilon: float = DEFAULT_PRUNE_EPSILON,
) -> Iterator[tuple[str, BiphotonState]]:
    """Run the plan, yielding (step label, state) after sources and each element."""
    b = plan.bindings
    specs = [
        SourceSpec(
            s.source_id,
            s.signal,
            s.idler,
            s.pol,
            math.radians(s.phase) if s.phase is not None else 0.0,
        )
        for s in plan.sources
    ]
    state = initial_state(specs, prune_epsilon)
    yield "sources", state
    for stmt in plan.pipeline:
        if isinstance(stmt, PrepareStmt):
            spec = PreparationSpec(
                alpha=_resolve_plain(stmt.alpha, b),
                beta=_resolve_plain(stmt.beta, b),
                rel_phase=_resolve_angle(stmt.gamma, b),
            )
            state = prepare_beam(state, stmt.path, stmt.band, spec)
        elif isinstance(stmt, WavePlateStmt):
            setting = WavePlateSetting(stmt.kind, _resolve_angle(stmt.angle, b))
            state = apply_waveplate(state, stmt.path, setting, stmt.band)
        elif isinstance(stmt, BsStmt):
            state = apply_bs_single(
                state, stmt.in_path, stmt.out_t, stmt.out_r, bs_convention
            )
        elif isinstance(stmt, Bs2Stmt):
            state = apply_bs_dual(
                state, stmt.in_a, stmt.in_b, stmt.out_a, stmt.out_b, bs_convention
            )
        elif isinstance(stmt, DmStmt):
            state = apply_dichroic(state, stmt.in_path, stmt.signal_out, stmt.idler_out)
        elif isinstance(stmt, PhaseStmt):
            state = apply_phase(state, stmt.path, _resolve_angle(stmt.value, b), stmt.band)
        elif isinstance(stmt, MergeStmt):
            if not merge_enabled:
                continue
            state = apply_merge(state, [MergeRule(stmt.path, stmt.pol, stmt.band)])
        else:
            raise TypeError(f"cannot execute statement {stmt!r}")
        yield stmt.pretty(), state


def run_plan(
    plan: CircuitPlan,
    *,
    merge_enabled: bool = True,
    bs_convention: str = "symmetric",
    prune_epsilon: float = DEFAULT_PRUNE_EPSILON,
) -> BiphotonState:
    """Evolve the plan's sources through its full pipeline."""
    state = None
    for _, state in iter_plan(
        plan,
        merge_enabled=merge_enabled,
        bs_convention=bs_convention,
        prune_epsilon=prune_epsilon,
    ):
        pass
    assert state is not None
    return state


#: The built-in two-source circuit: a pair of vertically emitting sources,
#: idler preparation before the beams join, a balanced interferometer stage
#: with a rotatable half-wave plate in one arm, and signal detection behind
#: the final combiner.
FIG1_SOURCE = """\
# Two-source polarization interference circuit (built-in preset "fig1").
# Idler preparation acts on source 1's emission path before the dichroic
# mirror joins both idlers on path r, so source 2's beam stays untouched.
source 1 signal=a idler=a pol=V
source 2 signal=r idler=r pol=V
prepare a idler alpha=$alpha1 beta=$beta1 gamma=$gamma
dm a -> signal: b idler: r
prepare b signal alpha=$alpha2 beta=$beta2 gamma=0
phase r value=$phi band=signal
merge r V idler
merge b V signal
merge r V signal
bs r -> e f
hwp f angle=$theta band=both
bs2 e f -> e' f'
dm f' -> signal: o idler: f'
bs2 o b -> o' b'
detect o' signal
"""

FIG1_PARAMETERS = ("alpha1", "beta1", "gamma", "alpha2", "beta2", "phi", "theta")

_NORM_TOL = 1e-10


def fig1_preset(params: Mapping[str, float]) -> CircuitPlan:
    """The built-in circuit with all seven parameters bound (angles in radians).

    Raises :class:`PlanError` with code ``E_MISSING_PARAM`` when a parameter
    is absent and ``E_NORM`` when either amplitude pair is not normalized.
    """
    missing = [name for name in FIG1_PARAMETERS if name not in params]
    if missing:
        raise PlanError("E_MISSING_PARAM", f"missing parameter(s): {', '.join(missing)}")
    for a, b in (("alpha1", "beta1"), ("alpha2", "beta2")):
        norm = params[a] ** 2 + params[b] ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise PlanError("E_NORM", f"{a}^2 + {b}^2 = {norm!r}, expected 1")
    plan, diagnostics = compile_text(FIG1_SOURCE)
    assert plan is not None, diagnostics
    return plan.bind({name: params[name] for name in FIG1_PARAMETERS})
