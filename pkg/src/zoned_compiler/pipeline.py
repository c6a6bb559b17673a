"""End-to-end compilation: parse, stage, place, anneal, route, score."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .architecture import ArchitectureConfig, ArchitectureError, min_capacity_check
from .fidelity import FidelityReport, PhysicalParams, evaluate_fidelity
from .ir import Circuit, GateDag, build_dag
from .placement import AnnealResult, PlacementSequence, SAParams, anneal, build_proposal, placement_cost
from .router import Schedule, assemble_schedule
from .scheduler import StagePlan, asap_schedule, validate_stage_plan
from .timing import TimingModel


@dataclass
class CompileResult:
    circuit: Circuit
    dag: GateDag
    plan: StagePlan
    config: ArchitectureConfig
    proposal: PlacementSequence
    placement: PlacementSequence
    anneal: AnnealResult | None
    schedule: Schedule
    fidelity: FidelityReport
    seconds: dict[str, float] = field(default_factory=dict)


def choose_architecture(
    circuit: Circuit, plan: StagePlan, arch: ArchitectureConfig | dict | None = None
) -> ArchitectureConfig:
    """A fixed ``ArchitectureConfig``, or one sized to the circuit with ``dict`` overrides."""
    if isinstance(arch, ArchitectureConfig):
        config = arch
    else:
        config = ArchitectureConfig.for_circuit(circuit.n_qubits, plan.max_width, **(arch or {}))
    verdict = min_capacity_check(config, circuit, plan.max_width)
    if not verdict:
        raise ArchitectureError(str(verdict))
    return config


def compile_circuit(
    circuit: Circuit,
    arch: ArchitectureConfig | dict | None = None,
    sa: SAParams | None = SAParams(),
    timing: TimingModel = TimingModel(),
    physical: PhysicalParams = PhysicalParams(),
    reuse: bool = True,
) -> CompileResult:
    """Compile ``circuit``; ``sa=None`` skips annealing and keeps the proposal."""
    clock = {}
    t = time.perf_counter()
    dag = build_dag(circuit)
    plan = asap_schedule(circuit, dag)
    verdict = validate_stage_plan(plan, dag)
    if not verdict:
        raise AssertionError(f"scheduler produced an invalid plan: {verdict.violation}")
    clock["schedule"] = time.perf_counter() - t

    t = time.perf_counter()
    config = choose_architecture(circuit, plan, arch)
    proposal = build_proposal(circuit, plan, config, reuse=reuse)
    result = None
    placement = proposal
    if sa is not None and plan.n_stages:
        result = anneal(proposal, sa, timing)
        placement = result.sequence
    clock["place"] = time.perf_counter() - t

    t = time.perf_counter()
    schedule = assemble_schedule(placement, timing)
    cost = placement_cost(placement, timing, result.weight if result else None)
    schedule.meta.update(
        {
            "reuse": reuse,
            "annealed": result is not None,
            "placement_cost": cost.total,
            "seed": sa.seed if sa is not None else None,
        }
    )
    clock["route"] = time.perf_counter() - t
    report = evaluate_fidelity(schedule, physical)
    return CompileResult(circuit, dag, plan, config, proposal, placement, result, schedule, report, clock)
