import logging
import os
from typing import Any

import numpy as np
from mcp.types import TextContent, Tool

from . import reports
from .config import ModelConfig, load_model_config, parse_model_descriptor
from .existence import (
    TypeD,
    build_composite_front,
    classify_destabilization_type,
    find_branches,
    find_fold,
    refine_front_bvp,
    regular_front_v_peak,
)
from .fast_field import (
    fast_eigenvalues,
    fast_front_eval,
    fast_hamiltonian,
    jump_derivative,
    jump_integral_J,
    stability_integrals,
)
from .model import validate_reaction_spec
from .simulation import SimConfig, run_and_classify
from .spectrum.essential import classify_regime, stability_verdict
from .spectrum.evans import LinearizationContext, lambda_edge_predict
from .spectrum.oracle import discrete_spectrum_oracle

logger = logging.getLogger("frontlab.tools")

_MODEL_SCHEMA = {
    "type": "object",
    "description": (
        "Model descriptor: {epsilon, tau, regime: {super_slow: {gamma}} | {regular: {g1}}, "
        "H: {kind: power, h0, m} | {kind: table, coefficients}, G?, F?}. "
        "Falls back to the file named by FRONTLAB_CONFIG_FILE when omitted."
    ),
}


def _model(args: dict) -> ModelConfig:
    if "model" in args:
        return parse_model_descriptor(args["model"])
    path = os.getenv("FRONTLAB_CONFIG_FILE", "").strip()
    if not path:
        raise RuntimeError("model argument required (or set FRONTLAB_CONFIG_FILE)")
    return load_model_config(path)


def _text(payload: Any) -> list[TextContent]:
    return [TextContent(type="text", text=reports.dumps(payload))]


def _schema(properties: dict | None = None, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": {"model": _MODEL_SCHEMA, **(properties or {})},
        "required": required or [],
    }


def _branch_level(config: ModelConfig, branch: int) -> float:
    """Jump level v0 of the requested front branch (1 or 2); the regular regime has one front."""
    if not config.params.is_super_slow:
        return regular_front_v_peak(config.params, config.spec)
    branches = find_branches(config.params, config.spec)
    if len(branches) < branch:
        raise RuntimeError(f"branch {branch} does not exist ({len(branches)} branch(es) at this gamma)")
    return branches[branch - 1].v0


class ToolHandler:
    def __init__(self, tool_name: str):
        self.name = tool_name

    def get_tool_description(self) -> Tool:
        raise NotImplementedError()

    def run_tool(self, args: dict) -> list[TextContent]:
        raise NotImplementedError()


class ValidateModelToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("validate_model")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description=(
                "Parse a model descriptor and check the reaction terms: G(0) = 0, "
                "finite values on the probe set and analytic derivatives against finite differences."
            ),
            inputSchema=_schema(),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        report = validate_reaction_spec(config.spec)
        return _text({
            "params": config.params.to_dict(),
            "reaction": config.spec.describe(),
            "digest": config.digest,
            "validation": report.to_dict(),
        })


class FastFrontToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("fast_front")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description=(
                "Closed-form fast heteroclinic (u0, p0) at jump level v0, its linearized "
                "eigenvalues, and the jump integral J(v0) with the stability integrals I1, I2, I3."
            ),
            inputSchema=_schema(
                {
                    "v0": {"type": "number", "description": "Slow level at the jump (> -1)"},
                    "xi": {
                        "type": "array",
                        "items": {"type": "number"},
                        "description": "Fast coordinates to sample (default: 21 points on [-5, 5])",
                    },
                },
                required=["v0"],
            ),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        if "v0" not in args:
            raise RuntimeError("v0 argument required")
        v0 = float(args["v0"])
        xi = np.asarray(args.get("xi", np.linspace(-5.0, 5.0, 21)), dtype=float)
        config = _model(args)

        u0, p0 = fast_front_eval(xi, v0)
        jump = jump_integral_J(v0, config.spec)
        return _text({
            "v0": v0,
            "samples": {"xi": xi, "u0": u0, "p0": p0},
            "hamiltonian_defect": float(np.max(np.abs(fast_hamiltonian(xi, v0) - 0.25 * (1.0 + v0) ** 2))),
            "eigenvalues": fast_eigenvalues(v0),
            "J": jump.value,
            "J_truncation_bound": jump.truncation_bound,
            "J_prime": jump_derivative(v0, config.spec),
            "stability_integrals": stability_integrals(v0, config.spec)._asdict(),
        })


class FindBranchesToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("find_branches")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description="Jump levels v0 of all heteroclinic fronts in the super-slow regime (gamma > 0).",
            inputSchema=_schema({
                "v_max": {"type": "number", "description": "Upper end of the search window", "default": 50.0},
            }),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        branches = find_branches(config.params, config.spec, v_max=float(args.get("v_max", 50.0)))
        logger.info(f"find_branches tool: {len(branches)} branch(es)")
        return _text({"gamma": config.params.gamma, "branches": branches})


class FindFoldToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("find_fold")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description="Saddle-node of heteroclinic fronts: gamma_double and the jump level where branches merge.",
            inputSchema=_schema(),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        return _text(find_fold(config.params, config.spec))


class EssentialSpectrumToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("essential_spectrum")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description=(
                "Stability of the background states and, when stable, the essential-spectrum "
                "regime with band edges and the tip lambda(0)."
            ),
            inputSchema=_schema(),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        stable, margins = stability_verdict(config.params, config.spec)
        payload: dict[str, Any] = {"stable": stable, "margins": margins}
        if stable:
            payload["report"] = classify_regime(config.params, config.spec)
        return _text(payload)


class EdgeEigenvalueToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("edge_eigenvalue")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description=(
                "Predicted eigenvalue emerging from the edge of the essential spectrum for a "
                "super-slow front with H = H0 U^2; optionally checked against the direct eigenvalue oracle."
            ),
            inputSchema=_schema({
                "branch": {"type": "integer", "description": "Front branch (1 or 2)", "default": 1},
                "oracle": {
                    "type": "boolean",
                    "description": "Also refine the front and run the discretized eigenvalue problem (slow)",
                    "default": False,
                },
                "N": {"type": "integer", "description": "Oracle grid size", "default": 4096},
            }),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        params, spec = config.params, config.spec
        v0 = _branch_level(config, int(args.get("branch", 1)))
        prediction = lambda_edge_predict(v0, params, spec)
        payload: dict[str, Any] = {"prediction": prediction}

        if args.get("oracle", False):
            front = refine_front_bvp(build_composite_front(v0, params, spec), params, spec)
            ctx = LinearizationContext.build(front, params, spec)
            eigenvalues = discrete_spectrum_oracle(
                ctx, N=int(args.get("N", 4096)), shifts=(prediction.lambda_edge, 0.01),
            )
            payload["oracle"] = eigenvalues
        return _text(payload)


class ClassifyDestabilizationToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("classify_destabilization")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description=(
                "Follow the regular front as gamma decreases: type D (fold of fronts) "
                "or type E (destabilization through the essential spectrum)."
            ),
            inputSchema=_schema({
                "gamma_scan": {
                    "type": "array",
                    "items": {"type": "number"},
                    "description": "Strictly descending positive gamma values (default 1e4 .. 1e-4)",
                },
            }),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        result = classify_destabilization_type(config.spec, config.params, gamma_scan=args.get("gamma_scan"))
        kind = "D" if isinstance(result, TypeD) else "E"
        return _text({"type": kind, "result": result})


class SimulateFrontToolHandler(ToolHandler):
    def __init__(self):
        super().__init__("simulate_front")

    def get_tool_description(self):
        return Tool(
            name=self.name,
            description="Evolve a front in time and report whether it persists, blows up or collapses.",
            inputSchema=_schema({
                "branch": {"type": "integer", "description": "Front branch (1 or 2)", "default": 1},
                "v0": {"type": "number", "description": "Explicit jump level (overrides branch)"},
                "L": {"type": "number", "default": 50.0},
                "N": {"type": "integer", "default": 2048},
                "dt": {"type": "number", "default": 0.01},
                "T_final": {"type": "number", "default": 200.0},
            }),
        )

    def run_tool(self, args: dict) -> list[TextContent]:
        config = _model(args)
        sim = SimConfig(
            L=float(args.get("L", 50.0)),
            N=int(args.get("N", 2048)),
            dt=float(args.get("dt", 0.01)),
            T_final=float(args.get("T_final", 200.0)),
        )
        v0 = float(args["v0"]) if "v0" in args else _branch_level(config, int(args.get("branch", 1)))
        outcome = run_and_classify(sim, config.params, config.spec, v0)
        return _text({"v0": v0, **outcome.summary()})
