"""Tool bindings exposing the simulation pipeline to the agent loop."""

from __future__ import annotations

from .agent import ParamSpec, ToolRegistry, ToolSpec
from .analysis import (render_summary_text, summarize_image_via_vision_model,
                       summarize_pathloss_map)
from .catalog import resolve_location
from .geometry import Point3
from .radiomap import SimulationParams, simulate_radio_environment
from .runstore import RunStore

SIMULATE_TOOL = "simulate_radio_environment"
SUMMARIZE_TOOL = "summarize_pathloss_image"

_SIMULATE_PARAMS = {
    "tx_x": ParamSpec("number", "transmitter x coordinate in meters",
                      required=True),
    "tx_y": ParamSpec("number", "transmitter y coordinate in meters",
                      required=True),
    "tx_z": ParamSpec("number", "transmitter height above ground in meters",
                      required=True),
    "location": ParamSpec("string", "environment name from the catalog",
                          required=True),
    "nx": ParamSpec("integer", "receiver grid columns", default=50),
    "ny": ParamSpec("integer", "receiver grid rows", default=50),
    "LOS": ParamSpec("boolean", "include the direct line-of-sight path",
                     default=True),
    "REF": ParamSpec("boolean", "include single-bounce wall reflections",
                     default=True),
    "GREF": ParamSpec("boolean", "include the ground reflection",
                      default=True),
    "NLOS": ParamSpec("boolean", "include the statistical non-line-of-sight "
                      "model", default=True),
    "BEL": ParamSpec("boolean", "include building entry loss for indoor "
                     "receivers", default=True),
}

_SUMMARIZE_PARAMS = {
    "image_path": ParamSpec("string", "path of a generated pathloss heatmap",
                            required=True),
}


def build_default_registry(store: RunStore,
                           vision_client=None) -> ToolRegistry:
    """Registry with the simulation and heatmap-summary tools.

    The summary tool prefers the measured grids of the run that produced the
    image (deterministic, offline); a vision-capable chat client is only
    consulted for images the store does not know about.
    """

    def run_simulation(args: dict) -> tuple[str, dict]:
        params = SimulationParams(
            tx=Point3(float(args["tx_x"]), float(args["tx_y"]),
                      float(args["tx_z"])),
            location=args["location"],
            nx=args["nx"], ny=args["ny"],
            los=args["LOS"], ref=args["REF"], gref=args["GREF"],
            nlos=args["NLOS"], bel=args["BEL"])
        env = resolve_location(params.location)
        params.validate(env)
        result = simulate_radio_environment(params, env=env)
        record = store.save(result, env)
        covered = result.covered_mask
        n_covered = int(covered.sum())
        if n_covered:
            values = result.pathloss_db[covered]
            stats = (f"{n_covered}/{covered.size} cells covered; pathloss "
                     f"range [{values.min():.1f}, {values.max():.1f}] dB")
        else:
            stats = f"0/{covered.size} cells covered"
        text = (f"Simulation completed successfully. run_id = "
                f"{result.run_id}. The pathloss map was saved at "
                f"{record.heatmap_path} and the dataset at "
                f"{record.dataset_path}. {stats}.")
        return text, {
            "run_id": result.run_id,
            "run_ids": [result.run_id],
            "files": [str(record.dataset_path), str(record.heatmap_path),
                      str(record.metadata_path)],
            "heatmap": str(record.heatmap_path),
            "dataset": str(record.dataset_path),
        }

    def summarize_image(args: dict) -> tuple[str, dict]:
        image_path = args["image_path"]
        record = store.find_by_heatmap_path(image_path)
        if record is not None:
            result = store.load_result(record.run_id)
            summary = render_summary_text(summarize_pathloss_map(result))
            return summary, {"run_ids": [record.run_id]}
        if vision_client is not None:
            return summarize_image_via_vision_model(
                image_path, vision_client), {}
        raise FileNotFoundError(
            f"no stored run produced {image_path!r} and no vision backend "
            "is configured")

    registry = ToolRegistry()
    registry.register(ToolSpec(
        name=SIMULATE_TOOL,
        description=("Run a deterministic radio pathloss simulation over a "
                     "receiver grid in a named environment and save the "
                     "dataset plus heatmap."),
        parameters=_SIMULATE_PARAMS,
        handler=run_simulation))
    registry.register(ToolSpec(
        name=SUMMARIZE_TOOL,
        description=("Produce a concise technical summary of a generated "
                     "pathloss heatmap: value range, strong/weak regions, "
                     "and notable gradients."),
        parameters=_SUMMARIZE_PARAMS,
        handler=summarize_image))
    return registry
