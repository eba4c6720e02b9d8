import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence, Union

import config
from compatibility import DefectDensity, burgers_circuit, dislocation_loop, finite_compatibility_residual, \
    impulse_defect_cochain, strain_incompatibility
from errors import CosseratError, VerificationFailure
from forms import BodyGrid, Chain, covariant_d, sample, to_motor, wedge
from io_export import read_vertex_csv, write_form, write_json, write_manifest
from kinematics import Configuration, DisplacementField, finite_strain, infinitesimal_strain, moving_frames_strain
from mechanics import LoadState
from presets import get_configuration_preset, get_displacement_preset
from run_config import FieldSpec, RunConfig, load_run_config
from solver import ElastostaticsProblem, assemble, l2_error, manufactured_loads, mms_verify, recover_stress, solve
from verification import run_suite

# Configure logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=config.LOG_LEVEL
)

logger = logging.getLogger(__name__)


def load_field(spec: FieldSpec, grid: BodyGrid, seed: int) -> Union[Configuration, DisplacementField]:
    """
    Input field of a run: a configuration (y, psi) or a displacement (u, phi)

    CSV columns v1..v3 hold y or u, columns v4..v6 the rotation vector psi
    or the microrotation phi.
    """
    if spec.kind == "configuration":
        if spec.csv:
            values = read_vertex_csv(spec.csv, grid)
            return Configuration.from_rotation_vectors(grid, values[..., :3], values[..., 3:])
        return get_configuration_preset(spec.preset, seed).configuration(grid)
    if spec.csv:
        return DisplacementField.from_values(grid, read_vertex_csv(spec.csv, grid))
    return get_displacement_preset(spec.preset, seed).field(grid)


def _finish(run: RunConfig, command: str, grid: Optional[BodyGrid], files: List[str],
            report: Dict[str, object]) -> List[str]:
    files.append(write_json(os.path.join(run.output_dir, f"{command}_report.json"), report))
    inputs = {"command": command, "config": run.as_dict(), "source": run.source}
    write_manifest(os.path.join(run.output_dir, f"{command}_manifest.json"), inputs, grid, files)
    logger.info(f"{command}: wrote {len(files)} files to {run.output_dir}")
    return files


def cmd_strain(run: RunConfig) -> List[str]:
    """Finite strain of a configuration or infinitesimal strain of a displacement"""
    grid = run.grid.build()
    options = run.strain
    source = load_field(options.input_field, grid, run.seed)
    if isinstance(source, Configuration):
        strain = moving_frames_strain(source) if options.method == "moving_frames" else finite_strain(source)
    else:
        strain = infinitesimal_strain(source).as_form()
    if options.cochain:
        strain = sample(strain)
    files = write_form(run.output_dir, "strain", strain)
    report = {
        "kind": options.input_field.kind,
        "method": options.method if isinstance(source, Configuration) else "linear",
        "representation": strain.representation,
        "max_abs": strain.max_abs(),
    }
    return _finish(run, "strain", grid, files, report)


def _burgers_chains(run: RunConfig, grid: BodyGrid):
    options = run.compat.burgers
    if options.loop is not None:
        return (Chain.from_cells(grid, [tuple(c) for c in options.loop]),
                Chain.from_cells(grid, [tuple(c) for c in options.cap]))
    return dislocation_loop(grid, run.compat.input_field.defect_at, options.k, options.radius)


def cmd_compat(run: RunConfig) -> List[str]:
    """Defect densities of the input strain and an optional Burgers circuit"""
    grid = run.grid.build()
    spec = run.compat.input_field
    report: Dict[str, object] = {"kind": spec.kind}
    if spec.kind == "impulse":
        strain = impulse_defect_cochain(grid, spec.burgers, spec.defect_at)
        defect = covariant_d(strain)
    elif spec.kind == "configuration":
        strain = finite_strain(load_field(spec, grid, run.seed))
        defect = covariant_d(strain) + to_motor(wedge(strain, strain))
        report["finite_residual"] = finite_compatibility_residual(strain)
    else:
        strain = infinitesimal_strain(load_field(spec, grid, run.seed)).as_form()
        defect = strain_incompatibility(strain).as_form()
    report["defect_max_abs"] = defect.max_abs()
    if not defect.is_cochain:
        density = DefectDensity.from_form(defect)
        report["dislocation_max_abs"] = float(abs(density.T).max())
        report["disclination_max_abs"] = float(abs(density.Omega).max())
    files = write_form(run.output_dir, "defect_density", defect)
    if run.compat.burgers is not None:
        report["burgers"] = burgers_circuit(strain, *_burgers_chains(run, grid)).as_dict()
    return _finish(run, "compat", grid, files, report)


def cmd_solve(run: RunConfig) -> List[str]:
    """Linear elastostatics with Dirichlet data from a preset; optional manufactured-solution study"""
    C = run.load_stiffness()
    grid = run.grid.build()
    options = run.solve
    preset = get_displacement_preset(options.preset, run.seed)
    exact = preset.field(grid)
    loads = manufactured_loads(C, preset, grid) if options.loads == "manufactured" else LoadState.zeros(grid)
    solution, solve_report = solve(assemble(ElastostaticsProblem(grid, C, loads, exact)), options.method)
    stress = recover_stress(C, solution)
    files = write_form(run.output_dir, "displacement", solution.as_form())
    files += write_form(run.output_dir, "stress", stress.as_form())
    report: Dict[str, object] = {
        "material": C.symmetry,
        "pd_margin": C.pd_margin,
        "loads": options.loads,
        "solve": solve_report.as_dict(),
    }
    if options.loads == "manufactured":
        report["l2_error"] = l2_error(solution, exact.values())
    if options.mms_sizes:
        report["mms"] = mms_verify(C, preset, options.mms_sizes, options.method).as_dict()
    return _finish(run, "solve", grid, files, report)


def cmd_verify(run: RunConfig, coad: Optional[Callable] = None) -> List[str]:
    """
    Run the property suites at the configured level

    Raises:
        VerificationFailure: if any check fails; the report is written first
    """
    results = run_suite(run.level, run.seed, coad, run.verify.samples, run.verify.grids)
    failed = [r.name for r in results if not r.passed]
    report = {
        "level": run.level,
        "seed": run.seed,
        "passed": not failed,
        "checks": [r.as_dict() for r in results],
    }
    files = _finish(run, "verify", None, [], report)
    if failed:
        raise VerificationFailure(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
    logger.info(f"All {len(results)} checks passed")
    return files


COMMANDS: Dict[str, Callable[[RunConfig], List[str]]] = {
    "strain": cmd_strain,
    "compat": cmd_compat,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    """Global flags are accepted before or after the subcommand"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON run document")
    common.add_argument("--output-dir", default=argparse.SUPPRESS, help="directory for fields, reports and manifest")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (recorded in the manifest)")
    common.add_argument("--level", choices=("quick", "full"), default=argparse.SUPPRESS, help="verification size")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed of the randomized checks")

    parser = argparse.ArgumentParser(prog="cosserat", description="Geometric micropolar mechanics",
                                     parents=[common])
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("strain", parents=[common], help="strain of a configuration or displacement")
    subparsers.add_parser("compat", parents=[common], help="defect densities and Burgers circuits")
    subparsers.add_parser("solve", parents=[common], help="linear elastostatics")
    subparsers.add_parser("verify", parents=[common], help="property suites")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and map errors to exit codes"""
    args = build_parser().parse_args(argv)
    try:
        run = load_run_config(args.config) if hasattr(args, "config") else RunConfig()
        run.override(getattr(args, "output_dir", None), getattr(args, "threads", None),
                     getattr(args, "level", None), getattr(args, "seed", None))
        logger.info(f"Running {args.command} with level {run.level}, seed {run.seed}, threads {run.threads}")
        COMMANDS[args.command](run)
    except CosseratError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
