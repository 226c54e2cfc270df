"""Command line driver.

Subcommands: generate-data (synthesize tracking data on the target
interface), optimize (run the identification), check-gradient (finite
difference validation of the assembled gradient), info (build and config
inspection). Exit codes: 0 success, 1 failed validation check, 2 bad usage
or configuration, 3 runtime failure (mesh, solver, input files).
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import optimizer, shapegrad, system
from .assembly import available_backends, backend_name, candidate_pairs
from .config import (ConfigError, check_t_values, initial_polyline,
                     line_search_params_from_config,
                     optimizer_options_from_config, parse_config,
                     problem_from_config, target_polyline)
from .gradcheck import gradient_check
from .io import (read_field_csv, write_design_terms_csv, write_field_csv,
                 write_history_csv, write_interface_csv, write_svg_overlay,
                 write_vtk)
from .linalg import LinAlgError
from .mesh import MeshError, generate_structured, load_msh, save_msh
from .transfer import interpolate

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_FAILURE = 3


def _build_parser():
    p = argparse.ArgumentParser(
        prog="nlshape",
        description="Interface identification constrained by a nonlocal "
                    "convection-diffusion model.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-data",
                       help="mesh the target interface and synthesize tracking data")
    g.add_argument("--config", required=True, help="key=value configuration file")
    g.add_argument("--out", required=True, help="output directory")

    o = sub.add_parser("optimize", help="recover the interface from data")
    o.add_argument("--config", required=True)
    o.add_argument("--data", required=True,
                   help="directory written by generate-data")
    o.add_argument("--out", required=True)

    c = sub.add_parser("check-gradient",
                       help="finite difference validation of the assembled gradient")
    c.add_argument("--config", required=True)
    c.add_argument("--fields", type=int, default=None,
                   help="number of random deformation fields (default from config)")
    c.add_argument("--dump-terms", default=None, metavar="CSV",
                   help="also write the per-term design gradient breakdown")

    i = sub.add_parser("info", help="show build and configuration details")
    i.add_argument("--config", default=None)
    return p


def cmd_generate_data(args):
    c = parse_config(args.config)
    cfg = problem_from_config(c)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    mesh, u_bar = system.generate_data(cfg, target_polyline(c), c["data.n"])
    save_msh(mesh, out / "target_mesh.msh")
    write_field_csv(out / "u_bar.csv", u_bar)
    write_interface_csv(out / "target_interface.csv", mesh.interface_points())
    write_vtk(out / "target_mesh.vtk", mesh, {"u_bar": u_bar})
    dt = time.perf_counter() - t0
    print("data mesh: %d vertices, %d triangles, h_max=%.4g"
          % (mesh.n_vertices, mesh.n_triangles, mesh.h_max))
    print("wrote target_mesh.msh, u_bar.csv, target_interface.csv, "
          "target_mesh.vtk to %s (%.1fs)" % (out, dt))
    return EXIT_OK


def cmd_optimize(args):
    c = parse_config(args.config)
    cfg = problem_from_config(c)
    opts = optimizer_options_from_config(c)
    ls = line_search_params_from_config(c)
    data_dir = Path(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    data_mesh = load_msh(data_dir / "target_mesh.msh")
    data_field = read_field_csv(data_dir / "u_bar.csv")
    if data_field.shape[0] != data_mesh.n_vertices:
        raise MeshError("u_bar.csv length %d does not match the data mesh (%d vertices)"
                        % (data_field.shape[0], data_mesh.n_vertices))

    mesh0 = generate_structured(c["mesh.n"], c["kernel.delta"], initial_polyline(c))
    write_interface_csv(out / "interface_0000.csv", mesh0.interface_points())

    def on_iteration(it, mesh, bundle):
        write_interface_csv(out / ("interface_%04d.csv" % it),
                            mesh.interface_points())

    t0 = time.perf_counter()
    final_mesh, history = optimizer.run(
        cfg, mesh0, data_mesh, data_field, opts=opts, ls_params=ls,
        fine_n=c["mesh.n_fine"] or None,
        coarse_max_iter=c["mesh.coarse_iters"] or None,
        on_iteration=on_iteration)
    dt = time.perf_counter() - t0

    write_history_csv(out / "history.csv", history)
    save_msh(final_mesh, out / "final_mesh.msh")
    write_vtk(out / "final_mesh.vtk", final_mesh)
    write_interface_csv(out / "interface_final.csv", final_mesh.interface_points())
    write_svg_overlay(out / "overlay.svg",
                      target=data_mesh.interface_points(),
                      initial=mesh0.interface_points(),
                      final=final_mesh.interface_points())
    last = history[-1]
    print("finished after %d iterations in %.1fs" % (last.iter, dt))
    print("J = %.6e (tracking %.6e, perimeter %.6e), grad_norm = %.3e"
          % (last.J, last.J_tracking, last.J_perimeter, last.grad_norm))
    print("wrote history.csv, interface_*.csv, final_mesh.msh, final_mesh.vtk, "
          "overlay.svg to %s" % out)
    return EXIT_OK


def cmd_check_gradient(args):
    c = parse_config(args.config)
    cfg = problem_from_config(c)
    n_fields = args.fields if args.fields is not None else c["check.n_fields"]
    if n_fields < 1:
        raise ConfigError("need at least one deformation field")
    ts = check_t_values(c)

    data_mesh, data_field = system.generate_data(cfg, target_polyline(c), c["data.n"])
    mesh = generate_structured(c["mesh.n"], c["kernel.delta"], initial_polyline(c))

    if args.dump_terms:
        pairs = candidate_pairs(mesh, cfg.kernel.delta, cfg.kernel.norm)
        op = system.build_operator(mesh, cfg, pairs=pairs)
        u = system.solve_state(mesh, cfg, operator=op)
        u_bar = interpolate(data_mesh, data_field, mesh)
        v = system.solve_adjoint(mesh, cfg, u, u_bar, operator=op)
        terms = shapegrad.assemble_shape_derivative(mesh, cfg, u, v, u_bar,
                                                    pairs=pairs, split=True)
        write_design_terms_csv(args.dump_terms, mesh, terms)
        print("wrote %s" % args.dump_terms)

    reports = gradient_check(mesh, cfg, data_mesh, data_field,
                             n_fields=n_fields, t_values=ts, seed=c["rng.seed"])
    ok = True
    for i, rep in enumerate(reports):
        print("field %d: DJ[V] = %.8e" % (i, rep.gv))
        for t, fd, err in zip(rep.t_values, rep.fd, rep.errors):
            rel = rep.rel_error_at[float(t)]
            print("  t=%9.3e  fd=%.8e  abs_err=%.3e  rel_err=%.3e"
                  % (t, fd, err, rel))
        if rep.below_floor:
            print("  all differences below the %.0e floor" % 1e-10)
        else:
            print("  order = %.3f" % rep.order)
        passed = rep.passed(0.9)
        ok = ok and passed
        print("  %s" % ("ok" if passed else "FAILED (order < 0.9)"))
    print("gradient check: %s" % ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_info(args):
    from . import __version__

    print("nlshape %s" % __version__)
    print("assembly backends: %s (default %s)"
          % (", ".join(available_backends()), backend_name()))
    if args.config:
        c = parse_config(args.config)
        print("configuration %s:" % args.config)
        for key in sorted(c):
            print("  %s = %s" % (key, c[key]))
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "generate-data":
            return cmd_generate_data(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        if args.command == "check-gradient":
            return cmd_check_gradient(args)
        if args.command == "info":
            return cmd_info(args)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (MeshError, LinAlgError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
