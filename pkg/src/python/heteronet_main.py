#!/usr/bin/env python3
"""
HETERONET - Return maps and switching near a heteroclinic network
=================================================================

Main program of the heteronet laboratory.

Each subcommand reads a run configuration, runs one family of checks on the
return-map model or its ODE backend, and writes CSV/JSON artifacts together
with an index.json of content digests.

Exit codes: 0 all requested checks pass, 1 a check failed, 2 configuration
error, 3 internal error.
"""

import sys
import argparse
import itertools
import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

# Support both relative imports (when imported as module) and absolute imports (when run as script)
try:
    from . import __version__
    from .core.constants import (
        DEFAULT_GRID,
        DEFAULT_LOCAL_SAMPLES,
        DEFAULT_N_RANGE,
        EQUILIBRIUM_RESIDUAL,
        HET_DEFECT_TOL,
        HET_FIRST_ORDER_TOL,
        ROUND_TRIP_TOL,
        TWO_PI,
        XI_DELTA_IDENTITY_RTOL,
    )
    from .core.errors import ConfigError, HeteronetError, NoCrossing, NTooSmall, RefinementFailure
    from .core.model import validate_hypotheses, xi_delta_identity_residual
    from .core.sections import SectionId, SectionPoint
    from .file_io.input_parser import InputParser, RunConfig
    from .file_io.output_writer import OutputWriter
    from .models import flow, geometry, horseshoe
    from .models.return_map import flight_time, g_closed, g_composed, return_map
    from .utils.utilities import log_grid, make_rng
except ImportError:
    # Fallback for direct execution
    __version__ = '1.0.0'
    from core.constants import (
        DEFAULT_GRID,
        DEFAULT_LOCAL_SAMPLES,
        DEFAULT_N_RANGE,
        EQUILIBRIUM_RESIDUAL,
        HET_DEFECT_TOL,
        HET_FIRST_ORDER_TOL,
        ROUND_TRIP_TOL,
        TWO_PI,
        XI_DELTA_IDENTITY_RTOL,
    )
    from core.errors import ConfigError, HeteronetError, NoCrossing, NTooSmall, RefinementFailure
    from core.model import validate_hypotheses, xi_delta_identity_residual
    from core.sections import SectionId, SectionPoint
    from file_io.input_parser import InputParser, RunConfig
    from file_io.output_writer import OutputWriter
    from models import flow, geometry, horseshoe
    from models.return_map import flight_time, g_closed, g_composed, return_map
    from utils.utilities import log_grid, make_rng


COMMANDS = ("validate", "return-map", "spirals", "connections", "horseshoe", "switch", "flow")
SCENARIOS = ("amplitude", "het-shoot", "compare-local", "orbit")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def parse_word(text: str) -> Tuple[int, ...]:
    """'121' or '1,2,1' -> (1, 2, 1)"""
    cleaned = text.replace(",", "").replace(" ", "")
    if not cleaned or any(ch not in "12" for ch in cleaned):
        raise ConfigError(f"a word is a string of the symbols 1 and 2, got {text!r}")
    return tuple(int(ch) for ch in cleaned)


def _n_values(n_range: Sequence[int]) -> List[int]:
    if len(n_range) != 2 or n_range[0] > n_range[1]:
        raise ConfigError(f"n_range must be [lo, hi] with lo <= hi, got {n_range}")
    return list(range(int(n_range[0]), int(n_range[1]) + 1))


class HeteroNet:
    """Main class running one heteronet command from a run configuration"""

    def __init__(self, config_file: str = None, output_dir: str = None, seed: int = None,
                 tol: float = None, plot_bundle: bool = False, debug: bool = False):
        """
        Initialize with an optional config file and command-line overrides.

        Args:
            config_file: Path to a JSON/YAML run configuration (preset if None)
            output_dir: Overrides output_dir of the config
            seed: Overrides seed
            tol: Overrides tol
            plot_bundle: Also zip the artifacts
            debug: Log at DEBUG level
        """
        self.input_parser = InputParser()
        self.config_file = config_file
        self.overrides = {"output_dir": output_dir, "seed": seed, "tol": tol}
        self.plot_bundle = plot_bundle
        self.log_level = logging.DEBUG if debug else logging.INFO
        self.start_time = datetime.now()
        self.config: Optional[RunConfig] = None
        self.output_writer: Optional[OutputWriter] = None
        self.logger = logging.getLogger('HeteroNet')

    def _setup_logging(self, output_dir: Path):
        """Configure logging for the application"""
        output_dir.mkdir(parents=True, exist_ok=True)
        log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        logging.basicConfig(
            level=self.log_level,
            format=log_format,
            handlers=[
                logging.FileHandler(output_dir / 'heteronet.log'),
                logging.StreamHandler(sys.stdout)
            ]
        )
        # basicConfig leaves an already configured root logger alone
        logging.getLogger().setLevel(self.log_level)

    def load_config(self) -> RunConfig:
        if self.config_file:
            config = self.input_parser.read_input(self.config_file)
        else:
            config = self.input_parser.get_default_config()
        if self.overrides["output_dir"] is not None:
            config.output_dir = str(self.overrides["output_dir"])
        if self.overrides["seed"] is not None:
            config.seed = int(self.overrides["seed"])
        if self.overrides["tol"] is not None:
            config.tol = float(self.overrides["tol"])
        return config

    def run(self, command: str, options: Dict[str, Any] = None) -> int:
        """
        Run one command.

        Args:
            command: One of COMMANDS
            options: Command options overriding the config's options block

        Returns:
            Exit code
        """
        try:
            self.config = self.load_config()
        except (ConfigError, FileNotFoundError) as e:
            self._setup_logging(Path(self.overrides["output_dir"] or "output"))
            self.logger.error(f"Configuration error: {e}")
            return EXIT_CONFIG

        self._setup_logging(Path(self.config.output_dir))
        self.logger.info(f"heteronet {__version__}: {command}")
        self.logger.info(f"Run started at: {self.start_time}")

        if command not in COMMANDS:
            self.logger.error(f"Unknown command: {command}")
            return EXIT_CONFIG
        opts = self.config.command_options(command)
        opts.update({k: v for k, v in (options or {}).items() if v is not None})

        self.output_writer = OutputWriter(self.config.output_dir)
        self.output_writer.write_config(self.config.to_dict())
        handler = getattr(self, "cmd_" + command.replace("-", "_"))
        try:
            passed, summary = handler(opts)
        except ConfigError as e:
            self.logger.error(f"Configuration error: {e}")
            return EXIT_CONFIG
        except HeteronetError as e:
            self.logger.error(f"Check failed: {e}")
            passed, summary = False, {"error": str(e)}
        except Exception as e:
            self.logger.error(f"Error during execution: {e}", exc_info=True)
            return EXIT_INTERNAL

        self.output_writer.write_index(command, passed, summary)
        if self.plot_bundle:
            self.output_writer.bundle()
        self.logger.info(f"{command}: {'pass' if passed else 'FAIL'}")
        self.logger.info(f"Total runtime: {datetime.now() - self.start_time}")
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    def cmd_validate(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """Hypotheses, parameter ranges and flow coefficient conditions"""
        model = self.config.model
        report = validate_hypotheses(model, self.config.diophantine or None)
        flow_problems = self.config.flow.condition_violations()
        try:
            residual = xi_delta_identity_residual(model)
        except HeteronetError:
            residual = math.nan
        result = {
            "model": report.to_dict(),
            "flow": {"pass": not flow_problems, "violations": flow_problems},
            "xi_delta_identity_residual": residual,
        }
        passed = report.passed and not flow_problems and residual <= XI_DELTA_IDENTITY_RTOL
        result["pass"] = passed
        print(json.dumps(result, indent=2, sort_keys=True))
        self.output_writer.write_json("validation.json", result)
        return passed, {"hypotheses_pass": report.passed, "flow_pass": not flow_problems}

    def cmd_return_map(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """Closed-form G against the explicit composition, and one application of R_gamma"""
        model = self.config.model
        gamma = float(opts.get("gamma", model.gamma))
        count = int(opts.get("samples", 256))
        rng = make_rng(self.config.seed)
        gaps = log_grid(1e-12 * model.eps, model.eps, count)
        angles = rng.uniform(0.0, TWO_PI, size=(count, 2))

        rows = []
        for gap, (phi1, phi2) in zip(gaps, angles):
            p = SectionPoint.from_gap(SectionId.SIGMA1_IN, float(gap), float(phi1), float(phi2))
            closed = g_closed(p, model)
            composed = g_composed(p, model)
            discrepancy = max(
                abs(closed.manifold_distance - composed.manifold_distance) / closed.manifold_distance,
                abs(closed.phi1 - composed.phi1),
                abs(closed.phi2 - composed.phi2),
            )
            outcome = return_map(p, gamma, model)
            image = outcome.point
            rows.append({
                "gap_in": p.manifold_distance, "phi1_in": p.phi1, "phi2_in": p.phi2,
                "gap_out": closed.manifold_distance, "phi1_out": closed.phi1, "phi2_out": closed.phi2,
                "discrepancy": discrepancy, "flight_time": flight_time(p, model),
                "symbol": outcome.symbol if outcome.symbol is not None else 0,
                "escaped": outcome.escaped,
                "gap_image": image.manifold_distance if image is not None else math.nan,
                "phi1_image": image.phi1 if image is not None else math.nan,
                "phi2_image": image.phi2 if image is not None else math.nan,
            })
        frame = pd.DataFrame(rows)
        self.output_writer.write_csv("return_map.csv", frame)
        worst = float(frame["discrepancy"].max())
        summary = {
            "samples": count,
            "gamma": gamma,
            "max_discrepancy": worst,
            "escaped": int(frame["escaped"].sum()),
            "symbol_counts": {str(s): int((frame["symbol"] == s).sum()) for s in (1, 2)},
        }
        self.output_writer.write_json("return_map_summary.json", summary)
        return worst <= ROUND_TRIP_TOL, summary

    def cmd_spirals(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """Spiralling image and preimage sheets, and the scrolls of the out-regions"""
        model = self.config.model
        name = opts.get("profile", "quadratic")
        if name not in geometry.PROFILES:
            raise ConfigError(f"unknown profile {name!r}; choose from {sorted(geometry.PROFILES)}")
        profile = geometry.PROFILES[name]()
        slices = int(opts.get("slices", 16))
        n_gaps = int(opts.get("gaps", 400))

        image = geometry.sheet_image(profile, geometry.SheetGrid.default(n_slices=slices, n_gaps=n_gaps), model)
        preimage = geometry.sheet_preimage(
            profile, geometry.SheetGrid.default(n_slices=slices, gap_min=1e-300, n_gaps=2 * n_gaps), model
        )
        scrolls = {i: geometry.scroll_check(i, model, n_rays=int(opts.get("rays", 8))) for i in (1, 2)}
        limits = geometry.claim_limits(profile, model)
        eta = geometry.eta_monotone(profile, model)
        if not limits.passed:
            self.logger.info("Upsilon limits not yet within 1e-2 at the last gap; "
                             "the error decays like (1 - r2)^(1/delta)")
        self.output_writer.write_csv("sheet_image.csv", image.frame)
        self.output_writer.write_csv("sheet_preimage.csv", preimage.frame)

        def verdict_row(v):
            return {"is_spiral": v.is_spiral, "theta_range": v.theta_range, "limit_h": v.limit_h,
                    "reason": v.reason}

        summary = {
            "profile": profile.name,
            "image": {"pass": image.passed, "slices": [verdict_row(v) for v in image.verdicts]},
            "preimage": {"pass": preimage.passed, "slices": [verdict_row(v) for v in preimage.verdicts]},
            "scrolls": {str(i): {"is_scroll": s.is_scroll, "interlaced": s.interlaced,
                                 "rays": s.rays_checked} for i, s in scrolls.items()},
            "limits": {"gaps": limits.gaps, "log_derivative_error": limits.log_derivative_error,
                       "phi2_derivative": limits.phi2_derivative, "coefficient": limits.coefficient,
                       "monotone": limits.monotone, "below_threshold": limits.passed},
            "eta_monotone": eta,
        }
        self.output_writer.write_json("spirals.json", summary)
        passed = (image.passed and preimage.passed and all(s.is_scroll for s in scrolls.values())
                  and limits.monotone and eta)
        return passed, {"image": image.passed, "preimage": preimage.passed,
                        "scrolls": all(s.is_scroll for s in scrolls.values())}

    def cmd_connections(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """Subsidiary connections from W^u(C2) to W^s(C1), two per shell"""
        model = self.config.model
        gamma = float(opts.get("gamma", model.gamma))
        ns = _n_values(opts.get("n_range", DEFAULT_N_RANGE))
        curves = geometry.find_connections(gamma, ns, model, sheet=int(opts.get("sheet", 1)),
                                           n_rays=int(opts.get("rays", 32)))
        if curves:
            self.output_writer.write_csv("connections.csv", pd.concat([c.to_frame() for c in curves],
                                                                      ignore_index=True))
        counts = {str(n): sum(1 for c in curves if c.n == n) for n in ns}
        summary: Dict[str, Any] = {"gamma": gamma, "counts": counts}
        try:
            ratio, maxima = geometry.connection_decay(curves)
            summary["decay_ratio"] = ratio
            summary["max_gaps"] = maxima.tolist()
        except HeteronetError as e:
            summary["decay_ratio"] = None
            summary["message"] = str(e)
        self.output_writer.write_json("connections.json", summary)
        passed = all(v == 2 for v in counts.values()) and (summary["decay_ratio"] or 1.0) < 1.0
        return passed, summary

    def cmd_horseshoe(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """Conley-Moser conditions per shell, the nu_h regression and the Lambda_N cover"""
        model = self.config.model
        gamma = float(opts.get("gamma", model.gamma))
        ns = _n_values(opts.get("n_range", (6, 11)))
        grid = int(opts.get("grid", DEFAULT_GRID))

        reports, problems = [], []
        for n in tqdm(ns, desc="shells", disable=len(ns) < 2):
            try:
                reports.append(horseshoe.verify_conley_moser(n, gamma, model, grid))
            except NTooSmall as e:
                problems.append(str(e))
                self.logger.error(f"Shell N={n}: {e}")
        for report in reports:
            for line in report.diagnostics:
                self.logger.error(f"Shell N={report.n}: {line}")
        self.output_writer.write_json("conley_moser.json", [r.to_dict() for r in reports])

        summary: Dict[str, Any] = {
            "gamma": gamma,
            "passed": {str(r.n): r.passed for r in reports},
            "problems": problems,
        }
        passed = bool(reports) and not problems and all(r.passed for r in reports)
        if sum(r.passed for r in reports) >= 2:
            regression = horseshoe.nu_regression(reports, model)
            summary["nu_regression"] = {"slope": regression.slope, "expected": regression.expected,
                                        "relative_error": regression.relative_error,
                                        "within": regression.within}
            passed = passed and regression.within

        depth = int(opts.get("cover_depth", 0))
        if passed and depth > 0:
            cover = horseshoe.lambda_cover(ns[0], gamma, depth, model, grid=grid, progress=True)
            self.output_writer.write_csv("lambda_cover.csv", cover.to_frame())
            summary["cover"] = {"n": cover.n, "contents": cover.contents,
                                "content_ratios": cover.content_ratios,
                                "box_counting_exponent": cover.box_counting_exponent(),
                                "exhausted": cover.exhausted, "message": cover.message}
            passed = passed and cover.decreasing and not cover.exhausted
        if opts.get("relate") and len(ns) >= 2:
            # evidence only, never part of the verdict
            relation = horseshoe.heteroclinic_relation(ns[0], ns[1], gamma, model)
            summary["relation"] = {"n": relation.n, "m": relation.m, "related": relation.related,
                                   "experimental": relation.experimental, "messages": relation.messages}
        self.output_writer.write_json("horseshoe_summary.json", summary)
        return passed, summary

    def cmd_switch(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """Realize words (or all words of a length) and verify their itineraries"""
        model = self.config.model
        gamma = float(opts.get("gamma", model.gamma))
        n = int(opts.get("n", 6))
        past = parse_word(opts["past"]) if opts.get("past") else ()
        if opts.get("all_words"):
            words = list(itertools.product((1, 2), repeat=int(opts["all_words"])))
        elif opts.get("word"):
            words = [parse_word(str(opts["word"]))]
        else:
            raise ConfigError("switch needs a word or all_words")

        frames, results = [], []
        for word in tqdm(words, desc="words", disable=len(words) < 2):
            label = "".join(map(str, past)) + "." + "".join(map(str, word))
            try:
                if past:
                    realized = horseshoe.realize_bi_word(past, word, n, gamma, model)
                else:
                    realized = horseshoe.realize_word(word, n, gamma, model)
            except RefinementFailure as e:
                self.logger.error(f"Word {label}: {e}")
                results.append({"word": label, "verified": False, "chain_verified": False, "depth": e.depth,
                                "message": str(e)})
                continue
            frame = realized.to_frame()
            frame.insert(0, "word", label)
            frames.append(frame)
            results.append({
                "word": label,
                "verified": realized.verified,
                "chain_verified": realized.chain_verified,
                "orbit_depth": realized.orbit_depth,
                "itinerary": realized.itinerary.symbols,
                "backward_itinerary": realized.backward.symbols,
                "forward_symbols": realized.forward_symbols,
                "backward_symbols": realized.backward_symbols,
                "forward_residual": realized.forward_residual,
                "backward_residual": realized.backward_residual,
                "box_diameter": realized.box_diameter,
            })
        if frames:
            self.output_writer.write_csv("switch_points.csv", pd.concat(frames, ignore_index=True))
        self.output_writer.write_json("switch.json", results)
        verified = sum(1 for r in results if r["verified"])
        chained = sum(1 for r in results if r["chain_verified"])
        if chained > verified:
            self.logger.warning(f"{chained - verified} words are carried by their verified chain "
                                f"beyond the reach of a single floating-point orbit")
        summary = {"n": n, "gamma": gamma, "words": len(words), "verified": verified, "chain_verified": chained}
        return chained == len(words), summary

    def cmd_flow(self, opts: Dict[str, Any]) -> Tuple[bool, Dict]:
        """ODE scenarios: amplitude equilibria, Het shooting, local-map oracle, sample orbit"""
        scenario = opts.get("scenario", "amplitude")
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown flow scenario {scenario!r}; choose from {list(SCENARIOS)}")
        c = self.config.flow
        tol = self.config.tol

        if scenario == "amplitude":
            equilibria = flow.amplitude_equilibria(c)
            data = equilibria.to_dict()
            try:
                data["het_curve"] = vars(flow.het_curve(c.mu1, c))
            except HeteronetError as e:
                data["het_curve"] = {"message": str(e)}
            self.output_writer.write_json("amplitude_equilibria.json", data)
            passed = all(e.residual <= EQUILIBRIUM_RESIDUAL for e in equilibria.equilibria)
            return passed, {"equilibria": [e.kind for e in equilibria.equilibria]}

        if scenario == "het-shoot":
            shot = flow.shoot_het(c, tol=tol)
            self.output_writer.write_json("het_shoot.json", shot.to_dict())
            passed = (shot.converged and abs(shot.defect) < HET_DEFECT_TOL
                      and abs(shot.mu2 - shot.mu2_first_order) < HET_FIRST_ORDER_TOL)
            return passed, shot.to_dict()

        if scenario == "compare-local":
            samples = int(opts.get("samples", DEFAULT_LOCAL_SAMPLES))
            nodes = [int(opts["node"])] if opts.get("node") is not None else [0, 1, 2]
            reports = [flow.compare_local(node, samples, self.config.model, tol, seed=self.config.seed,
                                          progress=True) for node in nodes]
            self.output_writer.write_json("compare_local.json", [r.to_dict() for r in reports])
            return all(r.passed for r in reports), {"nodes": nodes, "pass": [r.passed for r in reports]}

        # orbit: a sample trajectory of the (possibly perturbed) truncated system
        gamma = float(opts.get("gamma", 0.0))
        t_end = float(opts.get("t_end", 2e4))
        r1 = 0.5 * math.sqrt(-c.mu1 / c.p11) if -c.mu1 / c.p11 > 0 else 0.1
        r2 = 0.5 * math.sqrt(-c.mu2 / c.p22) if -c.mu2 / c.p22 > 0 else 0.1
        H = (lambda a, b: a * b**6, lambda a, b: b * a**6, None, None)
        traj = flow.integrate_hopf([r1, r2, 0.0, 0.0], c, (0.0, t_end), gamma=gamma, H=H, tol=tol)
        self.output_writer.write_trajectory("orbit", traj)
        try:
            level = r1
            crossings = flow.poincare_cross(
                traj, lambda y: flow.radial_pair(y, traj.coordinates)[0] - level, direction=1
            )
        except NoCrossing:
            crossings = []
        summary = {"coordinates": traj.coordinates, "steps": int(traj.t.size), "method": traj.method,
                   "crossings": [{"t": x.t, "state": x.state} for x in crossings]}
        self.output_writer.write_json("orbit_summary.json", summary)
        return True, {"coordinates": traj.coordinates, "crossings": len(crossings)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='HETERONET - return maps, horseshoes and switching near a heteroclinic network'
    )
    parser.add_argument('--config', help='Run configuration (.json/.yaml); the shipped preset if omitted')
    parser.add_argument('--out', help='Output directory')
    parser.add_argument('--seed', type=int, help='Random seed')
    parser.add_argument('--tol', type=float, help='Integrator tolerance')
    parser.add_argument('--plot-bundle', action='store_true', help='Zip all artifacts for plotting')
    parser.add_argument('--version', action='version', version=f'heteronet {__version__}')
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('validate', help='Check hypotheses and parameter ranges')

    p = sub.add_parser('return-map', help='Closed-form vs composed half-return and R_gamma images')
    p.add_argument('--gamma', type=float)
    p.add_argument('--samples', type=int)

    p = sub.add_parser('spirals', help='Spiralling sheets and scrolls')
    p.add_argument('--profile', choices=sorted(geometry.PROFILES))

    p = sub.add_parser('connections', help='Subsidiary heteroclinic connections per shell')
    p.add_argument('--gamma', type=float)
    p.add_argument('--n-range', type=int, nargs=2, metavar=('LO', 'HI'))

    p = sub.add_parser('horseshoe', help='Conley-Moser conditions and the nu_h regression')
    p.add_argument('--gamma', type=float)
    p.add_argument('--n-range', type=int, nargs=2, metavar=('LO', 'HI'))
    p.add_argument('--grid', type=int)
    p.add_argument('--cover-depth', type=int)

    p = sub.add_parser('switch', help='Realize itineraries')
    p.add_argument('--gamma', type=float)
    p.add_argument('--n', type=int)
    group = p.add_mutually_exclusive_group()
    group.add_argument('--word', help='Word over {1,2}, e.g. 1211')
    group.add_argument('--all-words', type=int, metavar='L', help='Realize all 2^L words of length L')
    p.add_argument('--past', help='Past symbols for a two-sided word')

    p = sub.add_parser('flow', help='ODE backend scenarios')
    p.add_argument('--scenario', choices=SCENARIOS)
    p.add_argument('--samples', type=int)
    p.add_argument('--t-end', type=float)
    p.add_argument('--gamma', type=float)
    return parser


def main(argv: Sequence[str] = None) -> int:
    """Command-line entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    options = {}
    for key in ("gamma", "samples", "profile", "grid", "cover_depth", "n", "word", "all_words",
                "past", "scenario", "t_end"):
        if getattr(args, key, None) is not None:
            options[key] = getattr(args, key)
    if getattr(args, "n_range", None) is not None:
        options["n_range"] = list(args.n_range)

    app = HeteroNet(args.config, output_dir=args.out, seed=args.seed, tol=args.tol,
                    plot_bundle=args.plot_bundle, debug=args.debug)
    return app.run(args.command, options)


if __name__ == '__main__':
    sys.exit(main())
