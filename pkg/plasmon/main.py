"""Riga di comando: spectrum, scatter, scan, drude, verify.

Esempi:
    python -m plasmon.main spectrum --config configs/resonance.json --out out/spectrum.csv
    python -m plasmon.main scatter --config configs/cloaking.json --grid "z=0:x[-3,3,121]:y[-3,3,121]"
    python -m plasmon.main scan --config configs/resonance.json --mode resonance --threads 8
    python -m plasmon.main drude --forward --preset resonance_1
    python -m plasmon.main verify --level full

Codici di uscita: 0 ok, 1 configurazione, 2 fisica non ammissibile, 3 verifica fallita.
"""
from __future__ import annotations

import argparse
import sys

from dotenv import load_dotenv

from plasmon.errors import ConfigError, InadmissibleConfig, NearPole, PlasmonError, Unreachable

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PHYSICS = 2
EXIT_VERIFY = 3


def _complex_pair(text: str) -> tuple[float, float]:
    """"re,im" oppure "re"."""
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return float(parts[0]), 0.0
        if len(parts) == 2:
            return float(parts[0]), float(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"numero complesso non valido: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="RunConfig JSON")
    common.add_argument("--out", default=None, help="file di uscita (.csv o .json)")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)

    parser = argparse.ArgumentParser(prog="plasmon", description="Spettro e campi di un'inclusione plasmonica sferica")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="tabella degli autovalori tau per grado")
    sp.add_argument("--n-max", type=int, default=None)

    sc = sub.add_parser("scatter", parents=[common], help="campo totale su una griglia")
    sc.add_argument("--grid", default=None, help='es. "z=0:x[-3,3,121]:y[-3,3,121]"')
    sc.add_argument("--n-max", type=int, default=None)

    sn = sub.add_parser("scan", parents=[common], help="scansione dei parametri del materiale")
    sn.add_argument("--mode", choices=("resonance", "cloaking"), default=None)

    dr = sub.add_parser("drude", parents=[common], help="modello di Drude diretto/inverso")
    way = dr.add_mutually_exclusive_group(required=True)
    way.add_argument("--forward", action="store_true")
    way.add_argument("--inverse", action="store_true")
    dr.add_argument("--preset", choices=("resonance_1", "resonance_2", "cloaking_1", "cloaking_2"), default=None)
    dr.add_argument("--omega", type=float, default=5.0)
    dr.add_argument("--omega-p-sq", type=float, default=None)
    dr.add_argument("--tau-damp", type=float, default=1e-4)
    dr.add_argument("--omega0", type=float, default=2.0)
    dr.add_argument("--filling", type=float, default=0.0)
    dr.add_argument("--eps-c", type=_complex_pair, default=None, help='"re,im"')
    dr.add_argument("--mu-c", type=_complex_pair, default=(1.0, 0.0), help='"re,im"')

    vf = sub.add_parser("verify", parents=[common], help="identita' e oracoli di quadratura")
    vf.add_argument("--level", choices=("quick", "full"), default="quick")
    vf.add_argument("--inject-fault", action="store_true", help="corrompe le tabelle di Hankel (test negativo)")
    return parser


def run(args: argparse.Namespace) -> int:
    # import tardivi: le costanti PLASMON_* si leggono dopo load_dotenv
    if args.command == "spectrum":
        from plasmon.flows.run_spectrum import spectrum_flow

        spectrum_flow(args.config, n_max=args.n_max, out=args.out, threads=args.threads, seed=args.seed)
        return EXIT_OK

    if args.command == "scatter":
        from plasmon.flows.run_scatter import DEFAULT_GRID, scatter_flow

        scatter_flow(args.config, grid=args.grid or DEFAULT_GRID, n_max=args.n_max, out=args.out,
                     threads=args.threads, seed=args.seed)
        return EXIT_OK

    if args.command == "scan":
        from plasmon.flows.run_scan import scan_flow

        scan_flow(args.config, mode=args.mode, out=args.out, threads=args.threads, seed=args.seed)
        return EXIT_OK

    if args.command == "drude":
        from plasmon.flows.run_drude import drude_flow

        drude_flow(
            direction="forward" if args.forward else "inverse",
            preset=args.preset, omega=args.omega, omega_p_sq=args.omega_p_sq, tau_damp=args.tau_damp,
            omega0=args.omega0, filling=args.filling, eps_c=args.eps_c, mu_c=args.mu_c, out=args.out,
        )
        return EXIT_OK

    from plasmon.flows.run_verify import verify_flow

    report = verify_flow(level=args.level, inject_fault=args.inject_fault, seed=args.seed or 0,
                         out=args.out, threads=args.threads or 1)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"errore di configurazione: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InadmissibleConfig, Unreachable, NearPole) as exc:
        print(f"configurazione fisica non ammissibile: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except PlasmonError:
        raise
    except ValueError as exc:
        # parametri fuori dominio (es. DrudeParams, griglia malformata)
        print(f"errore di configurazione: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
