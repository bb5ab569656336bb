"Command-line front end: vvhom run | validate | table | oracle"
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from sys import stderr
import logging
from vvhom import __version__
from vvhom.abstractions import Configuration, ExitCode
from vvhom.configparser import ConfigError, ConfigParser, ExperimentConfig
from vvhom.detectors import MIN_QUADRATURE, bucket_bucket_rate
from vvhom.interference import BiphotonInput, ProjectionPair, closed_form_label
from vvhom.modes import make_vv_mode
from vvhom.oracle import OracleToleranceError, check_equivalence
from vvhom.runner import run

logger = logging.getLogger(__name__)

LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _ArgumentParser(ArgumentParser):
    "Usage errors exit with ExitCode.USAGE instead of argparse's 2."

    def error(self, message: str) -> None:
        self.print_usage(stderr)
        stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(int(ExitCode.USAGE))


def _quadrature(text: str) -> int:
    try:
        value: int = int(text)
    except ValueError as exc:
        raise ArgumentTypeError(f"'{text}' is not an integer") from exc
    if value < MIN_QUADRATURE:
        raise ArgumentTypeError(
            f"quadrature must be >= {MIN_QUADRATURE}, got {value}")
    return value


def _nonnegative(text: str) -> int:
    try:
        value: int = int(text)
    except ValueError as exc:
        raise ArgumentTypeError(f"'{text}' is not an integer") from exc
    if value < 0:
        raise ArgumentTypeError(f"value must be >= 0, got {value}")
    return value


def _sectors(text: str) -> int:
    value: int = _nonnegative(text)
    if value < 2:
        raise ArgumentTypeError(f"sectors must be >= 2, got {value}")
    return value


def build_parser() -> ArgumentParser:
    common: ArgumentParser = ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true',
                        help='Log debug messages.')
    parser: ArgumentParser = _ArgumentParser(
        prog='vvhom', description='Spatially structured Hong-Ou-Mandel interference and polarization quantum eraser simulator.')
    parser.add_argument('--version', action='version',
                        version=f"%(prog)s {__version__}")
    verbs = parser.add_subparsers(dest='verb', required=True)

    run_parser: ArgumentParser = verbs.add_parser(
        'run', parents=[common], help='Run a virtual experiment and write its outputs.')
    run_parser.add_argument('-c', '--config', required=True,
                            help='Experiment configuration file, or the name of a bundled configuration (HH, ..., AD).')
    run_parser.add_argument('-o', '--outdir', required=True,
                            help='Output folder.')
    run_parser.add_argument('--seed', type=_nonnegative, default=None,
                            help='Overrides the noise seed.')
    run_parser.add_argument('--quadrature', type=_quadrature, default=None,
                            help='Overrides the angular quadrature size.')
    run_parser.add_argument('--figure', action='store_true',
                            help='Also draw panel.png.')

    validate_parser: ArgumentParser = verbs.add_parser(
        'validate', parents=[common], help='Parse a configuration and print its canonical form.')
    validate_parser.add_argument('-c', '--config', required=True,
                                 help='Experiment configuration file or bundled configuration name.')

    verbs.add_parser('table', parents=[common],
                     help='Print the closed-form visibility table of the radial / pi pair.')

    oracle_parser: ArgumentParser = verbs.add_parser(
        'oracle', parents=[common], help='Compare the brute-force oracle with the analytic kernel.')
    oracle_parser.add_argument('-c', '--config', required=True,
                               help='Experiment configuration file or bundled configuration name.')
    oracle_parser.add_argument('--sectors', type=_sectors, nargs='+', required=True,
                               help='Sector counts to check.')
    oracle_parser.add_argument('--tolerance', type=float, default=None,
                               help='Residual tolerance, by default the configured one or 1e-9.')
    return parser


def load_config(config: str) -> ExperimentConfig:
    "A bundled configuration name or a path to a file."
    if config in {configuration.value for configuration in Configuration}:
        return ConfigParser.load_preset(config)
    return ConfigParser.read_config(config)


def print_table() -> None:
    """Prints, for the radial mode in port A and the pi mode in port B, the pointwise and integrated
    closed-form visibilities and the bucket-bucket in/out ratio of each configuration.
    """
    biphoton: BiphotonInput = BiphotonInput(
        make_vv_mode('radial'), make_vv_mode('pi'))
    print("P1P2\tbucket in/out\tcamera (phi2 integrated)\tpointwise")
    for configuration in Configuration:
        projection: ProjectionPair = ProjectionPair.from_configuration(configuration)
        rate_in: float = bucket_bucket_rate(biphoton, projection, 0.)
        rate_out: float = bucket_bucket_rate(biphoton, projection, float('inf'))
        print(
            f"{configuration.value}\t{rate_in/rate_out:.6f}\t{closed_form_label(configuration, integrated=True)}\t{closed_form_label(configuration)}")


def main(argv: list[str] | None = None) -> int:
    """Entry point.

    Returns
    -------
    int
        0 ok, 1 usage or configuration error, 2 runtime error, 3 oracle tolerance breach
    """
    args: Namespace = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    config: ExperimentConfig | None = None
    if args.verb in ('run', 'validate', 'oracle'):
        try:
            config = load_config(args.config)
        except (ConfigError, OSError, ValueError) as exc:
            logger.error("%s: %s", args.config, exc)
            return int(ExitCode.USAGE)
    try:
        match args.verb:
            case 'run':
                report = run(config, args.outdir, seed=args.seed,
                             quadrature=args.quadrature, figure=args.figure)
                for panel, files in report.outputs.items():
                    logger.debug("%s: %s", panel, ', '.join(files))
            case 'validate':
                print(config.to_text(), end='')
            case 'table':
                print_table()
            case 'oracle':
                tolerance: float = args.tolerance if args.tolerance is not None else (
                    config.oracle.tolerance if config.oracle is not None else 1e-9)
                for comparison in check_equivalence(config.biphoton(), config.projection(), args.sectors, tolerance):
                    print(
                        f"n_sectors={comparison.n_sectors}\tmax_residual={comparison.max_residual:.3e}")
    except OracleToleranceError as exc:
        logger.error("%s", exc)
        return int(ExitCode.ORACLE_BREACH)
    except (OSError, ValueError, RuntimeError) as exc:
        logger.error("%s", exc)
        return int(ExitCode.RUNTIME)
    return int(ExitCode.OK)


if __name__ == '__main__':
    raise SystemExit(main())
