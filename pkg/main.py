import argparse
import logging
import os
import sys

from core.errors import QmlError, ValidationError
from engine.pipeline import COMMANDS, PipelineRunner
from utils.config import load_config, parse_override
from utils.visualizer import Visualizer
from alerts.notify import AlertNotifier


def parse_overrides(tokens):
    """`--key value` / `--key=value` pairs left over by argparse."""
    overrides = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith('--') or len(token) == 2:
            raise ValidationError(f"unexpected argument {token!r}")
        key = token[2:]
        if '=' in key:
            key, raw = key.split('=', 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ValidationError(f"missing value for --{key}")
            raw = tokens[i + 1]
            i += 2
        overrides[key] = parse_override(raw)
    return overrides


def build_parser():
    parser = argparse.ArgumentParser(
        description='Dephasing-qubit toolkit: temporal inequalities, non-Markovianity, '
                    'master-equation tomography and pulse sequences',
        epilog='Any config key can be overridden with --key value, e.g. --theta_rad 0.5')
    parser.add_argument('command', choices=COMMANDS, help='pipeline to run')
    parser.add_argument('--config', type=str, default='config.yaml',
                        help='Path to configuration file (default: config.yaml)')
    parser.add_argument('--log-level', type=str, default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Logging level for diagnostics on stderr (default: WARNING)')
    return parser


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)

    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')

    root_dir = os.path.dirname(os.path.abspath(__file__))
    config_path = os.path.join(root_dir, args.config)

    try:
        config = load_config(config_path, parse_overrides(extra))

        print(f"Running {args.command} pipeline ...")
        runner = PipelineRunner(config, Visualizer.from_config(config), AlertNotifier())
        result = runner.run(args.command)

        for line in result.lines:
            print(line)
        for warning in result.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        for path in result.artifacts:
            print(f"wrote {path}")
        return result.exit_status
    except QmlError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_status
    except KeyboardInterrupt:
        print("Pipeline stopped by user.", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
