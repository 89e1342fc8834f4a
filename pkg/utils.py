"""
General utilities shared by the solver modules and the command line: configuration
merging, report printing, terminal colors and the error hierarchy.
"""
from argparse import Namespace
from pathlib import Path
import os
import sys

import numpy as np
import yaml


class DelayGameError(Exception):
    """Root of all errors raised on bad input or exceeded budgets."""


class ParseError(DelayGameError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TotalityError(ParseError):
    pass


class SymbolError(DelayGameError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown symbol"


class PreconditionError(DelayGameError, ValueError):
    pass


class StrategyError(DelayGameError):
    pass


class BudgetError(DelayGameError):
    """
    Raised when a construction would exceed its configured vertex budget.

    Attributes
    ----------
    required : int
        Number of vertices the construction needs (an upper estimate when raised before
        building)

    budget : int
        The configured limit
    """

    def __init__(self, what, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what} needs {required} vertices, budget is {budget} "
            "(raise it with the corresponding --max_* option)"
        )


def get_config(args, override_args, args2config):
    """
    Combines YAML configuration file, command line arguments and default arguments into
    a single configuration dictionary.

    - Values in YAML file override default values
    - Command line arguments override values in YAML file

    Returns
    -------
        Namespace
    """

    def _update_config(arg, val, config, override=False):
        config_aux = config
        for k in args2config[arg]:
            if k not in config_aux:
                if k is args2config[arg][-1]:
                    config_aux.update({k: val})
                else:
                    config_aux.update({k: {}})
                    config_aux = config_aux[k]
            else:
                if k is args2config[arg][-1] and override:
                    config_aux[k] = val
                else:
                    config_aux = config_aux[k]

    # Read YAML config
    if args.yaml_config:
        yaml_path = Path(args.yaml_config)
        if not yaml_path.exists():
            raise DelayGameError(f"config file {yaml_path} does not exist")
        assert yaml_path.suffix in {".yaml", ".yml"}, "config must be a YAML file"
        with yaml_path.open("r") as f:
            config = yaml.safe_load(f) or {}
    else:
        config = {}
    # Add args to config: add if not provided; override if in command line
    override_args = [
        arg.lstrip("-").split("=")[0].replace("-", "_")
        for arg in override_args
        if arg.startswith("--")
    ]
    override_args_extra = []
    for k1 in override_args:
        if k1 in args2config:
            v1 = args2config[k1]
            for k2, v2 in args2config.items():
                if v2 == v1 and k2 != k1:
                    override_args_extra.append(k2)
    override_args = override_args + override_args_extra
    for k, v in vars(args).items():
        if k not in args2config:
            continue
        _update_config(k, v, config, override=k in override_args)
    return dict2namespace(config)


def printRecord(statement, record=None):
    """
    print a string to command line output and, if a record file is configured, append
    it there as well
    :param statement: line(s) to report
    :param record: path of the record file or None
    """
    print(statement)
    if record:
        mode = "a" if os.path.exists(record) else "w"
        with open(record, mode) as file:
            file.write(statement + "\n")


class bcolors:
    HEADER = "\033[95m"
    OKBLUE = "\033[94m"
    OKCYAN = "\033[96m"
    OKGREEN = "\033[92m"
    WARNING = "\033[93m"
    FAIL = "\033[91m"
    ENDC = "\033[0m"
    BOLD = "\033[1m"

    @staticmethod
    def paint(text, color, stream=None):
        stream = stream or sys.stdout
        if not getattr(stream, "isatty", lambda: False)():
            return text
        return f"{color}{text}{bcolors.ENDC}"


def dict2namespace(data_dict):
    """
    Recursively converts a dictionary and its internal dictionaries into an
    argparse.Namespace

    Parameters
    ----------
    data_dict : dict
        The input dictionary

    Return
    ------
    data_namespace : argparse.Namespace
        The output namespace
    """
    for k, v in data_dict.items():
        if isinstance(v, dict):
            data_dict[k] = dict2namespace(v)
    return Namespace(**data_dict)


def namespace2dict(data_namespace):
    """
    Recursively converts an argparse.Namespace and its internal namespaces into a
    dictionary
    """
    data_dict = {}
    for k in vars(data_namespace):
        v = getattr(data_namespace, k)
        if isinstance(v, Namespace):
            data_dict[k] = namespace2dict(v)
        else:
            data_dict[k] = v
    return data_dict


def numpy2python(results_dict):
    """
    Recursively converts the numpy types into native Python types in order to
    enable proper dumping into YAML files

    Parameters
    ----------
    results_dict : dict
        The input dictionary

    Return
    ------
    results_dict : dict
        The same dictionary, converted in place
    """

    def convert(v):
        if isinstance(v, np.ndarray):
            return v.tolist()
        elif isinstance(v, np.integer):
            return int(v)
        elif isinstance(v, np.floating):
            return float(v)
        elif isinstance(v, (tuple, frozenset, set)):
            return [convert(x) for x in v]
        else:
            return v

    for k, v in results_dict.items():
        if isinstance(v, dict):
            numpy2python(v)
        else:
            results_dict[k] = convert(v)
    return results_dict


def tokenize(line):
    """Strips a '#' comment and splits on whitespace."""
    return line.split("#", 1)[0].split()


def ceil_log2_exceeds(value, exponent):
    """
    True iff value > 2**exponent, decided from the bit length so that huge exponents are
    never materialized.
    """
    if value <= 1:
        return False
    if exponent < 0:
        return True
    bits = (value - 1).bit_length()
    return bits > exponent


def text_lines(text):
    """
    Yields (line number, tokens) for every non-blank line of a text file format.

    Raises
    ------
    ParseError
        When bytes are not valid UTF-8
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            lineno = text[: e.start].count(b"\n") + 1
            raise ParseError(f"invalid UTF-8 byte 0x{text[e.start]:02x}", lineno)
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = tokenize(line)
        if tokens:
            yield lineno, tokens


def parse_int(token, lineno, what):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", lineno)


def parse_header(lines, kind, keys):
    """Reads the header line and the `key: values` lines, in any order."""
    lineno, tokens = next(lines, (None, None))
    if tokens != [kind]:
        raise ParseError(f"expected header '{kind}'", lineno or 1)
    header = {}
    for lineno, tokens in lines:
        key = tokens[0]
        if not key.endswith(":"):
            return header, (lineno, tokens)
        key = key[:-1]
        if key not in keys:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in header:
            raise ParseError(f"duplicate key {key!r}", lineno)
        header[key] = (lineno, tokens[1:])
    return header, None


def require_keys(header, keys, lineno):
    for key in keys:
        if key not in header:
            raise ParseError(f"missing '{key}:' line", lineno)


def parse_state_header(header):
    """The `states:` and `init:` values as (state count, initial state)."""
    lineno, tokens = header["states"]
    if len(tokens) != 1:
        raise ParseError("'states:' takes one value", lineno)
    n = parse_int(tokens[0], lineno, "state count")
    if n < 1:
        raise ParseError("state count must be positive", lineno)
    lineno, tokens = header["init"]
    if len(tokens) != 1:
        raise ParseError("'init:' takes one value", lineno)
    init = parse_int(tokens[0], lineno, "initial state")
    if not 0 <= init < n:
        raise ParseError(f"initial state {init} out of range 0..{n - 1}", lineno)
    return n, init


def parse_state(token, n, lineno):
    q = parse_int(token, lineno, "state")
    if not 0 <= q < n:
        raise ParseError(f"state {q} out of range 0..{n - 1}", lineno)
    return q


def check_end(lines, first, last_lineno):
    """Consumes the `end` line; anything after it is an error."""
    if first is None:
        raise ParseError("missing 'end'", last_lineno)
    for lineno, tokens in lines:
        raise ParseError("content after 'end'", lineno)
