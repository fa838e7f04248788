"""
Hardware description files, e.g.::

    [hardware]
    platform = uqs1
    shape = 7
    boundary = open
    available_j = 1, 2, 3

    [hardware]
    platform = uqs2
    positions = 0; 1; 2; 3
    kappa = 1.0
    crosstalk_threshold = 1e-3
"""
import configparser

from uqsim_backend.errors import ParseError
from .lattice import LatticeModel
from .serializers import build_hardware

SECTION = 'hardware'


def parse_hardware(text):
    if not text.lstrip().startswith('['):
        text = f'[{SECTION}]\n{text}'
        offset = 1
    else:
        offset = 0
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        line_no = exc.errors[0][0] - offset if exc.errors else None
        raise ParseError(f'malformed hardware description: {exc.message.splitlines()[0]}', line_no) from None
    except configparser.Error as exc:
        raise ParseError(f'malformed hardware description: {exc}', getattr(exc, 'lineno', None)) from None
    if not parser.has_section(SECTION):
        raise ParseError(f'missing [{SECTION}] section')
    return build_hardware(dict(parser[SECTION]), SECTION)


def format_hardware(model):
    lines = [f'[{SECTION}]', f'platform = {model.name}', f'gamma = {model.gamma!r}']
    if isinstance(model, LatticeModel):
        lines += [
            f'shape = {"x".join(str(s) for s in model.shape)}',
            f'boundary = {model.boundary}',
            f'available_j = {", ".join(str(j) for j in sorted(model.available_j))}',
            f'addressable = {"yes" if model.addressable else "no"}',
            f'diagonal = {"yes" if model.diagonal else "no"}',
        ]
    else:
        lines += [
            'positions = ' + '; '.join(','.join(repr(x) for x in p) for p in model.positions),
            f'kappa = {model.kappa!r}',
            f'crosstalk_threshold = {model.crosstalk_threshold!r}',
            f'crosstalk_realism = {"yes" if model.crosstalk_realism else "no"}',
        ]
    return '\n'.join(lines) + '\n'
