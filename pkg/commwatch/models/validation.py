""" config validation

Each JSON input (scenario, detector, theory) has a schema mapping field
name to whether the field is required. Unknown or missing fields are
rejected before any value checks run; value checks raise
InvalidConfigException naming the field.
"""

import numbers

from ..exceptions import InvalidConfigException


SCENARIO_SCHEMA = {
    'n_nodes': True,
    'p0': True,
    'p1': True,
    'changepoint': False,
    'community': False,
    'active_edges': False,
    'seed': False,
}

DETECTOR_SCHEMA = {
    'method': True,
    'p0': True,
    'p1': False,
    's': False,
    'alpha': False,
    'm0': False,
    'm1': False,
    'threshold': True,
    'n_nodes': False,
}

THEORY_SCHEMA = {
    'p0': True,
    'p1': True,
    'alpha': False,
    'b': False,
    'n_nodes': True,
    'n_effective': False,
    'm0': False,
    'm1': False,
    'quad_tol': False,
    'z_range': False,
    'target_arl': False,
}


def validate_keys(data, schema, name):
    if not isinstance(data, dict):
        raise InvalidConfigException(name, 'expected a JSON object')
    for key in data:
        if key not in schema:
            raise InvalidConfigException(key, 'unknown {} field'.format(name))
    for key, required in schema.items():
        if required and key not in data:
            raise InvalidConfigException(key, 'required {} field missing'.format(name))


def check_integer(field, value, minimum=None, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidConfigException(field, 'expected an integer, got {!r}'.format(value))
    if minimum is not None and value < minimum:
        raise InvalidConfigException(field, 'must be >= {}, got {}'.format(minimum, value))
    return int(value)


def check_real(field, value, minimum=None, exclusive=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidConfigException(field, 'expected a number, got {!r}'.format(value))
    value = float(value)
    if value != value:
        raise InvalidConfigException(field, 'NaN is not allowed')
    if minimum is not None:
        if exclusive and value <= minimum:
            raise InvalidConfigException(field, 'must be > {}, got {}'.format(minimum, value))
        if not exclusive and value < minimum:
            raise InvalidConfigException(field, 'must be >= {}, got {}'.format(minimum, value))
    return value


def check_probability(field, value, closed=False, allow_none=False):
    """ probabilities live in (0, 1), or in [0, 1] when closed """

    value = check_real(field, value, allow_none=allow_none)
    if value is None:
        return None
    if closed and not 0 <= value <= 1:
        raise InvalidConfigException(field, 'must lie in [0, 1], got {}'.format(value))
    if not closed and not 0 < value < 1:
        raise InvalidConfigException(field, 'must lie in (0, 1), got {}'.format(value))
    return value


def check_choice(field, value, choices):
    if value not in choices:
        raise InvalidConfigException(field, 'must be one of {}, got {!r}'.format(sorted(choices), value))
    return value
