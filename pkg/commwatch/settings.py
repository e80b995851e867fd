# settings for commwatch

import json
import os

user_settings_dir = os.getcwd()
user_settings_file = os.path.join(user_settings_dir, '.settings.json')

if not os.path.isfile(user_settings_file):
    user_settings_dir = os.path.dirname(__file__)
    user_settings_file = os.path.join(user_settings_dir, '.settings.json')

settings = {

    'NUMPY_WARNINGS': 'warn',
    'PROCESSES': os.cpu_count() or 1,

    # seeds
    'BASE_SEED': 20150901,
    'SEED_ENV': 'COMMWATCH_SEED',

    # detector defaults, frozen by `commwatch reproduce settings`
    'ALPHA': 0.2,
    'M0': 0,
    'M1': 200,
    'FALSE_COMMUNITY_M1': 4,
    'N_EFFECTIVE': 'nodes',
    'MLE_EPSILON': 1e-6,

    # theory numerics
    'QUAD_TOL': 1e-8,
    'Z_RANGE': 8.0,
    'THETA_MIN': 1e-6,
    'THETA_MAX': 1e3,
    'ARL_TOL': 0.005,

    # monte carlo
    'N_TRIALS': 2000,
    'CALIBRATION_TRIALS': 500,
    'CALIBRATION_TOL': 0.05,
    'CENSOR_FACTOR': 50,
    'CENSOR_LIMIT': 0.05,
    'B_MAX': 100.0,

    'USER_SETTINGS_DIR': user_settings_dir,
    'USER_SETTINGS_FILE': user_settings_file
}

locals().update(settings)

# override with user settings in ./.settings.json or commwatch/.settings.json
if os.path.isfile(user_settings_file):
    try:
        with open(user_settings_file) as f:
            user_settings = json.load(f)
        locals().update(user_settings)
    except (OSError, ValueError):
        raise Exception('unable to open user settings {}'.format(user_settings_file))


def freeze(**values):
    """writes values into the user settings file and applies them to this module"""

    frozen = {}
    if os.path.isfile(user_settings_file):
        with open(user_settings_file) as f:
            frozen = json.load(f)
    frozen.update(values)
    with open(user_settings_file, 'w') as f:
        json.dump(frozen, f, indent=4, sort_keys=True)
    globals().update(values)
    return frozen
