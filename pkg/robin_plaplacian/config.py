import json
import logging

from config_path import ConfigPath

logger = logging.getLogger(__name__)

default_config_json = """{
    "tolerance": 1e-8,
    "maxOuterIterations": 300,
    "maxInnerIterations": 60,
    "epsilonStart": 1e-2,
    "epsilonRegularization": 1e-10,
    "residualTolerance": 1e-4,
    "seed": 0,
    "quotientFloor": -100.0,
    "meshSize": 0.1,
    "slackFloor": 0.02,
    "slackPerMeshSize": 5.0
}"""


def _getUserConfigPath():
    return ConfigPath("robin_plaplacian", "robin-plaplacian", ".json")


def _getConfigDicts(log_level: int = logging.INFO):
    config = _getUserConfigPath()
    config_file = config.readFilePath()
    if config_file is None:
        json_config = default_config_json
        logger.log(log_level, "Using default builtin config")
    else:
        logger.log(log_level, f"Using config from {config_file}")
        with open(config_file) as f:
            json_config = f.read()

    defaults = json.loads(default_config_json)
    user = json.loads(json_config)

    return defaults, user


def setUserConfig(config_path_user: str):
    """Store a JSON file with solver and verification settings as the user's config.

    Args:
        config_path_user: path to a JSON file with a subset of the builtin keys

    """
    with open(config_path_user) as f:
        config_user = json.load(f)

    config = _getUserConfigPath()
    config_path = config.saveFilePath(mkdir=True)

    logger.info(f"Overwriting user's config.json located at {config_path}")

    with open(config_path, "w") as f:
        json.dump(config_user, f, indent=4)


def _getConfigSetting(name, user, defaults):
    if name in user:
        return user[name]
    else:
        return defaults[name]


def getSetting(name: str):
    """Resolve a single setting, user value first, builtin default otherwise.

    Reads the config file on every call and reports which file it used at DEBUG level only.
    """
    defaults, user = _getConfigDicts(logging.DEBUG)
    return _getConfigSetting(name, user, defaults)
