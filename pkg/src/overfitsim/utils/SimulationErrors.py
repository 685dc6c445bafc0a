###############################################################################
# Exception hierarchy and logger construction shared by every simulator.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import logging
import os
import sys


class SimulationException(Exception):
    exit_code = 3

    def __init__(self, msg):
        self.msg = msg
        super().__init__()

    def __str__(self):
        return self.msg

    def to_dict(self):
        return {"status": "error", "error": type(self).__name__, "message": self.msg}


class ConfigError(SimulationException):
    exit_code = 2

    def __init__(self, msg, field: str = None):
        super().__init__(msg)
        self.field = field

    def to_dict(self):
        record = super().to_dict()
        if self.field is not None:
            record["field"] = self.field
        return record


class DimensionError(ConfigError):
    def __init__(self, msg, field: str = None):
        super().__init__(msg, field)


class StabilityError(ConfigError):
    def __init__(self, msg, field: str = None):
        super().__init__(msg, field)


class QuadratureError(ConfigError):
    def __init__(self, msg, field: str = None):
        super().__init__(msg, field)


class SimulationFault(SimulationException):
    def __init__(self, msg, detail=None):
        super().__init__(msg)
        self.detail_msg = detail

    def to_dict(self):
        record = super().to_dict()
        if self.detail_msg is not None:
            record["detail"] = self.detail_msg
        return record


class FitDivergence(SimulationFault):
    def __init__(self, msg, iteration: int):
        super().__init__(msg, detail=f"diverged at iteration {iteration}")
        self.iteration = iteration

    def to_dict(self):
        record = super().to_dict()
        record["iteration"] = self.iteration
        return record


class DatasetError(SimulationException):
    def __init__(self, msg, row: int = None):
        super().__init__(msg)
        self.row = row

    def to_dict(self):
        record = super().to_dict()
        if self.row is not None:
            record["row"] = self.row
        return record


def make_logger(name: str, log_dir: str, filename: str, verbose: bool = False):
    if not os.path.isdir(log_dir):
        os.makedirs(log_dir)

    logger = logging.getLogger(name)
    c_handler = logging.StreamHandler()
    f_handler = logging.FileHandler(os.path.join(log_dir, filename))
    logger.setLevel(logging.DEBUG)
    if sys.gettrace():
        c_handler.setLevel(logging.DEBUG)
    elif verbose:
        c_handler.setLevel(logging.INFO)
    else:
        c_handler.setLevel(logging.WARNING)
    f_handler.setLevel(logging.DEBUG)
    c_format = logging.Formatter('%(name)s - %(levelname)s - %(message)s')
    f_format = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    c_handler.setFormatter(c_format)
    f_handler.setFormatter(f_format)

    # repeated CLI invocations in one process must not stack handlers
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.addHandler(c_handler)
    logger.addHandler(f_handler)
    return logger
