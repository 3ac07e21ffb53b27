"""Prescribed Q-curvature solvers on R^n."""

import json

from ._qcurv import *  # noqa: F401,F403
from ._qcurv import _run

__version__ = "0.1.0"


def run(command, *args, **options):
    """Run a CLI command in-process and return the parsed report.

    Keyword options become flags: ``out_dir="x"`` is ``--out-dir x`` and a value of
    True is a bare flag. Raises UsageError for arguments the CLI would reject.
    """
    argv = [command, *map(str, args)]
    for key, value in options.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, (list, tuple)):
            argv += [flag, ",".join(map(str, value))]
        else:
            argv += [flag, str(value)]
    code, report, reason = _run(argv)
    if report is None:
        return {"help": reason}
    out = json.loads(report)
    out["exit_code"] = code
    return out
