"""Metamorphic SQL testing guided by duplicate sensitivity."""

from ._eqmorph import (
    ExecError,
    SqlSyntaxError,
    TargetUnavailable,
    canonical_sql,
    check_equivalence,
    execute,
    faults,
    generate,
    plan,
    replay,
    rules,
    run_campaign,
    sensitivity,
    transform,
)

__all__ = [
    "ExecError",
    "SqlSyntaxError",
    "TargetUnavailable",
    "canonical_sql",
    "check_equivalence",
    "execute",
    "faults",
    "generate",
    "plan",
    "replay",
    "rules",
    "run_campaign",
    "sensitivity",
    "transform",
]
