from ._core import (
    BenchError,
    Env,
    EnvError,
    EnvState,
    Instance,
    InstanceError,
    ModelError,
    NetError,
    augment,
    default_config,
    desk_corpus,
    deserialize,
    evaluate,
    evaluate_policy,
    exact_solve,
    gap,
    make_synthetic,
    parse_vrp,
    replay_priority,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
