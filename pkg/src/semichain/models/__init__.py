from . import bs, itbs, motzkin, pairflip
from .base import EvaluatorUnavailable, Model, ModelError, TooLong

MODELS: dict[str, Model] = {
    m.name: m
    for m in (bs.MODEL, itbs.MODEL, motzkin.STAR_MODEL, motzkin.CHIRAL_MODEL, pairflip.MODEL)
}


def get_model(name: str) -> Model:
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; have {sorted(MODELS)}")
    return MODELS[name]
