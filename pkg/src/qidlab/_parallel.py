from __future__ import annotations

import contextvars
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from .settings import get_settings

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """``list(map(fn, items))`` on up to ``threads`` workers.

    Results keep input order, so reductions over them are independent of
    the worker count.  Each task runs in a copy of the caller's context so
    the active settings propagate into workers.
    """
    items = list(items)
    threads = get_settings().threads if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    ctx = contextvars.copy_context()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda x: ctx.copy().run(fn, x), items))
