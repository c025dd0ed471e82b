# encoding: utf-8
import logging
import multiprocessing

__all__ = ["run_jobs"]

logger = logging.getLogger(__name__)

# payload installed once per worker process
_shared = None


def _install_shared(shared):
    global _shared
    _shared = shared


def _call_with_shared(job):
    func, item = job
    return func(_shared, item)


def run_jobs(func, items, n_jobs=1, shared=None):
    """Map a module level func over items, results in input order.

    With ``shared`` the call is ``func(shared, item)`` and shared is sent
    to each worker once, not with every item. n_jobs <= 1 runs in the
    calling process.
    """
    items = list(items)
    workers = min(int(n_jobs or 1), len(items))
    if workers <= 1:
        if shared is None:
            return [func(item) for item in items]
        return [func(shared, item) for item in items]
    logger.debug("Running %d jobs on %d workers.", len(items), workers)
    if shared is None:
        with multiprocessing.Pool(workers) as pool:
            return pool.map(func, items)
    with multiprocessing.Pool(
        workers, initializer=_install_shared, initargs=(shared,)
    ) as pool:
        return pool.map(_call_with_shared, [(func, item) for item in items])
