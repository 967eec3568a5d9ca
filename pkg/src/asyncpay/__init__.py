"""Deferred-payment protocol toolkit.

Building blocks (each usable on its own):

* :mod:`asyncpay.backends` - interchangeable bilinear-group backends: a
  production symmetric pairing and an exponent-tracking toy oracle.
* :mod:`asyncpay.lvs` - aggregate signatures with local subset verification.
* :mod:`asyncpay.chameleon` - trapdoor chameleon hash (the redaction lever).
* :mod:`asyncpay.timelock` - timed-release encryption gated by a time server.
* :mod:`asyncpay.protocol` - the composed deferred-payment scheme and roles.
* :mod:`asyncpay.ledger` - deterministic single-process chain simulator.
* :mod:`asyncpay.bench` - measurement harness behind the ``asyncpay`` CLI.
"""

from .backends import ToyBackend, TypeABackend, make_backend
from .fields import PrimeField

__all__ = ["ToyBackend", "TypeABackend", "make_backend", "PrimeField"]
__version__ = "0.1.0"
