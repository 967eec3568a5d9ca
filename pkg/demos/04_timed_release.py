#!/usr/bin/env python3
"""Timed-release encryption gated by a time server.

A payload is locked to a time label.  Decryption needs two things at once:
the time instant key the server publishes when that moment arrives, and
the designation secret the sender shared with one chosen receiver.  Anyone
missing either piece gets nothing.
"""

import random

from asyncpay import timelock as tl
from asyncpay.backends import PAD_BYTES, TypeABackend
from asyncpay.errors import LabelMismatchError

be = TypeABackend()
rng = random.Random(11)

server = tl.server_keygen(be, rng)
designation = tl.make_designation(be, server.pk, rng)
print(f"designation key consistent: {tl.designation_ok(be, server.pk, designation)}")

secret = b"the-chameleon-trapdoor-goes-here".ljust(PAD_BYTES)[:PAD_BYTES]
cipher = tl.tre_encrypt(be, server.pk, designation, secret, b"1700", rng)
print(f"payload locked to time label {cipher.t_label.decode()!r}")

# too early: the server has only published keys for earlier labels
early_tik = tl.extract_tik(be, server.sk, b"1699")
try:
    tl.tre_decrypt(be, cipher, early_tik, designation.s)
except LabelMismatchError as exc:
    print(f"decryption with an earlier time key refused: {exc}")

# the right time arrives; the key is publicly verifiable
tik = tl.extract_tik(be, server.sk, b"1700")
print(f"published key authentic:  {tl.verify_tik(be, server.pk, tik)}")
print(f"designated receiver gets: {tl.tre_decrypt(be, cipher, tik, designation.s)!r}")

# right time, wrong receiver: the pad never matches
outsider_s = be.field.rand_nonzero(rng)
garbage = tl.tre_decrypt(be, cipher, tik, outsider_s)
print(f"outsider with the same key recovers the payload: {garbage == secret}")
