"""Exception taxonomy shared across the package."""


class AsyncpayError(Exception):
    """Base class for all protocol-level errors."""


class ZeroInversionError(AsyncpayError):
    """Attempted to invert zero in the scalar field."""


class DegenerateHashError(AsyncpayError):
    """Signing digest collides with the negated secret key (sk + h = 0)."""


class DuplicateHashError(AsyncpayError):
    """Aggregation input contains repeated member digests."""


class BoundExceededError(AsyncpayError):
    """An operation needs more public key powers than the configured bound B."""


class InvalidMemberSignature(AsyncpayError):
    """A signature submitted for aggregation failed individual verification."""


class StaleDigestError(AsyncpayError):
    """Collision-finding was asked to adapt a digest that does not match its inputs."""


class TrapdoorZeroError(AsyncpayError):
    """The chameleon trapdoor is zero and cannot be used for adaption."""


class DesignationCheckError(AsyncpayError):
    """The timed-release designation key failed its pairing consistency guard."""


class PayloadLengthError(AsyncpayError):
    """A time-locked payload does not have the fixed ciphertext block length."""


class LabelMismatchError(AsyncpayError):
    """A time instant key was offered for a different time label than the ciphertext."""


class EncodingError(AsyncpayError):
    """A serialized value could not be decoded (bad tag, length, or range)."""


class MiningError(AsyncpayError):
    """Block assembly failed (empty mempool or nonce search exhausted)."""


class ScenarioError(AsyncpayError):
    """A scenario script is malformed or an expectation in it was violated."""
