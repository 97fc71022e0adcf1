"""Exception types shared across the package."""


class TensorError(Exception):
    pass


class MalformedIndex(TensorError):
    pass


class ArityError(TensorError):
    pass


class IndexNotFree(TensorError):
    pass


class IndexCollision(TensorError):
    pass


class SignatureMismatch(TensorError):
    pass


class VarianceError(MalformedIndex):
    pass


class UnbalancedIndex(MalformedIndex):
    pass
