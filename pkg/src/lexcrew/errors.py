"""Exception hierarchy shared by all lexcrew modules."""


class LexcrewError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LexcrewError):
    pass


# corpus ----------------------------------------------------------------

class EmptyDocumentError(LexcrewError):
    pass


class DocumentDecodeError(LexcrewError):
    def __init__(self, path: str, byte_position: int, reason: str):
        super().__init__(f"{path}: invalid encoding at byte {byte_position}: {reason}")
        self.path = path
        self.byte_position = byte_position


class ParameterError(LexcrewError):
    pass


class NoArticleDelimiterWarning(UserWarning):
    """Emitted when the article splitter finds no delimiter at all."""


# embed / index ---------------------------------------------------------

class EmptyTextError(LexcrewError):
    pass


class EmbeddingError(LexcrewError):
    pass


class DimensionMismatchError(LexcrewError):
    pass


class TransportError(LexcrewError):
    pass


class EmptyCorpusError(LexcrewError):
    pass


class DuplicateIdError(LexcrewError):
    pass


class UnknownChunkError(LexcrewError):
    pass


class IndexFormatError(LexcrewError):
    pass


# llm -------------------------------------------------------------------

class EmptyCompletionError(LexcrewError):
    pass


class ContextLengthError(LexcrewError):
    pass


class UnscriptedPromptError(LexcrewError):
    pass


# agents / evalkit ------------------------------------------------------

class MalformedAgentReplyError(LexcrewError):
    pass


class MalformedJudgeReplyError(LexcrewError):
    pass


# bench -----------------------------------------------------------------

class EmptyBankError(LexcrewError):
    pass


class OutOfRangeError(LexcrewError):
    pass


class UnknownKeyError(LexcrewError):
    pass


class BenchAbortedError(LexcrewError):
    pass
