from abc import ABC, abstractmethod

import numpy as np

from embeddings.models import Embedding, ManifestEntry


class AbstractEmbeddingBackend(ABC):
    """
    Turns one analysis frame into a fixed-dimension embedding.
    Implementations must be deterministic: the same frame gives the same vector.
    """

    name: str

    @property
    @abstractmethod
    def dim(self) -> int:
        """Output dimension."""
        pass

    @abstractmethod
    def embed_frame(self, frame: np.ndarray) -> Embedding:
        """Embeds a frame of exactly `frame_len` samples."""
        pass


class AbstractUtteranceEmbedder(ABC):
    """
    Produces one embedding per manifest entry, whatever the source
    (audio through a frame backend, or a table of precomputed vectors).
    """

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @abstractmethod
    def embed_entry(self, entry: ManifestEntry) -> Embedding:
        """
        :raises PipelineError: When the entry cannot be embedded; the caller records
            it in the skip report.
        """
        pass
