from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

NOMINAL_SAMPLE_RATE = 22050


@dataclass(frozen=True, eq=False)
class AudioClip:
    """
    Mono audio held as float64 amplitudes in [-1, 1].

    Attributes:
        samples (np.ndarray): 1-D sample buffer.
        sample_rate (int): Samples per second, positive.
        source_path (str): Where the clip came from, used in logs and skip reports.
    """

    samples: npt.NDArray[np.float64]
    sample_rate: int
    source_path: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip holds mono audio, samples must be 1-D")
        if samples.size and np.max(np.abs(samples)) > 1.0:
            raise ValueError("samples must lie within [-1, 1]")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.n_samples / self.sample_rate

    def __repr__(self) -> str:
        return (
            f"AudioClip(n_samples={self.n_samples}, sample_rate={self.sample_rate}, "
            f"source_path='{self.source_path}')"
        )
