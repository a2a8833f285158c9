"""swediff: toy-scale joint video+physics latent diffusion on swegen datasets."""

from .latents import (
    PhysicsEmbedder,
    decode_video,
    embed_boundary,
    encode_video,
    pool_plane,
    unpool_plane,
    video_filter_bank,
)
from .model import ConditioningSet, JointDenoiser, denoise_step, fuse_latents
from .sampling import decode_physics, sample, sampling_timesteps, write_sample
from .schedule import NoiseSchedule, forward_diffuse
from .swt_io import SwtData, read_manifest, read_ppm, read_swt, write_ppm, write_swt
from .training import LatentBatch, PhysicsStats, TrajectoryDataset, train, training_step

__version__ = "0.1.0"
