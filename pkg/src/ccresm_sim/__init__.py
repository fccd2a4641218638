"""Channel-coded collision resolution exploiting symbol misalignment."""

from .ra_codec import ConfigError, RaConfig, build_interleaver, ra_decode_single, ra_encode
from .phy_channel import ChannelConfig, SampleFrame, bpsk, compute_evidence, overlap_and_sample
from .ccresm import DecodeResult, VirtualGraph, build_virtual_graph, decode
from .baselines import SicConfig, decode_independent, decode_turbo_sic, mud_front_end

__version__ = "0.1.0"
