"""Decentralized Bayesian occupancy mapping (python surface of the C++ core)."""

try:
    from . import _core as _c  # installed layout: dibmap/_core.so
except ImportError:
    import _core as _c  # in-tree build: _core.so on PYTHONPATH

__version__ = _c.__version__

DimensionError = _c.DimensionError
NumericalError = _c.NumericalError
WireError = _c.WireError
ProtocolError = _c.ProtocolError
ConfigError = _c.ConfigError
IoError = _c.IoError

RngStream = _c.RngStream
MapperNet = _c.MapperNet
PeerMessage = _c.PeerMessage
WireCodec = _c.WireCodec

kl_gaussian = _c.kl_gaussian
kl_numeric = _c.kl_numeric
sigma_from_rho = _c.sigma_from_rho
rho_from_sigma = _c.rho_from_sigma
generate_floorplan = _c.generate_floorplan
kde_density = _c.kde_density
run_config = _c.run_config

__all__ = [
    "RngStream", "MapperNet", "PeerMessage", "WireCodec",
    "kl_gaussian", "kl_numeric", "sigma_from_rho", "rho_from_sigma",
    "generate_floorplan", "kde_density", "run_config",
    "DimensionError", "NumericalError", "WireError", "ProtocolError",
    "ConfigError", "IoError",
]
