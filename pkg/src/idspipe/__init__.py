"""Software model of an FPGA intrusion-detection datapath."""

__version__ = "0.1.0"
