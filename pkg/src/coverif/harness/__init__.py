"""Firmware drivers, composition with the hardware model and the end-to-end flow."""

from .pipeline import ScenarioConfig, build_job, default_harness, load_design, load_firmware, run_job, verify

__all__ = ["ScenarioConfig", "build_job", "default_harness", "load_design", "load_firmware",
           "run_job", "verify"]
