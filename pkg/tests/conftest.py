from hypothesis import settings

# the whole suite is reproducible byte-for-byte; keep hypothesis on the
# same footing
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")
