"""Fluid-lensing simulation and reconstruction toolkit."""

try:
    # Installed layout: the extension lives inside this package.
    from fluidlens import _fluidlens as _ext
except ImportError:
    # Build-tree layout: the extension sits directly on PYTHONPATH.
    import _fluidlens as _ext

__all__ = []
for _name in dir(_ext):
    if not _name.startswith("_"):
        globals()[_name] = getattr(_ext, _name)
        __all__.append(_name)
del _ext, _name
