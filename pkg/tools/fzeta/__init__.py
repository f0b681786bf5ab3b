"""Command-line front end for the fractal zeta toolkit (`fz`, `python -m tools.fzeta`)."""

TOOL_VERSION = "0.1.0"
