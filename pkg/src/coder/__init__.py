"""A minimal general-purpose coding agent: a ReAct loop over sandboxed tools
and a persistent interactive kernel, with record/replay testing support and a
benchmark harness for validating generated constraint-model solutions."""

__version__ = "0.1.0"
