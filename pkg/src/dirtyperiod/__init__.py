"""Reversible arithmetic on dirty ancillae and a small Shor period-finding stack."""
