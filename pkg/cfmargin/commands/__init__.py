from .aggregate import command_aggregate
from .bounds import command_bounds
from .generate import command_generate
from .simulate import command_simulate
from .sweep import command_sweep

commands = [
    command_generate,
    command_simulate,
    command_sweep,
    command_bounds,
    command_aggregate,
]
