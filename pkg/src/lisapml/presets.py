"""Named run configurations for the five verification experiments.

The unsuffixed presets use the full-size grids; those are far beyond desk scale
for examples 3-5, so ``-scaled`` variants shrink the domain to ``[-10, 10]^2``
while keeping the physics and layer width.
"""

from __future__ import annotations

_MANUFACTURED = """
[domain]
x_min = 0
x_max = 1
y_min = 0
y_max = 1
n = 64

[boundary]
kind = dirichlet
data = exact_example1

[time]
tau_rule = factor
tau_factor = 0.1
final_time = 1
initial = exact_example1
"""

_PULSE = """
[source]
kind = gaussian_pulse
active_steps = pulse
center_x = 0
center_y = 0
time_level = current
"""

PRESETS: dict[str, str] = {
    "example1": _MANUFACTURED + """
[material]
kind = constant
rho = 1
mu = 1

[source]
kind = none
""",
    "example2": _MANUFACTURED + """
[material]
kind = cosine
rho = 1
amplitude = 0.5

[source]
kind = manufactured_example2
time_level = next
""",
    "example3": _PULSE + """
[domain]
x_min = -50
x_max = 50
y_min = -50
y_max = 50
n = 12800

[material]
kind = interface
interface_x = 25
rho_left = 1
mu_left = 1
rho_right = 2
mu_right = 2

[boundary]
kind = dirichlet
data = zero

[time]
tau_rule = factor
tau_factor = 0.1
final_time = 40
initial = rest
""",
    "example3-scaled": _PULSE + """
[domain]
x_min = -10
x_max = 10
y_min = -10
y_max = 10
n = 128

[material]
kind = interface
interface_x = 2.5
rho_left = 1
mu_left = 1
rho_right = 2
mu_right = 2

[boundary]
kind = dirichlet
data = zero

[time]
tau_rule = factor
tau_factor = 0.1
final_time = 8
initial = rest
""",
    "example4": _PULSE + """
[domain]
x_min = -50
x_max = 50
y_min = -50
y_max = 50
n = 25600

[material]
kind = constant
rho = 1
mu = 1

[boundary]
kind = pml

[pml]
order = 1
width_cells = 15

[time]
tau_rule = quarter_cell
final_time = 60
initial = rest
""",
    "example4-scaled": _PULSE + """
[domain]
x_min = -10
x_max = 10
y_min = -10
y_max = 10
n = 400

[material]
kind = constant
rho = 1
mu = 1

[boundary]
kind = pml

[pml]
order = 1
width_cells = 15

[time]
tau_rule = quarter_cell
final_time = 25
initial = rest
""",
    "example5": _PULSE + """
[domain]
x_min = -50
x_max = 50
y_min = -50
y_max = 50
n = 25600

[material]
kind = interface
interface_x = 25
rho_left = 1
mu_left = 1
rho_right = 2
mu_right = 2

[boundary]
kind = pml

[pml]
order = 1
width_cells = 15

[time]
tau_rule = quarter_cell
final_time = 60
initial = rest
""",
    "example5-scaled": _PULSE + """
[domain]
x_min = -10
x_max = 10
y_min = -10
y_max = 10
n = 400

[material]
kind = interface
interface_x = 2.5
rho_left = 1
mu_left = 1
rho_right = 2
mu_right = 2

[boundary]
kind = pml

[pml]
order = 1
width_cells = 15

[time]
tau_rule = quarter_cell
final_time = 25
initial = rest
""",
}


def preset_text(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
