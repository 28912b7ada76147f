"""Linear phonon Boltzmann equation with a thermostatted interface:
interface coefficients, diffusion constant, kinetic solvers and the
diffusive-limit heat reference."""

__version__ = "0.1.0"
