"""Rates, basis optimisation and shared-resource cheating searches."""
from .rates import (TELEPORT_RATE_EXACT, BasisSearchResult, RateReport, b2_basis_rate, measure_hold_rate_exact,
                    optimal_b2_basis_search, rate_monte_carlo, rate_profile, rate_quadrature_teleport,
                    sample_sphere, simulate_batch, success_closed_form, su2, teleport_integral,
                    teleport_integrand)
from .search import (WEIGHT_MODES, ConstraintResiduals, conditional_states, ResourceSearchResult, axis_angles, fibonacci_sphere, infer_selection,
                     parse_grid, pauli_axes, qutrit_cheat_search, qutrit_constraint_check, resource_cheat_search,
                     theta_ring, two_qubit_cheat_search, verify_perfect)
