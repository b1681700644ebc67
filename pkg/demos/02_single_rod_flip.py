"""Flip-over of a single rigid rod in shear flow.

A rod with orientation on the unit sphere sits in a quadratic aligning
potential; thermal noise occasionally flips it between the two stable
orientations +-e1.  The most probable flip path minimizes the geometric
action, and a streamwise shear tilts the saddle pair, making one of the two
half-circle routes cheaper.

The script solves the three standard route guesses (through either saddle or
through a source) for a few shear rates and prints the minimized actions:
the global choice switches between the saddle pair with the sign of the
shear, and the barrier drops as |shear| grows.
"""

from minact import Route, SingleRod, SolveOptions, multistart

options = SolveOptions(n_images=200)

print(f"{'shear':>6} | {'via sa-':>10} {'via sa+':>10} {'via so':>10} | global")
print("-" * 58)
for shear in (-1.0, -0.5, 0.0, 0.5, 1.0):
    model = SingleRod(shear_12=shear)
    manifold = model.manifold()
    routes = [
        Route.from_labels(model, ("si+", "sa-", "si-"), name="via_sa-"),
        Route.from_labels(model, ("si+", "sa+", "si-"), name="via_sa+"),
        Route.from_labels(model, ("si+", "so-", "si-"), name="via_so"),
    ]
    result = multistart(routes, model, manifold, options)
    acts = {r.label: r.action for r in result.reports}
    print(
        f"{shear:>6.2f} | {acts['via_sa-']:>10.6f} {acts['via_sa+']:>10.6f} "
        f"{acts['via_so']:>10.6f} | {result.best.label}"
    )

print()
print("At zero shear the saddle barrier is exactly twice the potential gap")
print("(2 * (V(saddle) - V(sink)) = 1) and the source route costs twice that.")
print("Positive shear rotates the saddle pair so the sa- route shortens;")
print("negative shear favors sa+ by mirror symmetry.")
