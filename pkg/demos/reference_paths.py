"""Print the maxima of every reference path next to the printed closed forms for one instance."""

import sys

from hidden_ising.lattice import ModelSpec
from hidden_ising.paths import PATH_NAMES, build_reference_path, gamma_star, path_is_valid_for, printed_forms


def main(args: list[str]) -> None:
    spec = ModelSpec(*(int(a) for a in args)) if args else ModelSpec(12, 3, 5, 2, 2)
    printed = {f.path: f for f in printed_forms(spec)}
    print(f"{spec}  regime={spec.regime.value}")
    for name in PATH_NAMES:
        if not path_is_valid_for(spec, name):
            continue
        path = build_reference_path(spec, name)
        form = printed.get(path.name)
        shown = "" if form is None else f"  printed {form.value}  diff {path.max_elevation - form.value}"
        print(f"  {path.name:6s} max {str(path.max_elevation):>8s}  steps {len(path):4d}{shown}")
    gs = gamma_star(spec)
    print(f"saddle height {gs.height}, barriers {dict((k, str(v)) for k, v in gs.barrier_from.items())}")


if __name__ == "__main__":
    main(sys.argv[1:])
