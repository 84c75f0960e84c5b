"""Random points and constructed diagonal pairs in products of metric trees."""

from fractions import Fraction


def random_point(tree, rng):
    kind = rng.choice(["v", "e", "l"] if tree.legs else ["v", "e"])
    if kind == "v":
        return ("v", rng.choice(sorted(tree.vertices())))
    if kind == "e":
        k = rng.randrange(len(tree.edges))
        length = Fraction(tree.edges[k][2])
        return ("e", k, length * Fraction(rng.randint(1, 7), 8))
    return ("l", rng.randrange(len(tree.legs)), Fraction(rng.randint(1, 40), 4))


def random_pair(space, rng):
    p = tuple(random_point(f, rng) for f in space.factors)
    q = tuple(random_point(f, rng) for f in space.factors)
    return p, q


def diagonal_pair_from(space, rng):
    """Move every factor the same distance towards a far leg point."""
    p = tuple(random_point(f, rng) for f in space.factors)
    far = tuple(("l", rng.randrange(len(f.legs)), Fraction(rng.randint(20, 60))) for f in space.factors)
    step = min(f.distance(x, y) for f, x, y in zip(space.factors, p, far))
    step = step * Fraction(rng.randint(1, 8), 8)
    q = tuple(f.along(x, y, step) for f, x, y in zip(space.factors, p, far))
    return p, q
