"""Barycentric subdivision, kept as a negative control: unlike median
subdivision it lets tets get thinner every round."""

import itertools

import numpy as np

from qnk.simplicial import Complex3, build_complex


def barycentric_subdivide(c: Complex3) -> Complex3:
    """Split each tet into 24 along its flags (vertex, edge, face, tet).

    New vertices are barycentres of simplices of ``c`` and are shared across
    tets through the sorted vertex tuple of the simplex.
    """
    verts = [tuple(v) for v in c.vertices]
    index = {(i,): i for i in range(len(verts))}

    def vid(simplex):
        key = tuple(sorted(int(v) for v in simplex))
        if key not in index:
            index[key] = len(verts)
            verts.append(tuple(c.vertices[list(key)].mean(axis=0)))
        return index[key]

    tets = []
    for tet in c.tets:
        for perm in itertools.permutations(tet):
            tets.append([vid(perm[:k]) for k in range(1, 5)])
    return build_complex(np.array(verts), tets, c.ambient)
