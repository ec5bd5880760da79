"""Distances in two squares glued along a segment, and a convex pentagon for a closed chain."""

import numpy as np

from roughcat import ConvexPolygon, GluedPolygon, build_ngon_embedding, glued_distance

q1 = ConvexPolygon(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float))
q2 = ConvexPolygon(np.array([[1, 0.25], [1.5, 0.25], [1.5, 0.75], [1, 0.75]], float))
g = GluedPolygon(q1, q2, np.array([[1, 0.25], [1, 0.75]]))

a, b = np.array([0.5, 0.0]), np.array([1.5, 0.75])
print(f"glued distance {glued_distance(g, a, b):.6f}")

verts = [(0.1, 0.1), (0.9, 0.2), (1.4, 0.5), (0.9, 0.9), (0.2, 0.8)]
emb = build_ngon_embedding(g, verts, C_prime=0.0)
print("convex pentagon:")
print(np.round(emb.polygon.vertices, 6))
print(f"side lengths {np.round(emb.polygon.side_lengths, 6)}")
