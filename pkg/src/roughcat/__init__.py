"""Numerical certificates for rough CAT(0) conditions on finite and desk-scale spaces.

The main entry points:

- :func:`validate_metric`, :class:`GraphSpace` and friends for input spaces;
- :func:`minimal_defect_ordered` / :func:`minimal_defect_set`, the smallest
  constant for which a tuple has a rough subembedding into the plane;
- :func:`rcat_space_defect`, sampled triangle defects;
- :func:`build_ngon_embedding`, convex polygons for closed chains;
- :func:`defect_trend`, defect series along sequences of spaces.
"""

from .errors import RoughCatError
from .experiments import SpaceSequence, defect_trend, five_point_limit_check, limit_constant
from .metric_core import (FiniteMetric, GraphSpace, PlaneSpace, Polyline, cycle_graph, path_graph,
                          path_metric, random_tree, square_net, star_graph, tuple_distances,
                          validate_metric)
from .plane_geometry import comparison_point, comparison_triangle, lemma32_check, short_segment_projection
from .polygon_gluing import (ConvexPolygon, GluedPolygon, build_ngon_embedding, convexify,
                             glued_distance, intrinsic_polygon_distance, verify_An)
from .rcat_certify import HParams, h_threshold, rcat_space_defect, rcat_triangle_defect, short_triangle
from .subembedding import (brute_force_oracle, minimal_defect_ordered, minimal_defect_set,
                           realize_chain, subembedding_slack)

__version__ = "0.1.0"
