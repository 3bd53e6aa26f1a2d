"""Snapping-fixture synthesis for polyhedral workpieces.

A fixture is a palm facet plus up to four fingers, each finger a (body,
tip) pair of facets. :func:`minimal_snapping_fixture` finds one with the
fewest fingers, :func:`enumerate_fixtures` lists them all, and
:func:`build_fixture_solid` turns one into a printable multi-shell solid.
"""

from .cover import (EPS_ANTI, EPS_COVER, CoverWitness, Hemisphere, Semicircle, covers_circle,
                    covers_closed_hemisphere, covers_sphere, hemisphere_of, reduce_cover_circle,
                    reduce_cover_closed_hemisphere, reduce_cover_closed_semicircle,
                    reduce_cover_sphere)
from .kernels import BACKEND
from .mesh import (MeshError, Polyhedron, genus, load_mesh, merge_coplanar_facets, neighbors,
                   polyhedron_from_polygons)
from .solid import (ExtrusionParams, JointFeasibility, SolidError, SolidMesh, build_fixture_solid,
                    export_mesh, max_fingertip_width)
from .synth import (Finger, Fixture, FixtureError, QualityMetrics, SynthesisResult, best_fixture,
                    count_minimal, enumerate_fixtures, minimal_fixtures, minimal_snapping_fixture,
                    quality_of, serving_direction, valid_fixture)

__version__ = "0.1.0"
