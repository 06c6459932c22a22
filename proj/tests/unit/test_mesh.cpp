#include <cmath>

#include <gtest/gtest.h>

#include "error.hpp"
#include "mesh.hpp"

namespace rg {
namespace {

TEST(Mesh, IntervalFourCells) {
  const Mesh m = build_interval_mesh(0.0, 1.0, 4);
  ASSERT_EQ(m.num_vertices(), 5u);
  for (Index v = 0; v < 5; ++v) EXPECT_DOUBLE_EQ(m.vertex(v)[0], 0.25 * static_cast<double>(v));
  EXPECT_DOUBLE_EQ(m.diameter(), 1.0);
  EXPECT_EQ(m.dimension(), 1);
}

TEST(Mesh, IntervalSingleCell) {
  const Mesh m = build_interval_mesh(0.0, 1.0, 1);
  EXPECT_EQ(m.num_vertices(), 2u);
  EXPECT_EQ(m.num_cells(), 1u);
  ASSERT_EQ(m.num_facets(), 2u);
  EXPECT_NE(m.facet_patch(0), m.facet_patch(1));
}

TEST(Mesh, IntervalShifted) {
  const Mesh m = build_interval_mesh(-2.0, 3.0, 10);
  EXPECT_NEAR(m.diameter(), 5.0, 1e-12);
  for (Index c = 0; c < m.num_cells(); ++c) EXPECT_NEAR(m.cell_measure(c), 0.5, 1e-14);
}

TEST(Mesh, IntervalRejectsBadInput) {
  EXPECT_THROW(build_interval_mesh(0.0, 1.0, 0), Error);
  EXPECT_THROW(build_interval_mesh(1.0, 0.0, 4), Error);
  EXPECT_THROW(build_interval_mesh(0.0, INFINITY, 4), Error);
}

TEST(Mesh, UnitSquareSplit) {
  const Mesh m = build_rectangle_mesh(1.0, 1.0, 1, 1);
  EXPECT_EQ(m.num_vertices(), 4u);
  EXPECT_EQ(m.num_cells(), 2u);
  EXPECT_EQ(m.num_facets(), 4u);
}

TEST(Mesh, RectangleTwoByTwo) {
  const Mesh m = build_rectangle_mesh(1.0, 1.0, 2, 2);
  EXPECT_EQ(m.num_vertices(), 9u);
  EXPECT_EQ(m.num_cells(), 8u);
  EXPECT_NEAR(m.measure(), 1.0, 1e-14);
  EXPECT_EQ(m.num_facets(), 8u);
}

TEST(Mesh, RectangleDiameter) {
  const Mesh m = build_rectangle_mesh(2.0, 1.0, 4, 2);
  EXPECT_NEAR(m.diameter(), std::sqrt(5.0), 1e-12);
  EXPECT_THROW(build_rectangle_mesh(0.0, 1.0, 1, 1), Error);
}

TEST(Mesh, LShapeGeometry) {
  const Mesh m = build_lshape_mesh(2);
  EXPECT_NEAR(m.measure(), 0.75, 1e-12);
  EXPECT_NEAR(m.boundary_measure(), 4.0, 1e-12);
  const Mesh r = refine(refine(m));
  EXPECT_NEAR(r.measure(), 0.75, 1e-12);
  EXPECT_NEAR(r.boundary_measure(), 4.0, 1e-12);
  EXPECT_THROW(build_lshape_mesh(0), Error);
}

TEST(Mesh, RefineCounts) {
  EXPECT_EQ(refine(build_interval_mesh(0.0, 1.0, 2)).num_cells(), 4u);
  const Mesh sq = build_rectangle_mesh(1.0, 1.0, 1, 1);
  const Mesh r = refine(sq);
  EXPECT_EQ(r.num_cells(), 8u);
  EXPECT_EQ(r.num_facets(), 2 * sq.num_facets());
  EXPECT_NEAR(r.measure(), 1.0, 1e-14);
}

TEST(Mesh, BoundaryFacetsCoverBoundary) {
  for (const Mesh& m : {build_rectangle_mesh(2.0, 1.0, 3, 5), build_lshape_mesh(3)}) {
    std::size_t on = 0;
    for (bool b : m.boundary_vertices()) on += b ? 1 : 0;
    // A closed polygonal boundary has as many vertices as edges.
    EXPECT_EQ(on, m.num_facets());
  }
}

TEST(Mesh, ParabolicDistance) {
  const SpaceTimePoint a{{0.0, 0.0}, 0.0};
  EXPECT_DOUBLE_EQ(parabolic_distance(a, {{0.3, 0.4}, 0.01}, 2), 0.5);
  EXPECT_DOUBLE_EQ(parabolic_distance(a, {{0.1, 0.0}, 0.25}, 1), 0.5);
}

TEST(Mesh, LocateAndNearest) {
  const Mesh m = build_rectangle_mesh(1.0, 1.0, 4, 4);
  const auto loc = m.locate({0.3, 0.6});
  ASSERT_TRUE(loc.has_value());
  EXPECT_NEAR(loc->weights[0] + loc->weights[1] + loc->weights[2], 1.0, 1e-14);
  EXPECT_FALSE(m.locate({1.5, 0.5}).has_value());
  const Index v = m.nearest_vertex({0.49, 0.51});
  EXPECT_DOUBLE_EQ(m.vertex(v)[0], 0.5);
  EXPECT_DOUBLE_EQ(m.vertex(v)[1], 0.5);
}

TEST(Mesh, JsonRoundTrip) {
  const Mesh m = build_lshape_mesh(2);
  const Mesh r = mesh_from_json(mesh_to_json(m));
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  ASSERT_EQ(r.num_cells(), m.num_cells());
  EXPECT_EQ(r.num_facets(), m.num_facets());
  for (Index v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(r.vertex(v), m.vertex(v));
}

}  // namespace
}  // namespace rg
