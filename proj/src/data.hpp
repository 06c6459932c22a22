#pragma once

#include <cstdint>
#include <string>

#include "assembly.hpp"

namespace rg {

/// Nodal initial data by name, interpolated at the vertices in every
/// component:
///   zero | constant(c) | bump(x0, [x1,] width) | random
/// "random" draws uniform values in [-1, 1] from the seed.
Vector initial_from_name(const std::string& spec, const Mesh& mesh, int m, std::uint64_t seed);

/// Source terms by name: none | constant(c) | pulse(x0, [x1,] width, t_on, t_off).
/// "none" returns an empty function.
SourceFn source_from_name(const std::string& spec, const Mesh& mesh, int m);

/// Vertex closest to the mean vertex position.
Index central_vertex(const Mesh& mesh);

/// Distance from a point to the boundary facets.
double distance_to_boundary(const Mesh& mesh, const Point& p);

}  // namespace rg
