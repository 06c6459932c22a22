#pragma once

#include <string>
#include <vector>

namespace rg {

/// "name(a1, a2, ...)" with numeric arguments; a bare name has no arguments.
struct CatalogName {
  std::string name;
  std::vector<double> args;
};

CatalogName parse_catalog_name(const std::string& spec);

}  // namespace rg
