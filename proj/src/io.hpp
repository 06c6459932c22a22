#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "coercivity.hpp"
#include "verify.hpp"

namespace rg {

using Json = nlohmann::ordered_json;

/// "%.17g" rendering used for every floating-point value in text outputs.
std::string format_double(double v);

/// Trajectory CSV: header "step,t,u0,...", one row per snapshot.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
/// Sidecar with grid data and the per-snapshot energy log.
void write_energy_json(const Trajectory& traj, const std::string& path);

/// Kernel sample CSV with header x0[,x1],t,y0[,y1],s,g00,...,source.
void write_samples_csv(const std::vector<KernelSample>& samples, int dim, const std::string& path);
/// Reads a sample CSV; the dimension and m are taken from the header.
std::vector<KernelSample> read_samples_csv(const std::string& path, int* dim_out = nullptr);

/// Nodal elliptic Green's function: header x0[,x1],g00,... one row per vertex.
void write_nodal_csv(const Mesh& mesh, const Matrix& values, const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const Json& j);

/// Lower-case hex SHA-256 digest of a file's bytes.
std::string sha256_file(const std::string& path);

Json to_json(const CoercivityReport& r);
Json to_json(const EllipticityReport& r);
Json to_json(const ThetaReport& r);
Json to_json(const GaussianFit& f);
Json to_json(const BoundReport& r);
Json to_json(const DecayCheck& d);
Json to_json(const TimeGrid& g);

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

}  // namespace rg
