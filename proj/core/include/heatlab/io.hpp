#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "heatlab/semigroup.hpp"
#include "heatlab/solutions.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

/// Shortest round-trip decimal rendering; every artifact writer goes through
/// it so identical runs produce byte-identical files.
std::string format_double(double v);

/// Spaces as JSON documents:
///   {"schema": "heatlab-space/1", "vertices": n, "mu": [...],
///    "edges": [[u, v, w], ...], "killing": [...]}
std::string space_to_json(const DirichletSpace& space);
DirichletSpace space_from_json(const std::string& text);
void save_space(const DirichletSpace& space, const std::filesystem::path& path);
DirichletSpace load_space(const std::filesystem::path& path);

/// Accepts builder expressions — path(40,0.25,absorbing,reflecting),
/// cycle(6), cycle(6,1,1), grid(12,12,0.25) — or a path to a space JSON file.
DirichletSpace parse_space_arg(const std::string& arg);

/// Space-time functions as CSV (header t,vertex,value; every vertex listed
/// per time row-block).  The claimed domain, nonnegativity flag and space
/// hash travel in a JSON sidecar at `<csv_path>.json`; loading tolerates a
/// missing sidecar (full claim assumed) but rejects a space-hash mismatch.
void save_solution(const DirichletSpace& space, const SpaceTimeFunction& u,
                   const std::filesystem::path& csv_path);
SpaceTimeFunction load_solution(const DirichletSpace& space,
                                const std::filesystem::path& csv_path);

/// CSV (vertex,mass), zero atoms skipped.
void save_measure(const AtomicMeasure& nu, const std::filesystem::path& csv_path);

/// Kernel slices as CSV (t,x,y,p) over all pairs for each requested time.
void dump_kernel(const HeatEngine& engine, const std::vector<double>& times,
                 const std::filesystem::path& csv_path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace heatlab
