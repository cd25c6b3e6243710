#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "alfven/grid.hpp"
#include "alfven/state.hpp"
#include "alfven/weights.hpp"

namespace alfven {

/// One named float64 array of the field container.
struct NamedArray {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

/// Contents of the text sidecar `<file>.meta`.
struct SnapshotMeta {
    Grid3 grid;
    double t = 0.0;
    double epsilon = 0.0;
    WeightParams weight;
    std::map<std::string, std::string> extra;
};

struct Container {
    std::vector<NamedArray> arrays;
    SnapshotMeta meta;

    [[nodiscard]] const NamedArray& find(const std::string& name) const;
};

/// Binary layout (all integers and floats little-endian):
///   "ALFVSNP1" | u32 count | count x { u16 name_len | name | u8 rank |
///   u64 dims[rank] | f64 data[prod(dims)] }
void write_container(const std::filesystem::path& path, const std::vector<NamedArray>& arrays,
                     const SnapshotMeta& meta);
Container read_container(const std::filesystem::path& path);

NamedArray to_array(const std::string& name, const ScalarField& f);
std::vector<NamedArray> to_arrays(const std::string& prefix, const VectorField& v);
VectorField vector_from(const Container& c, const std::string& prefix);

void write_state(const std::filesystem::path& path, const ElsasserState& s, double epsilon,
                 const WeightParams& weight, const std::map<std::string, std::string>& extra = {});
ElsasserState read_state(const std::filesystem::path& path);

}  // namespace alfven
