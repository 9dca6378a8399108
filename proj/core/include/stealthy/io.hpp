#ifndef STEALTHY_IO_HPP
#define STEALTHY_IO_HPP

#include <iosfwd>
#include <string>

#include "stealthy/gaussian_field.hpp"
#include "stealthy/points.hpp"

namespace stealthy {

// Point sets: CSV with '#' metadata lines (d, box_length, N, gap descriptor,
// final energy), a column-header row, then one point per row.
void write_points_csv(std::ostream& os, const PointConfiguration& cfg);
PointConfiguration read_points_csv(std::istream& is);
void save_points_csv(const std::string& path, const PointConfiguration& cfg);
PointConfiguration load_points_csv(const std::string& path);

// Field records: little-endian binary, header (magic, d, n, box_length,
// seed, index) followed by n^d doubles in site-lexicographic order. The CSV
// variant carries the same header as '#' lines.
void write_field_binary(std::ostream& os, const FieldRealization& f);
FieldRealization read_field_binary(std::istream& is);
void save_field_binary(const std::string& path, const FieldRealization& f);
FieldRealization load_field_binary(const std::string& path);
void write_field_csv(std::ostream& os, const FieldRealization& f);
FieldRealization read_field_csv(std::istream& is);

// Structure functions as JSON: {geometry, family, params, optional explicit
// per-mode values in mode_grid order, gap}.
std::string structure_function_to_json(const StructureFunction& S);
StructureFunction structure_function_from_json(const std::string& text);

/// FNV-1a hash of a report body; the CLI excludes the timestamp field before
/// hashing so reruns of the same config hash identically.
std::uint64_t report_hash(const std::string& canonical_text);

} // namespace stealthy

#endif
