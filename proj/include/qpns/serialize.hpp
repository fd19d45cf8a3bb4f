#pragma once

#include <iosfwd>
#include <string>

#include "qpns/reduced_form.hpp"

namespace qpns {

/// Binary artifacts: magic + format version header, then little-endian
/// 64-bit floats. Loading a mismatched version or magic fails loudly.
inline constexpr std::uint32_t kFormatVersion = 1;

void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);
void save_field(const std::string& path, const Field& f);
Field load_field(const std::string& path);

void write_top(std::ostream& os, const TOp& t);
TOp read_top(std::istream& is);

void write_reduced_form(std::ostream& os, const ReducedForm& rf);
ReducedForm read_reduced_form(std::istream& is);
void save_reduced_form(const std::string& path, const ReducedForm& rf);
ReducedForm load_reduced_form(const std::string& path);

/// JSON-compatible text form for small fields: lattice header plus mode
/// list in lexicographic (l, j) order.
std::string field_to_json(const Field& f);
Field field_from_json(const std::string& text);

/// Spectrum table rows (j1, j2, Re q, Im q).
std::string spectrum_to_csv(const Spectrum& s);

/// FNV-1a hash of a string; used to fingerprint configs in manifests.
std::uint64_t fnv1a(const std::string& text);

}  // namespace qpns
