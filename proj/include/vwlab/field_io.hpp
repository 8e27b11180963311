#pragma once

// VWF1 container: "VWF1", u64 little-endian header length, JSON header
// {dims, h, fields: [{name, shape}]}, then one little-endian f64 payload per
// field in header order (sites x prod(shape) values, site-major).

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "vwlab/vwmap.hpp"

namespace vw {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FieldFile {
  Configuration cfg;
  std::optional<TauField> tau;
};

void write_vwf1(std::ostream& out, const Configuration& cfg, const TauField* tau = nullptr);
void write_vwf1(const std::string& path, const Configuration& cfg, const TauField* tau = nullptr);

/// Throws FormatError on a bad magic, header, shape or payload length and
/// IoError when the file cannot be opened.
FieldFile read_vwf1(std::istream& in);
FieldFile read_vwf1(const std::string& path);

}  // namespace vw
