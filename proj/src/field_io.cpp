#include "vwlab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <vector>

#include "json.hpp"

namespace vw {

namespace {

static_assert(std::endian::native == std::endian::little, "VWF1 I/O assumes a little-endian host");

constexpr char kMagic[4] = {'V', 'W', 'F', '1'};
constexpr std::uint64_t kMaxHeader = 1 << 20;

struct Slot {
  const char* name;
  std::vector<int> shape;
};

const Slot kA{"A", {4, 3}};
const Slot kB{"B", {3, 3}};
const Slot kC{"C", {3}};
const Slot kTau{"tau", {3, 3}};

template <class V>
void write_payload(std::ostream& out, const Field<V>& f) {
  const auto data = f.flat();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
}

template <class V>
void read_payload(std::istream& in, Field<V>& f, const char* name) {
  auto data = f.flat();
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != data.size() * sizeof(double))
    throw FormatError(std::string("VWF1: truncated payload for field ") + name);
}

}  // namespace

void write_vwf1(std::ostream& out, const Configuration& cfg, const TauField* tau) {
  cfg.check_consistent();
  const Grid& g = cfg.grid();
  if (tau && !(tau->grid() == g)) throw GridMismatch("write_vwf1: tau grid differs");
  nlohmann::json header;
  header["dims"] = g.dims();
  header["h"] = g.h();
  header["fields"] = nlohmann::json::array();
  for (const Slot* s : {&kA, &kB, &kC}) header["fields"].push_back({{"name", s->name}, {"shape", s->shape}});
  if (tau) header["fields"].push_back({{"name", kTau.name}, {"shape", kTau.shape}});
  const std::string text = header.dump();
  const std::uint64_t len = text.size();

  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_payload(out, cfg.A);
  write_payload(out, cfg.B);
  write_payload(out, cfg.C);
  if (tau) write_payload(out, *tau);
  if (!out) throw IoError("write_vwf1: write failed");
}

void write_vwf1(const std::string& path, const Configuration& cfg, const TauField* tau) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_vwf1: cannot open " + path);
  write_vwf1(out, cfg, tau);
}

FieldFile read_vwf1(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("VWF1: bad magic");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (in.gcount() != sizeof len) throw FormatError("VWF1: truncated header length");
  if (len == 0 || len > kMaxHeader) throw FormatError("VWF1: implausible header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len) throw FormatError("VWF1: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("VWF1: header is not JSON: ") + e.what());
  }

  std::optional<Grid> grid;
  std::vector<std::string> names;
  try {
    const auto dims = header.at("dims").get<std::array<int, 4>>();
    grid.emplace(dims, header.at("h").get<double>());
    std::set<std::string> seen;
    for (const auto& f : header.at("fields")) {
      const auto name = f.at("name").get<std::string>();
      const auto shape = f.at("shape").get<std::vector<int>>();
      const Slot* slot = nullptr;
      for (const Slot* s : {&kA, &kB, &kC, &kTau})
        if (name == s->name) slot = s;
      if (!slot) throw FormatError("VWF1: unknown field " + name);
      if (shape != slot->shape) throw FormatError("VWF1: shape mismatch for field " + name);
      if (!seen.insert(name).second) throw FormatError("VWF1: duplicate field " + name);
      names.push_back(name);
    }
    for (const char* required : {"A", "B", "C"})
      if (!seen.count(required)) throw FormatError(std::string("VWF1: missing field ") + required);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("VWF1: malformed header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("VWF1: invalid grid: ") + e.what());
  }

  FieldFile out{Configuration(*grid), std::nullopt};
  for (const auto& name : names) {
    if (name == "A") read_payload(in, out.cfg.A, "A");
    else if (name == "B") read_payload(in, out.cfg.B, "B");
    else if (name == "C") read_payload(in, out.cfg.C, "C");
    else read_payload(in, out.tau.emplace(*grid), "tau");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("VWF1: trailing bytes after payload");
  return out;
}

FieldFile read_vwf1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("VWF1: cannot open " + path);
  return read_vwf1(in);
}

}  // namespace vw
