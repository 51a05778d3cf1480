#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "../common/text_util.hpp"
#include "tcsf/common.hpp"
#include "tcsf/orb.hpp"

namespace tcsf {

namespace fs = std::filesystem;

void write_profile_csv(std::ostream& out, const std::vector<StormProfiles>& storms) {
  out << "storm_id,time,quadrant,bin_index,value_degC,valid_count\n";
  for (const auto& storm : storms) {
    for (const auto& [t, set] : storm.series) {
      const std::string when = format_iso(t);
      for (int q = 0; q < kQuadrants; ++q) {
        for (int k = 0; k < kRadialBins; ++k) {
          out << storm.storm_id << ',' << when << ',' << kQuadrantNames[q] << ',' << k << ','
              << text::format_double(set.values[q][k]) << ',' << set.valid_counts[q][k] << '\n';
        }
      }
    }
  }
}

namespace {

int quadrant_index(std::string_view name, int line) {
  for (int q = 0; q < kQuadrants; ++q) {
    if (name == kQuadrantNames[q]) return q;
  }
  throw ParseError(line, "quadrant", "unknown quadrant '" + std::string(name) + "'");
}

}  // namespace

std::vector<StormProfiles> read_profile_csv(std::istream& in) {
  std::vector<StormProfiles> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 || text::trim(line).empty()) continue;
    const auto f = text::split_commas(line);
    if (f.size() != 6) throw ParseError(n, "record", "expected 6 columns");
    const std::string id(f[0]);
    auto [it, inserted] = index.try_emplace(id, out.size());
    if (inserted) out.push_back({id, {}});
    const UtcTime t = parse_time(f[1]);
    const int q = quadrant_index(f[2], n);
    const auto k = text::to_long(f[3]);
    const auto v = text::to_double(f[4]);
    const auto c = text::to_long(f[5]);
    if (!k || *k < 0 || *k >= kRadialBins) throw ParseError(n, "bin_index", "out of range");
    if (!v) throw ParseError(n, "value_degC", "not a number");
    if (!c || *c < 0) throw ParseError(n, "valid_count", "not a count");
    auto& set = out[it->second].series[t];
    set.time = t;
    set.values[q][*k] = *v;
    set.valid_counts[q][*k] = static_cast<int>(*c);
  }
  return out;
}

namespace {

void put_u32(std::vector<char>& bytes, std::uint32_t u) {
  for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const std::vector<char>& bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw Error(ErrorCode::shape, "profile archive payload truncated");
  std::uint32_t u = 0;
  for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
  pos += 4;
  return u;
}

}  // namespace

void store_profile_archive(const std::vector<StormProfiles>& storms, const fs::path& base) {
  fs::path hdr_path = base, bin_path = base;
  hdr_path += ".hdr";
  bin_path += ".bin";
  if (hdr_path.has_parent_path()) fs::create_directories(hdr_path.parent_path());
  std::ofstream hdr(hdr_path);
  if (!hdr) throw Error(ErrorCode::io, "cannot write " + hdr_path.string());
  hdr << "format tcsf-profiles 1\nquadrants NE NW SW SE\nbins 80\nunits degC\n";
  std::vector<char> bytes;
  for (const auto& storm : storms) {
    hdr << "storm " << storm.storm_id << ' ' << storm.series.size() << '\n';
    for (const auto& [t, set] : storm.series) {
      hdr << "time " << format_iso(t) << '\n';
      for (int q = 0; q < kQuadrants; ++q) {
        for (int k = 0; k < kRadialBins; ++k) {
          put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(set.values[q][k])));
        }
      }
      for (int q = 0; q < kQuadrants; ++q) {
        for (int k = 0; k < kRadialBins; ++k) put_u32(bytes, static_cast<std::uint32_t>(set.valid_counts[q][k]));
      }
    }
  }
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::io, "cannot write " + bin_path.string());
  bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<StormProfiles> load_profile_archive(const fs::path& base) {
  fs::path hdr_path = base, bin_path = base;
  hdr_path += ".hdr";
  bin_path += ".bin";
  std::ifstream hdr(hdr_path);
  if (!hdr) throw Error(ErrorCode::io, "cannot read " + hdr_path.string());
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::io, "cannot read " + bin_path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  std::vector<StormProfiles> out;
  std::string line;
  std::size_t pos = 0;
  std::getline(hdr, line);
  if (text::trim(line) != "format tcsf-profiles 1") throw Error(ErrorCode::parse, "not a profile archive");
  while (std::getline(hdr, line)) {
    const auto tok = text::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "storm" && tok.size() == 3) {
      out.push_back({std::string(tok[1]), {}});
    } else if (tok[0] == "time" && tok.size() == 2) {
      if (out.empty()) throw Error(ErrorCode::parse, "profile archive: time before storm");
      RadialProfileSet set;
      set.time = parse_time(tok[1]);
      for (int q = 0; q < kQuadrants; ++q) {
        for (int k = 0; k < kRadialBins; ++k) set.values[q][k] = std::bit_cast<float>(get_u32(bytes, pos));
      }
      for (int q = 0; q < kQuadrants; ++q) {
        for (int k = 0; k < kRadialBins; ++k) set.valid_counts[q][k] = static_cast<int>(get_u32(bytes, pos));
      }
      out.back().series[set.time] = set;
    }
  }
  if (pos != bytes.size()) throw Error(ErrorCode::shape, "profile archive payload larger than header declares");
  return out;
}

}  // namespace tcsf
