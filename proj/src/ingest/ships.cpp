#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "tcsf/common.hpp"
#include "tcsf/ingest.hpp"
#include "../common/text_util.hpp"

namespace tcsf {

namespace {

struct Row {
  int line = 0;
  std::vector<std::string_view> cells;  // without the trailing name
  std::string storage;
};

struct Block {
  int head_line = 0;
  std::string storm_id;
  std::optional<UtcTime> time;
  std::map<std::string, Row> rows;
};

// Value of variable `name` in the TIME=0 column. Empty optional with no issue
// recorded means the row is absent.
std::optional<double> time_zero_cell(const Block& block, std::size_t column, const std::string& name,
                                     std::vector<ParseIssue>& errors) {
  const auto it = block.rows.find(name);
  if (it == block.rows.end()) return std::nullopt;
  const Row& row = it->second;
  if (column >= row.cells.size()) {
    errors.push_back({row.line, name, "row shorter than TIME row"});
    return std::nullopt;
  }
  const auto v = text::to_double(row.cells[column]);
  if (!v) {
    errors.push_back({row.line, name, "unparseable value '" + std::string(row.cells[column]) + "'"});
  }
  return v;
}

void finish_block(const Block& block, const ShipsConfig& config, ShipsResult& result) {
  if (block.storm_id.empty() || !block.time) return;
  const auto time_row = block.rows.find("TIME");
  if (time_row == block.rows.end()) {
    result.warnings.push_back({block.head_line, "TIME", block.storm_id + ": block has no TIME row"});
    return;
  }
  std::optional<std::size_t> zero_column;
  for (std::size_t i = 0; i < time_row->second.cells.size(); ++i) {
    const auto h = text::to_long(time_row->second.cells[i]);
    if (h && *h == 0) {
      zero_column = i;
      break;
    }
  }
  if (!zero_column) {
    result.errors.push_back({time_row->second.line, "TIME", "no TIME=0 column"});
    return;
  }
  if (!block.rows.count(config.magnitude_variable)) {
    result.warnings.push_back({block.head_line, config.magnitude_variable,
                               block.storm_id + " " + format_compact(*block.time) + ": no " +
                                   config.magnitude_variable + " row; record omitted"});
    return;
  }
  const auto magnitude = time_zero_cell(block, *zero_column, config.magnitude_variable, result.errors);
  if (!magnitude) return;
  if (*magnitude == config.missing_sentinel) {
    result.warnings.push_back({block.rows.at(config.magnitude_variable).line, config.magnitude_variable,
                               "missing sentinel; record omitted"});
    return;
  }
  ShearRecord record;
  record.storm_id = block.storm_id;
  record.time = *block.time;
  record.magnitude = *magnitude * config.magnitude_scale;
  if (record.magnitude < 0.0) {
    result.errors.push_back({block.rows.at(config.magnitude_variable).line, config.magnitude_variable,
                             "negative shear magnitude"});
    return;
  }
  if (const auto dir = time_zero_cell(block, *zero_column, config.direction_variable, result.errors);
      dir && *dir != config.missing_sentinel) {
    double d = std::fmod(*dir * config.direction_scale, 360.0);
    if (d < 0.0) d += 360.0;
    record.direction = d;
  }
  result.records.push_back(std::move(record));
}

}  // namespace

ShipsResult parse_ships_shear(std::istream& in, const ShipsConfig& config) {
  ShipsResult result;
  std::optional<Block> block;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto tokens = text::split_ws(raw);
    if (tokens.empty()) continue;
    const std::string name(tokens.back());
    if (name == "HEAD") {
      if (block) finish_block(*block, config, result);
      block.emplace();
      block->head_line = line;
      if (tokens.size() < 9 || tokens[1].size() != 6 || !text::all_digits(tokens[1]) ||
          !text::to_long(tokens[2])) {
        result.errors.push_back({line, "HEAD", "malformed HEAD line"});
        block.reset();
        continue;
      }
      block->storm_id = std::string(tokens[7]);
      const int yy = static_cast<int>(*text::to_long(tokens[1].substr(0, 2)));
      try {
        block->time = make_time(yy < 50 ? 2000 + yy : 1900 + yy,
                                static_cast<int>(*text::to_long(tokens[1].substr(2, 2))),
                                static_cast<int>(*text::to_long(tokens[1].substr(4, 2))),
                                static_cast<int>(*text::to_long(tokens[2])));
      } catch (const Error&) {
        result.errors.push_back({line, "HEAD", "invalid date in HEAD line"});
        block.reset();
      }
      continue;
    }
    if (name == "LAST") {
      if (block) finish_block(*block, config, result);
      block.reset();
      continue;
    }
    if (!block) continue;
    // Map nodes are stable, so the views may point into the stored copy.
    Row& stored = block->rows[name];
    stored.line = line;
    stored.storage = raw;
    const auto own = text::split_ws(stored.storage);
    stored.cells.assign(own.begin(), own.end() - 1);
  }
  if (block) finish_block(*block, config, result);
  return result;
}

void write_ships(std::ostream& out, const std::vector<ShipsCase>& cases, const ShipsConfig& config) {
  char buf[64];
  const auto row = [&](const std::optional<double>& value, const std::string& name) {
    const long cell = value ? std::lround(*value) : std::lround(config.missing_sentinel);
    for (int h = -12; h <= 120; h += 6) {
      std::snprintf(buf, sizeof buf, "%5ld", cell);
      out << buf;
    }
    out << ' ' << name << '\n';
  };
  for (const auto& c : cases) {
    const std::string stamp = format_compact(c.time);
    std::snprintf(buf, sizeof buf, " %s%s %s %s %4ld %5.1f %6.1f", c.storm_id.substr(0, 2).c_str(),
                  c.storm_id.substr(2, 2).c_str(), stamp.substr(2, 6).c_str(), stamp.substr(8, 2).c_str(),
                  std::lround(c.vmax), c.lat, -c.lon);
    out << buf << " 1000 " << c.storm_id << " HEAD\n";
    for (int h = -12; h <= 120; h += 6) {
      std::snprintf(buf, sizeof buf, "%5d", h);
      out << buf;
    }
    out << " TIME\n";
    row(c.magnitude_raw, config.magnitude_variable);
    row(c.direction_raw, config.direction_variable);
    out << " LAST\n";
  }
}

}  // namespace tcsf
