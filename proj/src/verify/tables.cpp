#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "tcsf/common.hpp"
#include "tcsf/verify.hpp"
#include "../common/text_util.hpp"

namespace tcsf {

namespace {

std::string fixed(double v, int precision = 2) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string optional_text(const std::optional<double>& v) { return v ? text::format_double(*v) : ""; }

}  // namespace

void write_table_text(std::ostream& out, const BinnedTable& table) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-14s %8s %8s %8s %6s\n", table.name.c_str(), "RMSE", "MAE", "Bias", "N");
  out << buf;
  for (std::size_t b = 0; b < table.labels.size(); ++b) {
    const auto& s = table.scores[b];
    std::snprintf(buf, sizeof buf, "%-14s %8s %8s %8s %6d\n", table.labels[b].c_str(), fixed(s.rmse).c_str(),
                  fixed(s.mae).c_str(), fixed(s.bias).c_str(), s.n);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-14s %8s %8s %8s %6d\n", "unbinned", "", "", "", table.unbinned);
  out << buf;
}

void write_table_csv(std::ostream& out, const BinnedTable& table) {
  out << "table,bin,rmse,mae,bias,n\n";
  for (std::size_t b = 0; b < table.labels.size(); ++b) {
    const auto& s = table.scores[b];
    out << table.name << ',' << table.labels[b] << ',' << (s.n ? text::format_double(s.rmse) : "") << ','
        << (s.n ? text::format_double(s.mae) : "") << ',' << (s.n ? text::format_double(s.bias) : "") << ',' << s.n
        << '\n';
  }
  out << table.name << ",unbinned,,,," << table.unbinned << '\n';
}

void write_trajectory_table(std::ostream& out, const TrajectoryScore& score, bool csv) {
  if (csv) {
    out << "lead_h,rmv,mad,bias\n";
    for (const auto& [lead, p] : score.per_lead) {
      out << lead << ',' << text::format_double(p.rmv) << ',' << text::format_double(p.mad) << ','
          << text::format_double(p.bias) << '\n';
    }
    out << "all," << text::format_double(score.rmv) << ',' << text::format_double(score.mad) << ','
        << text::format_double(score.bias) << '\n';
    return;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s   (times %d, members %d)\n", "lead", "RMV", "MAD", "Bias",
                score.n_times, score.n_members);
  out << buf;
  for (const auto& [lead, p] : score.per_lead) {
    std::snprintf(buf, sizeof buf, "%4dh  %8s %8s %8s\n", lead, fixed(p.rmv).c_str(), fixed(p.mad).c_str(),
                  fixed(p.bias).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s\n", "all", fixed(score.rmv).c_str(), fixed(score.mad).c_str(),
                fixed(score.bias).c_str());
  out << buf;
}

void write_records_csv(std::ostream& out, const std::vector<VerificationRecord>& records) {
  out << "storm_id,time,lead_h,prediction,truth,delta6h,shear_kt,shear_dir\n";
  for (const auto& r : records) {
    out << r.storm_id << ',' << format_iso(r.time) << ',' << r.lead_h << ',' << text::format_double(r.prediction)
        << ',' << text::format_double(r.truth) << ',' << optional_text(r.delta6h) << ','
        << optional_text(r.shear_magnitude) << ',' << optional_text(r.shear_direction) << '\n';
  }
}

std::vector<VerificationRecord> read_records_csv(std::istream& in) {
  std::vector<VerificationRecord> out;
  std::string line;
  int n = 0;
  const auto optional_cell = [&](std::string_view cell, const char* field) -> std::optional<double> {
    if (text::trim(cell).empty()) return std::nullopt;
    const auto v = text::to_double(text::trim(cell));
    if (!v) throw ParseError(n, field, "not a number");
    return v;
  };
  const auto required = [&](std::string_view cell, const char* field) {
    const auto v = optional_cell(cell, field);
    if (!v) throw ParseError(n, field, "missing value");
    return *v;
  };
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    if (n == 1 && line.rfind("storm_id", 0) == 0) continue;
    // Keep trailing empty cells: split_commas drops only a final empty field.
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(text::trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 8) throw ParseError(n, "record", "expected 8 columns");
    VerificationRecord r;
    r.storm_id = std::string(cells[0]);
    try {
      r.time = parse_time(cells[1]);
    } catch (const Error& e) {
      throw ParseError(n, "time", e.what());
    }
    r.lead_h = static_cast<int>(required(cells[2], "lead_h"));
    r.prediction = required(cells[3], "prediction");
    r.truth = required(cells[4], "truth");
    r.delta6h = optional_cell(cells[5], "delta6h");
    r.shear_magnitude = optional_cell(cells[6], "shear_kt");
    r.shear_direction = optional_cell(cells[7], "shear_dir");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tcsf
