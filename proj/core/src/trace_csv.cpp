#include "ncr/trace_csv.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "ncr/config_io.hpp"
#include "ncr/errors.hpp"

namespace ncr {

double parse_number(std::string_view text);

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "t_s",         "fx_N",        "fy_N",         "fz_N",         "tx_Nmm",      "ty_Nmm",
      "tz_Nmm",      "tension_1_N", "tension_2_N",  "setlen_1_mm",  "setlen_2_mm"};
  return cols;
}

const std::vector<std::string>& trace_truth_columns() {
  static const std::vector<std::string> cols = {"gt_fx_N",     "gt_fy_N",     "gt_fz_N",
                                                "gt_sc_mm",    "gt_contacts", "gt_tip_x_mm",
                                                "gt_tip_y_mm", "gt_tip_z_mm"};
  return cols;
}

void write_trace(std::ostream& out, const SensorTrace& trace) {
  const bool truth = trace.has_truth();
  auto header = trace_columns();
  if (truth) header.insert(header.end(), trace_truth_columns().begin(), trace_truth_columns().end());
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const ProximalFrame& f = trace.frames[i];
    const double row[] = {f.t,           f.force.x(),       f.force.y(),       f.force.z(),
                          f.torque.x(),  f.torque.y(),      f.torque.z(),      f.tensions[0],
                          f.tensions[1], f.set_lengths[0],  f.set_lengths[1]};
    bool first = true;
    for (double v : row) {
      out << (first ? "" : ",") << format_number(v);
      first = false;
    }
    if (truth) {
      const GroundTruth& g = trace.truth[i];
      const double gt[] = {g.force.x(), g.force.y(), g.force.z(), g.s_c,
                           static_cast<double>(g.contact_count), g.tip.x(), g.tip.y(), g.tip.z()};
      for (double v : gt) out << ',' << format_number(v);
    }
    out << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const SensorTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_trace(out, trace);
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

SensorTrace read_trace(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  const auto& base = trace_columns();
  const auto& gt = trace_truth_columns();
  const bool truth = header.size() == base.size() + gt.size();
  if (header.size() != base.size() && !truth)
    throw ParseError("expected " + std::to_string(base.size()) + " or " +
                         std::to_string(base.size() + gt.size()) + " columns",
                     1, 1);
  std::size_t col = 1;
  for (std::size_t k = 0; k < header.size(); ++k) {
    const std::string& want = k < base.size() ? base[k] : gt[k - base.size()];
    if (header[k] != want)
      throw ParseError("column " + std::to_string(k + 1) + " must be '" + want + "'", 1, col);
    col += header[k].size() + 1;
  }

  SensorTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no, 1);
    std::vector<double> v(cells.size());
    std::size_t column = 1;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      try {
        v[k] = parse_number(cells[k]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no, column);
      }
      column += cells[k].size() + 1;
    }
    ProximalFrame f{v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6]), {v[7], v[8]}, {v[9], v[10]}};
    if (!trace.frames.empty() && !(f.t > trace.frames.back().t))
      throw ParseError("timestamps must increase", line_no, 1);
    trace.frames.push_back(f);
    if (truth) {
      GroundTruth g;
      g.force = Vec3(v[11], v[12], v[13]);
      g.s_c = v[14];
      if (!(v[15] >= 0.0)) throw ParseError("gt_contacts must be non-negative", line_no, 1);
      g.contact_count = static_cast<std::size_t>(v[15]);
      g.tip = Vec3(v[16], v[17], v[18]);
      trace.truth.push_back(std::move(g));
    }
  }
  return trace;
}

SensorTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_trace(in);
}

}  // namespace ncr
