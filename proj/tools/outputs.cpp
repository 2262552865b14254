#include "outputs.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace heartsim::cli {

std::string fixed(double value, int decimals) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  std::string s(buf, end);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

namespace {

void header(std::ostream& out, const std::vector<std::string>& ids) {
  out << "time_ms";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
}

template <typename Matrix>
void write_integer_matrix(std::ostream& out, const Trace& trace, const std::vector<std::string>& ids,
                          const Matrix& m) {
  header(out, ids);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << fixed(trace.times[static_cast<std::size_t>(r)], 4);
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << static_cast<int>(m(r, c));
    out << '\n';
  }
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  header(out, trace.node_ids);
  for (Eigen::Index r = 0; r < trace.potential.rows(); ++r) {
    out << fixed(trace.times[static_cast<std::size_t>(r)], 4);
    for (Eigen::Index c = 0; c < trace.potential.cols(); ++c) out << ',' << fixed(trace.potential(r, c), 6);
    out << '\n';
  }
}

void write_locations_csv(std::ostream& out, const Trace& trace) {
  write_integer_matrix(out, trace, trace.node_ids, trace.location);
}

void write_path_locations_csv(std::ostream& out, const Trace& trace) {
  write_integer_matrix(out, trace, trace.path_ids, trace.path_location);
}

void write_activation_csv(std::ostream& out, const std::vector<Activation>& report) {
  out << "node_id,first_q2_entry_ms,q2_entry_count\n";
  for (const auto& a : report) {
    out << a.node_id << ',';
    if (a.first_q2_entry_ms) out << fixed(*a.first_q2_entry_ms, 4);
    out << ',' << a.q2_entry_count << '\n';
  }
}

void write_restitution_csv(std::ostream& out, const std::vector<RestitutionPoint>& points) {
  out << "bcl_ms,di_ms,apd_ms\n";
  for (const auto& p : points) out << fixed(p.bcl_ms, 4) << ',' << fixed(p.di_ms, 4) << ',' << fixed(p.apd_ms, 4) << '\n';
}

nlohmann::json settings_to_json(const SimSettings& s) {
  return {{"dt_ms", s.dt_ms},
          {"duration_ms", s.duration_ms},
          {"record_decimation", s.record_decimation},
          {"integrator", std::string(to_string(s.integrator))},
          {"record_paths", s.record_paths}};
}

SimSettings settings_from_json(const nlohmann::json& j) {
  SimSettings s;
  s.dt_ms = j.at("dt_ms").get<double>();
  s.duration_ms = j.at("duration_ms").get<double>();
  s.record_decimation = j.at("record_decimation").get<std::size_t>();
  s.integrator = integrator_from_string(j.at("integrator").get<std::string>());
  s.record_paths = j.value("record_paths", false);
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace heartsim::cli
