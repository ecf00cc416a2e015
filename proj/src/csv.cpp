#include "daverpg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace daverpg {

namespace {

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_rows(std::string& out, const Trace& trace, const ConvergenceReport& report,
                 bool with_bounds) {
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const TraceRecord& rec = trace.records[r];
    const std::size_t row = r + 1;  // report row 0 is the initial state
    const auto kappa = static_cast<std::int64_t>(r);
    const int m = report.epoch_index[row];
    out += std::to_string(rec.k);
    out += ',';
    append_num(out, rec.sim_time);
    out += ',';
    out += std::to_string(rec.worker);
    out += ',';
    out += std::to_string(rec.reps);
    out += ',';
    out += std::to_string(m);
    out += ',';
    out += std::to_string(report.delays.max_delay_at(kappa));
    out += ',';
    append_num(out, report.suboptimality[row]);
    out += ',';
    append_num(out, report.distance_sq[row]);
    out += ',';
    append_num(out, report.residual_norm[row]);
    if (with_bounds) {
      const auto um = static_cast<std::size_t>(m);
      out += ',';
      append_num(out, report.bound_strong[um]);
      out += ',';
      append_num(out, report.bound_tighter[um]);
      out += ',';
      append_num(out, report.bound_residual[um]);
    }
    out += '\n';
  }
}

}  // namespace

std::string export_trace_csv(const Trace& trace, const ConvergenceReport& report) {
  std::string out =
      "k,sim_time,worker,p,epoch_index,d_max,suboptimality,distance_sq,residual_norm\n";
  append_rows(out, trace, report, /*with_bounds=*/false);
  return out;
}

std::string export_report_csv(const Trace& trace, const ConvergenceReport& report) {
  std::string out =
      "k,sim_time,worker,p,epoch_index,d_max,suboptimality,distance_sq,residual_norm,"
      "bound_thm32,bound_cor33,bound_thm36\n";
  append_rows(out, trace, report, /*with_bounds=*/true);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace daverpg
