#pragma once

#include <string>

#include "daverpg/analysis.hpp"
#include "daverpg/trace.hpp"

namespace daverpg {

/// One row per iteration, header mandatory:
///   k,sim_time,worker,p,epoch_index,d_max,suboptimality,distance_sq,residual_norm
std::string export_trace_csv(const Trace& trace, const ConvergenceReport& report);

/// Trace schema plus the per-epoch envelope columns
/// bound_thm32,bound_cor33,bound_thm36 (nan where not applicable).
std::string export_report_csv(const Trace& trace, const ConvergenceReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace daverpg
