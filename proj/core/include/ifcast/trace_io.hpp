#ifndef IFCAST_TRACE_IO_HPP
#define IFCAST_TRACE_IO_HPP

#include <filesystem>
#include <span>
#include <string>

#include "ifcast/allocation.hpp"
#include "ifcast/cancellation.hpp"
#include "ifcast/channel.hpp"
#include "ifcast/emd.hpp"
#include "ifcast/forecast.hpp"

namespace ifcast::io {

// Shortest representation that round-trips a double exactly; '.' decimal
// separator, locale independent. All emitters below use it, so identical
// values serialize identically across runs.
std::string format_double(double v);

std::string trace_csv(const ComplexTrace& trace);               // index,real,imag
std::string power_csv(std::span<const double> linear_power);    // index,power_linear,power_db
std::string imf_csv(const Decomposition& dec);                  // index,imf1..imfK,residual
std::string forecast_csv(const ForecastResult& result);         // slot,predicted,actual
std::string allocation_csv(const AllocationRun& run);
std::string cancellation_csv(const CancellationResult& result);

std::string forecast_metrics_json(const ForecastResult& result,
                                  const std::string& predictor_kind,
                                  std::span<const std::vector<double>> epoch_losses);
std::string outage_summary_json(std::span<const AllocationRun> runs);
std::string cancellation_metrics_json(const CancellationResult& result);

void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path); // throws InputError

// Parses a single-column or power CSV produced by this module back into a
// real series (uses the power_linear column when present).
std::vector<double> read_series_csv(const std::filesystem::path& path);

} // namespace ifcast::io

#endif
