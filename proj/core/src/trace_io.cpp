#include "ifcast/trace_io.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ifcast/errors.hpp"

namespace ifcast::io {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw InputError("failed to format a double");
    return std::string(buf, ptr);
}

std::string trace_csv(const ComplexTrace& trace) {
    std::string out = "index,real,imag\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(trace.samples[i].real());
        out += ',';
        out += format_double(trace.samples[i].imag());
        out += '\n';
    }
    return out;
}

std::string power_csv(std::span<const double> linear_power) {
    std::string out = "index,power_linear,power_db\n";
    for (std::size_t i = 0; i < linear_power.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(linear_power[i]);
        out += ',';
        out += format_double(power_to_db(linear_power[i]));
        out += '\n';
    }
    return out;
}

std::string imf_csv(const Decomposition& dec) {
    std::string out = "index";
    for (std::size_t k = 0; k < dec.imfs.size(); ++k) {
        out += ",imf" + std::to_string(k + 1);
    }
    out += ",residual\n";
    for (std::size_t i = 0; i < dec.source_length; ++i) {
        out += std::to_string(i);
        for (const auto& imf : dec.imfs) {
            out += ',';
            out += format_double(imf[i]);
        }
        out += ',';
        out += format_double(dec.residual[i]);
        out += '\n';
    }
    return out;
}

std::string forecast_csv(const ForecastResult& result) {
    std::string out = "slot,predicted,actual\n";
    for (std::size_t i = 0; i < result.predicted.size(); ++i) {
        out += std::to_string(result.first_slot + i);
        out += ',';
        out += format_double(result.predicted[i]);
        out += ',';
        out += format_double(result.actual[i]);
        out += '\n';
    }
    return out;
}

std::string allocation_csv(const AllocationRun& run) {
    std::string out =
        "slot,target_error,predicted_interference,predicted_sinr,"
        "blocklength,actual_interference,actual_sinr,achieved_error\n";
    for (const AllocationRecord& r : run.records) {
        out += std::to_string(r.slot);
        out += ',';
        out += format_double(r.target_error);
        out += ',';
        out += format_double(r.predicted_interference);
        out += ',';
        out += format_double(r.predicted_sinr);
        out += ',';
        out += std::to_string(r.chosen_blocklength);
        out += ',';
        out += format_double(r.actual_interference);
        out += ',';
        out += format_double(r.actual_sinr);
        out += ',';
        out += format_double(r.achieved_error);
        out += '\n';
    }
    return out;
}

std::string cancellation_csv(const CancellationResult& result) {
    std::string out = "index,orig_re,orig_im,pred_re,pred_im,resid_re,resid_im\n";
    for (std::size_t i = 0; i < result.original.size(); ++i) {
        const cplx orig = result.original.samples[i];
        const cplx resid = result.residual.samples[i];
        const cplx pred = orig - resid;
        out += std::to_string(result.first_slot + i);
        out += ',';
        out += format_double(orig.real());
        out += ',';
        out += format_double(orig.imag());
        out += ',';
        out += format_double(pred.real());
        out += ',';
        out += format_double(pred.imag());
        out += ',';
        out += format_double(resid.real());
        out += ',';
        out += format_double(resid.imag());
        out += '\n';
    }
    return out;
}

std::string forecast_metrics_json(const ForecastResult& result,
                                  const std::string& predictor_kind,
                                  std::span<const std::vector<double>> epoch_losses) {
    nlohmann::json j;
    j["predictor"] = predictor_kind;
    j["pipeline"] = to_string(result.pipeline);
    j["rmse"] = result.rmse;
    j["first_slot"] = result.first_slot;
    j["validation_count"] = result.predicted.size();
    j["per_component_rmse"] = result.per_component_rmse;
    nlohmann::json losses = nlohmann::json::array();
    for (const auto& series : epoch_losses) losses.push_back(series);
    j["epoch_loss"] = std::move(losses);
    return j.dump(2) + "\n";
}

std::string outage_summary_json(std::span<const AllocationRun> runs) {
    nlohmann::json j = nlohmann::json::array();
    for (const AllocationRun& run : runs) {
        nlohmann::json e;
        e["estimator"] = run.curve.estimator_label;
        e["target_errors"] = run.curve.target_errors;
        e["achieved_outages"] = run.curve.achieved_outages;
        e["exceedance_fractions"] = run.curve.exceedance_fractions;
        e["clamped_predictions"] = run.clamped_predictions;
        e["first_slot"] = run.first_slot;
        j.push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

std::string cancellation_metrics_json(const CancellationResult& result) {
    nlohmann::json j;
    j["suppression_db"] = result.suppression_db;
    j["real_rmse"] = result.real_rmse;
    j["imag_rmse"] = result.imag_rmse;
    j["first_slot"] = result.first_slot;
    j["span"] = result.original.size();
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw InputError("cannot open for writing: " + path.string());
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!file) throw InputError("failed writing: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{}) throw InputError("not a number in CSV: '" + s + "'");
    return v;
}

} // namespace

std::vector<double> read_series_csv(const std::filesystem::path& path) {
    std::string text = read_text(path);
    std::istringstream lines(text);
    std::string line;
    std::vector<double> series;
    std::size_t column = 0;
    bool first = true;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (first) {
            first = false;
            bool header = false;
            for (char c : line) {
                if (std::isalpha(static_cast<unsigned char>(c))) header = true;
            }
            if (header) {
                // Prefer an explicitly named value column; otherwise take the
                // second column (the first is an index) or the only one.
                column = fields.size() > 1 ? 1 : 0;
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    if (fields[i] == "power_linear" || fields[i] == "value") {
                        column = i;
                    }
                }
                continue;
            }
            column = fields.size() > 1 ? 1 : 0;
        }
        if (column >= fields.size())
            throw InputError("CSV row with too few columns: '" + line + "'");
        series.push_back(parse_double(fields[column]));
    }
    if (series.empty()) throw InputError("no data rows in " + path.string());
    return series;
}

} // namespace ifcast::io
