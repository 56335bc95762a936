#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ifcast/errors.hpp"
#include "ifcast/experiment.hpp"
#include "ifcast/trace_io.hpp"

namespace fs = std::filesystem;
using namespace ifcast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMissingFile = 2;

struct MissingFile : std::runtime_error {
    explicit MissingFile(const std::string& path)
        : std::runtime_error("no such file: " + path) {}
};

struct Options {
    std::string config_path;
    std::string out_dir;
    std::string scale;
    std::string ma_index;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = 1;
    bool table2_literal = false;
};

void add_common_flags(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path,
                    "experiment config JSON (defaults used when absent)");
    sub->add_option("--seed", o.seed, "override global_seed")
        ->each([&o](const std::string&) { o.seed_given = true; });
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--workers", o.workers,
                    "concurrent component trainings (proposed pipeline)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--scale", o.scale, "prediction-target scale")
        ->check(CLI::IsMember({"db", "linear"}));
    sub->add_option("--ma-index", o.ma_index,
                    "moving-average measurement indexing")
        ->check(CLI::IsMember({"printed", "recent"}));
    sub->add_flag("--table2-literal", o.table2_literal,
                  "use attention width heads*head_size instead of head_size");
}

ExperimentConfig build_config(const Options& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        if (!fs::exists(o.config_path)) throw MissingFile(o.config_path);
        cfg = parse_experiment_config(io::read_text(o.config_path));
    } else {
        cfg = default_experiment_config();
    }
    if (o.seed_given) cfg.global_seed = o.seed;
    if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
    if (!o.scale.empty())
        cfg.scale = o.scale == "db" ? PowerScale::Db : PowerScale::Linear;
    if (!o.ma_index.empty())
        cfg.allocation.ma_indexing =
            o.ma_index == "printed" ? MaIndexing::Printed : MaIndexing::Recent;
    if (o.table2_literal) {
        if (!std::holds_alternative<TransformerConfig>(cfg.predictor)) {
            throw ConfigError("--table2-literal applies to the transformer predictor");
        }
        std::get<TransformerConfig>(cfg.predictor).table2_literal = true;
    }
    cfg.workers = o.workers;
    cfg.validate();
    return cfg;
}

fs::path resolve_out_dir(const ExperimentConfig& cfg, const std::string& sub) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("IFCAST_OUT_ROOT");
    return fs::path(root && *root ? root : "out") / sub;
}

fs::path prepare_out_dir(const ExperimentConfig& cfg, const std::string& sub) {
    fs::path dir = resolve_out_dir(cfg, sub);
    fs::create_directories(dir);
    return dir;
}

int cmd_generate(const Options& o) {
    ExperimentConfig cfg = build_config(o);
    fs::path dir = prepare_out_dir(cfg, "generate");
    ComposedScenario composed = run_generate(cfg);

    io::write_text(dir / "received.csv", io::trace_csv(composed.received));
    io::write_text(dir / "desired.csv", io::trace_csv(composed.desired));
    io::write_text(dir / "interference.csv", io::trace_csv(composed.interference));
    io::write_text(dir / "noise.csv", io::trace_csv(composed.noise));
    for (std::size_t i = 0; i < composed.per_interferer.size(); ++i) {
        io::write_text(dir / ("interferer-" + std::to_string(i + 1) + ".csv"),
                       io::trace_csv(composed.per_interferer[i]));
    }
    std::vector<double> power =
        interference_power_series(composed.interference, PowerScale::Linear);
    io::write_text(dir / "interference_power.csv", io::power_csv(power));
    io::write_text(dir / "desired_power.csv", io::power_csv(composed.desired_power));
    io::write_text(dir / "config.json", experiment_config_json(cfg));

    double mean_power = 0.0;
    for (double p : power) mean_power += p;
    mean_power /= static_cast<double>(power.size());
    std::cout << "generated " << composed.received.size() << " slots, "
              << composed.per_interferer.size() << " interferers\n"
              << "mean interference power " << io::format_double(mean_power)
              << " (linear), outputs in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_decompose(const Options& o, const std::string& input) {
    ExperimentConfig cfg = build_config(o);
    if (!fs::exists(input)) throw MissingFile(input);
    fs::path dir = prepare_out_dir(cfg, "decompose");
    std::vector<double> series = io::read_series_csv(input);
    Decomposition dec = decompose(series, cfg.sift);
    io::write_text(dir / "imfs.csv", io::imf_csv(dec));
    std::cout << "decomposed " << series.size() << " samples into "
              << dec.imfs.size() << " IMFs + residual\n"
              << "completeness max abs error "
              << io::format_double(reconstruction_error(series, dec)) << "\n"
              << "outputs in " << dir.string() << "\n";
    return kExitOk;
}

void write_forecast_artifacts(const ForecastArtifacts& art,
                              const ExperimentConfig& cfg, const fs::path& dir) {
    io::write_text(dir / "forecast.csv", io::forecast_csv(art.result));
    std::vector<std::vector<double>> losses;
    for (const auto& p : art.predictors) losses.push_back(p->epoch_loss);
    io::write_text(dir / "metrics.json",
                   io::forecast_metrics_json(art.result,
                                             config_kind(cfg.predictor), losses));
    for (std::size_t k = 0; k < art.predictors.size(); ++k) {
        io::write_text(dir / ("checkpoint-" + std::to_string(k) + ".json"),
                       art.predictors[k]->serialize() + "\n");
    }
}

int cmd_forecast(const Options& o) {
    ExperimentConfig cfg = build_config(o);
    fs::path dir = prepare_out_dir(cfg, "forecast");
    ForecastArtifacts art = run_forecast(cfg);
    write_forecast_artifacts(art, cfg, dir);
    io::write_text(dir / "config.json", experiment_config_json(cfg));
    std::cout << config_kind(cfg.predictor) << " " << to_string(cfg.pipeline)
              << " rmse " << io::format_double(art.result.rmse) << " over "
              << art.result.predicted.size() << " validation slots\n"
              << "outputs in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_allocate(const Options& o) {
    ExperimentConfig cfg = build_config(o);
    fs::path dir = prepare_out_dir(cfg, "allocate");
    AllocationArtifacts art = run_allocate(cfg);
    if (art.forecast) write_forecast_artifacts(*art.forecast, cfg, dir);
    for (const AllocationRun& run : art.runs) {
        io::write_text(dir / ("allocation-" + run.curve.estimator_label + ".csv"),
                       io::allocation_csv(run));
    }
    io::write_text(dir / "summary.json", io::outage_summary_json(art.runs));
    io::write_text(dir / "config.json", experiment_config_json(cfg));
    for (const AllocationRun& run : art.runs) {
        std::cout << run.curve.estimator_label << ":";
        for (std::size_t i = 0; i < run.curve.target_errors.size(); ++i) {
            std::cout << " " << io::format_double(run.curve.target_errors[i])
                      << "->" << io::format_double(run.curve.achieved_outages[i]);
        }
        std::cout << "\n";
    }
    std::cout << "outputs in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_cancel(const Options& o) {
    ExperimentConfig cfg = build_config(o);
    fs::path dir = prepare_out_dir(cfg, "cancel");
    CancellationResult result = run_cancel(cfg);
    io::write_text(dir / "cancellation.csv", io::cancellation_csv(result));
    io::write_text(dir / "metrics.json", io::cancellation_metrics_json(result));
    io::write_text(dir / "config.json", experiment_config_json(cfg));
    std::cout << "suppression " << io::format_double(result.suppression_db)
              << " dB over " << result.original.size() << " slots\n"
              << "outputs in " << dir.string() << "\n";
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs,
               const std::string& out_dir) {
    // (predictor, pipeline) -> accumulated RMSEs across runs.
    std::map<std::pair<std::string, std::string>, std::vector<double>> rmse_cells;
    nlohmann::json outages = nlohmann::json::array();
    for (const std::string& dir : run_dirs) {
        fs::path metrics = fs::path(dir) / "metrics.json";
        if (fs::exists(metrics)) {
            nlohmann::json j = nlohmann::json::parse(io::read_text(metrics));
            if (j.contains("rmse") && j.contains("predictor")) {
                rmse_cells[{j.at("predictor").get<std::string>(),
                            j.at("pipeline").get<std::string>()}]
                    .push_back(j.at("rmse").get<double>());
            }
        }
        fs::path summary = fs::path(dir) / "summary.json";
        if (fs::exists(summary)) {
            nlohmann::json j = nlohmann::json::parse(io::read_text(summary));
            for (auto& entry : j) {
                entry["source_dir"] = dir;
                outages.push_back(entry);
            }
        }
    }
    if (rmse_cells.empty() && outages.empty()) {
        std::cerr << "input error: no runs found in the given directories\n";
        return kExitError;
    }

    nlohmann::json report;
    nlohmann::json table = nlohmann::json::array();
    std::string csv = "predictor,pipeline,rmse,runs\n";
    for (const auto& [key, values] : rmse_cells) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        table.push_back({{"predictor", key.first},
                         {"pipeline", key.second},
                         {"rmse", mean},
                         {"runs", values.size()}});
        csv += key.first + "," + key.second + "," + io::format_double(mean) + "," +
               std::to_string(values.size()) + "\n";
    }
    report["rmse_table"] = std::move(table);
    report["outage_curves"] = std::move(outages);

    fs::path dir = out_dir;
    fs::create_directories(dir);
    io::write_text(dir / "report.json", report.dump(2) + "\n");
    io::write_text(dir / "report.csv", csv);
    std::cout << csv << "outputs in " << dir.string() << "\n";
    return kExitOk;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"seeded interference forecasting and URLLC allocation workbench"};
    app.require_subcommand(1);

    Options gen_o, dec_o, fc_o, al_o, ca_o;
    std::string decompose_input;
    std::vector<std::string> report_dirs;
    std::string report_out;

    CLI::App* gen = app.add_subcommand("generate", "compose seeded fading traces");
    add_common_flags(gen, gen_o);
    CLI::App* dec = app.add_subcommand("decompose", "EMD-decompose a power series");
    add_common_flags(dec, dec_o);
    dec->add_option("--input", decompose_input, "series CSV to decompose")
        ->required();
    CLI::App* fc = app.add_subcommand("forecast", "train and evaluate a predictor");
    add_common_flags(fc, fc_o);
    CLI::App* al =
        app.add_subcommand("allocate", "predict-allocate-reveal outage sweep");
    add_common_flags(al, al_o);
    CLI::App* ca = app.add_subcommand("cancel", "I/Q interference cancellation");
    add_common_flags(ca, ca_o);
    CLI::App* rep = app.add_subcommand("report", "aggregate run directories");
    rep->add_option("dirs", report_dirs, "run directories to aggregate")
        ->required();
    {
        const char* root = std::getenv("IFCAST_OUT_ROOT");
        report_out = (fs::path(root && *root ? root : "out") / "report").string();
    }
    rep->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(gen)) return cmd_generate(gen_o);
    if (app.got_subcommand(dec)) return cmd_decompose(dec_o, decompose_input);
    if (app.got_subcommand(fc)) return cmd_forecast(fc_o);
    if (app.got_subcommand(al)) return cmd_allocate(al_o);
    if (app.got_subcommand(ca)) return cmd_cancel(ca_o);
    if (app.got_subcommand(rep)) return cmd_report(report_dirs, report_out);
    return kExitError;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const MissingFile& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitMissingFile;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitError;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence error: " << e.what() << " (epoch " << e.epoch
                  << ", learning rate " << e.learning_rate << ")\n";
        return kExitError;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitError;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
