#ifndef IFCAST_EXPERIMENT_HPP
#define IFCAST_EXPERIMENT_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ifcast/allocation.hpp"
#include "ifcast/cancellation.hpp"
#include "ifcast/channel.hpp"
#include "ifcast/emd.hpp"
#include "ifcast/forecast.hpp"

namespace ifcast {

// Full description of one seeded run. JSON schema (version 1) mirrors the
// field names below; absent keys keep the defaults, unknown keys are
// rejected. The nested rng seeds are derived from global_seed at run time
// (sub_seed = splitmix64(global_seed ^ fnv1a64(label))), never read from the
// config document.
struct ExperimentConfig {
    ScenarioConfig scenario;
    PredictorConfig predictor = TransformerConfig{};
    Pipeline pipeline = Pipeline::Proposed;
    SiftConfig sift;
    AllocationConfig allocation;
    std::vector<std::string> estimators = {"genie", "moving-average", "predictor"};
    PowerScale scale = PowerScale::Db;
    std::string output_dir; // resolved by the CLI when empty
    std::uint64_t global_seed = 1;
    int workers = 1; // component-training fan-out; a CLI flag, not a config key

    void validate() const; // throws ConfigError
};

// Reference scenario (six interferers) with the stock transformer predictor.
ExperimentConfig default_experiment_config();

// Defaults overridden by the keys present in the document.
ExperimentConfig parse_experiment_config(const std::string& json_text);

std::string experiment_config_json(const ExperimentConfig& cfg);

// Copies the config with scenario and predictor seeds derived from
// global_seed; every run_* entry point applies this.
ExperimentConfig with_derived_seeds(const ExperimentConfig& cfg);

struct ForecastArtifacts {
    ComposedScenario composed;
    std::vector<double> series; // prediction target in cfg.scale
    ForecastResult result;
    std::vector<std::unique_ptr<Predictor>> predictors; // component order
};

struct AllocationArtifacts {
    std::optional<ForecastArtifacts> forecast; // present when the predictor runs
    std::vector<AllocationRun> runs;           // one per selected estimator
};

ComposedScenario run_generate(const ExperimentConfig& cfg);
ForecastArtifacts run_forecast(const ExperimentConfig& cfg);
AllocationArtifacts run_allocate(const ExperimentConfig& cfg);
CancellationResult run_cancel(const ExperimentConfig& cfg);

} // namespace ifcast

#endif
