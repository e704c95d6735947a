#pragma once

#include "aed/annotation_log.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aed {

struct AnnotatorProfile {
    std::string annotator_id;
    double skill = 0.0;  // latent; never written to the public profile file
    std::int64_t join_date = 0;
    std::int64_t activation_date = 0;  // last (re)activation, >= join_date
    int qualification_trials = 1;
    double qualification_agreement_rate = 0.0;
    double daily_volume_rate = 1.0;

    bool operator==(const AnnotatorProfile&) const = default;
};

struct TaskTemplate {
    std::string task_id;
    Application application = Application::MusicStreaming;
    std::string storefront;
    double difficulty = 0.0;
    std::string input_text;
    std::string output_text;
    std::string input_media_type;
    std::string output_media_type;
    std::string input_language;
    std::string input_query_type;
    bool input_misspelled = false;
    std::int64_t input_occurrences = 0;
    double input_conversion_rate = 0.0;
    RelevanceLabel true_label = RelevanceLabel::Good;
};

// Coefficients of the latent logistic error model. `intercept` is replaced by
// the calibrated value unless calibration is disabled.
struct ErrorCoefficients {
    double intercept = 0.0;
    double skill = 1.0;
    double difficulty = 0.8;
    double fatigue = 0.8;
    double rush = 0.6;
};

struct GenConfig {
    int n_annotators = 150;
    int n_tasks = 50000;
    std::int64_t start_date = 1672531200;  // 2023-01-01T00:00:00Z
    int n_days = 180;
    double target_error_rate = 0.10;
    bool calibrate_intercept = true;
    ErrorCoefficients beta;
    std::array<double, 3> app_offsets{-0.2, 0.1, 0.25};
    std::array<double, 3> app_shares{0.43, 0.43, 0.14};
    std::uint64_t seed = 20240601;
};

void validate(const GenConfig& config);
nlohmann::ordered_json to_json(const GenConfig& config);
GenConfig gen_config_from_json(const nlohmann::json& j);

struct Population {
    std::vector<AnnotatorProfile> annotators;
    std::vector<TaskTemplate> tasks;
};

struct GeneratedLog {
    std::vector<AnnotationEvent> events;             // sorted by (timestamp, task_id)
    std::vector<double> true_error_probability;      // aligned with events
    double intercept = 0.0;                          // calibrated (or configured) intercept
};

Population generate_population(const GenConfig& config);

// σ(intercept + app_offset − β_skill·skill + β_difficulty·difficulty
//   + β_fatigue·session_position_norm + β_rush·rush_factor)
double error_probability(double skill, double difficulty, double session_position_norm, double rush_factor,
                         const ErrorCoefficients& beta, double app_offset);

GeneratedLog generate_log(const Population& population, const GenConfig& config);

// AUC of the hidden probabilities against realized errors.
double oracle_auc(std::span<const AnnotationEvent> events, std::span<const double> probabilities);

void write_profiles(const std::filesystem::path& path, std::span<const AnnotatorProfile> profiles);
std::vector<AnnotatorProfile> read_profiles(const std::filesystem::path& path);

void write_hidden_probabilities(const std::filesystem::path& path, std::span<const AnnotationEvent> events,
                                std::span<const double> probabilities);
std::vector<double> read_hidden_probabilities(const std::filesystem::path& path,
                                              std::span<const AnnotationEvent> events);

}  // namespace aed
