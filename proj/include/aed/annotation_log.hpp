#pragma once

#include "aed/common.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aed {

// One audited annotation task.
struct AnnotationEvent {
    std::string task_id;
    std::string annotator_id;
    Application application = Application::MusicStreaming;
    std::string storefront;
    std::int64_t timestamp = 0;  // epoch seconds
    std::string session_id;
    int nth_task_in_session = 1;
    std::int64_t seconds_into_session = 0;
    std::string input_text;
    std::string output_text;
    std::string input_media_type;  // keyboard | voice
    std::string output_media_type;
    std::string input_language;
    std::string input_query_type;
    bool input_misspelled = false;
    std::int64_t input_occurrences = 0;
    double input_conversion_rate = 0.0;
    RelevanceLabel annotator_label = RelevanceLabel::Good;
    bool problem_flagged = false;
    double time_on_task = 1.0;  // seconds
    int comment_length = 0;     // words
    RelevanceLabel audit_label = RelevanceLabel::Good;

    bool operator==(const AnnotationEvent&) const = default;
};

struct ErrorVerdict {
    bool is_error = false;
    bool is_major_error = false;

    bool operator==(const ErrorVerdict&) const = default;
};

// Major error: annotator label more than two levels away from the audit label.
ErrorVerdict derive_verdict(const AnnotationEvent& event);

enum class LogFormat { Jsonl, Csv };

// Format from extension: .csv is CSV, anything else JSONL.
LogFormat format_for_path(const std::filesystem::path& path);

// Validates every per-event and cross-event invariant; throws DataError naming
// the offending task_id and field.
void validate_log(std::span<const AnnotationEvent> events);

std::vector<AnnotationEvent> read_log(const std::filesystem::path& path);
std::vector<AnnotationEvent> parse_jsonl_log(std::istream& in);
std::vector<AnnotationEvent> parse_csv_log(std::istream& in);

void write_log(const std::filesystem::path& path, std::span<const AnnotationEvent> events);
void write_log(std::ostream& out, std::span<const AnnotationEvent> events, LogFormat format);

struct DatasetSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> validation_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;

    bool operator==(const DatasetSplit&) const = default;
};

// Uniform event-level sampling without replacement. |test| = round(tf * N),
// |validation| = round(vf * (N - |test|)); each subset keeps log order.
DatasetSplit split_log(std::span<const AnnotationEvent> events, double test_fraction,
                       double validation_fraction, std::uint64_t seed);

void write_split(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit read_split(const std::filesystem::path& path);

}  // namespace aed
