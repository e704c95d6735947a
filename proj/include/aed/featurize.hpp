#pragma once

#include "aed/annotation_log.hpp"
#include "aed/synthgen.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace aed {

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;

    bool operator==(const FeatureSpec&) const = default;
};

struct WindowConfig {
    std::vector<int> days{7, 14, 21, 28};
    std::vector<int> tasks{1, 3, 5};

    bool operator==(const WindowConfig&) const = default;
};

struct FeatureSchema {
    std::vector<FeatureSpec> features;
    WindowConfig windows;

    std::size_t index_of(std::string_view name) const;
    bool operator==(const FeatureSchema&) const = default;
};

// The full feature set: task, past-performance, session-context and
// task-completion families.
FeatureSchema default_schema(const WindowConfig& windows = {});

// Numeric cells hold kMissing (NaN) when missing; categorical cells hold an
// empty string when missing.
struct FeatureColumn {
    std::vector<double> numeric;
    std::vector<std::string> categorical;
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::vector<std::string> task_ids;
    std::vector<int> target;  // is_error
    std::vector<FeatureColumn> columns;

    std::size_t rows() const { return task_ids.size(); }
    const FeatureColumn& column(std::string_view name) const { return columns[schema.index_of(name)]; }

    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    FeatureMatrix select_ids(std::span<const std::string> ids) const;
    // Rows whose `application` column equals `app`.
    FeatureMatrix select_application(Application app) const;
    // Checks row alignment and that numeric cells are finite or missing.
    void validate() const;
};

enum class RateScope { Self, All };
enum class ErrorSeverity { Any, Major };
enum class CategoryField { OutputMediaType, InputQueryType };

struct TenureVolume {
    std::int64_t tenure_full_days = 0;     // since last (re)activation
    std::int64_t tenure_updated_days = 0;  // since first joining
    std::vector<std::int64_t> vol_last;    // one per day window
};

// Per-annotator and per-application history sorted by time. Every query looks
// only at events with timestamp strictly before the query time.
class HistoryIndex {
public:
    explicit HistoryIndex(std::span<const AnnotationEvent> events, WindowConfig windows = {});

    // Error rate over [t − days, t); scope All covers every annotator in `app`.
    // Returns kMissing when the window is empty.
    double error_rate(const std::string& annotator_id, Application app, std::int64_t t, int window_days,
                      RateScope scope, ErrorSeverity severity) const;

    // Share of correct annotations among the annotator's last `window_tasks`
    // earlier tasks with the given category value; kMissing when none exist.
    double rate_by_category(const std::string& annotator_id, std::int64_t t, CategoryField field,
                            const std::string& value, int window_tasks) const;

    // Number of the annotator's events in [t − days, t).
    std::int64_t volume(const std::string& annotator_id, std::int64_t t, int window_days) const;

    const WindowConfig& windows() const { return windows_; }

private:
    struct Series {
        std::vector<std::int64_t> times;
        std::vector<std::int64_t> errors;  // prefix sums, size times+1
        std::vector<std::int64_t> majors;  // prefix sums
    };
    static void finish(Series& s);
    void check_days(int window_days) const;

    WindowConfig windows_;
    std::unordered_map<std::string, Series> by_annotator_;
    std::array<Series, 3> by_application_;
    std::map<std::tuple<std::string, int, std::string>, Series> by_category_;
};

double rolling_error_rate(std::span<const AnnotationEvent> log, const std::string& annotator_id,
                          Application app, std::int64_t t, int window_days, RateScope scope,
                          ErrorSeverity severity);

double rolling_rate_by_category(std::span<const AnnotationEvent> log, const std::string& annotator_id,
                                std::int64_t t, CategoryField field, const std::string& value, int window_tasks);

TenureVolume tenure_and_volume(const HistoryIndex& index, std::span<const AnnotatorProfile> profiles,
                               const std::string& annotator_id, std::int64_t t);

FeatureMatrix build_feature_matrix(std::span<const AnnotationEvent> log, std::span<const AnnotatorProfile> profiles,
                                   const WindowConfig& windows = {});

nlohmann::ordered_json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);

// CSV with header `task_id,<features...>,is_error` plus a sidecar schema JSON.
void write_feature_matrix(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                          const FeatureMatrix& matrix);
FeatureMatrix read_feature_matrix(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path);

// Sidecar path convention: features.csv -> features.schema.json
std::filesystem::path schema_path_for(const std::filesystem::path& csv_path);

}  // namespace aed
