#include "aed/featurize.hpp"

#include "aed/csv.hpp"
#include "aed/text_distance.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

namespace aed {

using nlohmann::ordered_json;

namespace {

const std::string& category_value(const AnnotationEvent& e, CategoryField field) {
    return field == CategoryField::OutputMediaType ? e.output_media_type : e.input_query_type;
}

std::string kind_name(FeatureKind kind) { return kind == FeatureKind::Numeric ? "numeric" : "categorical"; }

FeatureKind parse_kind(const std::string& text) {
    if (text == "numeric") {
        return FeatureKind::Numeric;
    }
    if (text == "categorical") {
        return FeatureKind::Categorical;
    }
    throw DataError("unknown feature kind '" + text + "'");
}

bool contains(const std::vector<int>& values, int v) {
    return std::find(values.begin(), values.end(), v) != values.end();
}

}  // namespace

std::size_t FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].name == name) {
            return i;
        }
    }
    throw DataError("feature '" + std::string(name) + "' not in schema");
}

FeatureSchema default_schema(const WindowConfig& windows) {
    FeatureSchema s;
    s.windows = windows;
    auto num = [&](std::string name) { s.features.push_back({std::move(name), FeatureKind::Numeric}); };
    auto cat = [&](std::string name) { s.features.push_back({std::move(name), FeatureKind::Categorical}); };

    // Task features.
    num("input_occurrences");
    num("input_conversion_rate");
    num("in_out_embedding_distance");
    num("in_out_edit_distance");
    cat("input_media_type");
    cat("output_media_type");
    num("input_misspelled");
    cat("input_language");
    cat("input_query_type");
    cat("storefront_name");
    cat("application");

    // Past performance.
    const auto& days = windows.days;
    for (int d : days) num("error_" + std::to_string(d));
    for (int d : days) num("error_" + std::to_string(d) + "_all");
    for (int d : days) num("maj_error_" + std::to_string(d));
    for (int d : days) num("maj_error_" + std::to_string(d) + "_all");
    for (int d : days) num("error_" + std::to_string(d) + "_diff");
    for (int d : days) num("vol_last_" + std::to_string(d));
    num("tenure_full_days");
    num("tenure_updated_days");
    num("qualification_trials");
    num("qualification_agreement_rate");
    for (int n : windows.tasks) num("error_rolling_output_media_type_" + std::to_string(n));
    for (int n : windows.tasks) num("error_rolling_input_query_type_user_" + std::to_string(n));

    // Session context.
    num("nth_task_in_session");
    num("seconds_into_session");

    // Task completion.
    cat("answer_value");
    num("time_on_task");
    num("comment_length");
    return s;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.schema = schema;
    out.columns.resize(columns.size());
    out.task_ids.reserve(rows.size());
    out.target.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= task_ids.size()) {
            throw InvariantError("select_rows: row out of range");
        }
        out.task_ids.push_back(task_ids[r]);
        out.target.push_back(target[r]);
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (schema.features[c].kind == FeatureKind::Numeric) {
            auto& dst = out.columns[c].numeric;
            dst.reserve(rows.size());
            for (std::size_t r : rows) {
                dst.push_back(columns[c].numeric[r]);
            }
        } else {
            auto& dst = out.columns[c].categorical;
            dst.reserve(rows.size());
            for (std::size_t r : rows) {
                dst.push_back(columns[c].categorical[r]);
            }
        }
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_ids(std::span<const std::string> ids) const {
    std::unordered_map<std::string_view, std::size_t> row_of;
    row_of.reserve(task_ids.size());
    for (std::size_t i = 0; i < task_ids.size(); ++i) {
        row_of.emplace(task_ids[i], i);
    }
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const std::string& id : ids) {
        auto it = row_of.find(id);
        if (it == row_of.end()) {
            throw DataError("task '" + id + "' not present in feature matrix");
        }
        rows.push_back(it->second);
    }
    return select_rows(rows);
}

FeatureMatrix FeatureMatrix::select_application(Application app) const {
    const auto& col = column("application").categorical;
    const std::string name(to_string(app));
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (col[i] == name) {
            rows.push_back(i);
        }
    }
    return select_rows(rows);
}

void FeatureMatrix::validate() const {
    if (columns.size() != schema.features.size()) {
        throw DataError("feature matrix has " + std::to_string(columns.size()) + " columns, schema has " +
                        std::to_string(schema.features.size()));
    }
    if (target.size() != task_ids.size()) {
        throw DataError("feature matrix target not aligned with rows");
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& spec = schema.features[c];
        if (spec.kind == FeatureKind::Numeric) {
            if (columns[c].numeric.size() != rows()) {
                throw DataError("numeric column '" + spec.name + "' not aligned with rows");
            }
            for (double v : columns[c].numeric) {
                if (!is_missing(v) && !std::isfinite(v)) {
                    throw DataError("numeric column '" + spec.name + "' has a non-finite cell");
                }
            }
        } else if (columns[c].categorical.size() != rows()) {
            throw DataError("categorical column '" + spec.name + "' not aligned with rows");
        }
    }
    for (int y : target) {
        if (y != 0 && y != 1) {
            throw DataError("feature matrix target must be 0/1");
        }
    }
}

// ---------------------------------------------------------------------------

HistoryIndex::HistoryIndex(std::span<const AnnotationEvent> events, WindowConfig windows)
    : windows_(std::move(windows)) {
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return events[a].timestamp < events[b].timestamp; });

    auto push = [](Series& s, std::int64_t t, const ErrorVerdict& v) {
        s.times.push_back(t);
        s.errors.push_back(v.is_error ? 1 : 0);
        s.majors.push_back(v.is_major_error ? 1 : 0);
    };
    for (std::size_t i : order) {
        const AnnotationEvent& e = events[i];
        const ErrorVerdict v = derive_verdict(e);
        push(by_annotator_[e.annotator_id], e.timestamp, v);
        push(by_application_[static_cast<std::size_t>(e.application)], e.timestamp, v);
        for (CategoryField field : {CategoryField::OutputMediaType, CategoryField::InputQueryType}) {
            push(by_category_[{e.annotator_id, static_cast<int>(field), category_value(e, field)}], e.timestamp, v);
        }
    }
    for (auto& [_, s] : by_annotator_) finish(s);
    for (auto& s : by_application_) finish(s);
    for (auto& [_, s] : by_category_) finish(s);
}

void HistoryIndex::finish(Series& s) {
    // Convert per-event flags into prefix sums with a leading zero.
    auto to_prefix = [](std::vector<std::int64_t>& v) {
        std::vector<std::int64_t> prefix(v.size() + 1, 0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            prefix[i + 1] = prefix[i] + v[i];
        }
        v = std::move(prefix);
    };
    to_prefix(s.errors);
    to_prefix(s.majors);
}

void HistoryIndex::check_days(int window_days) const {
    if (!contains(windows_.days, window_days)) {
        throw UsageError("window of " + std::to_string(window_days) + " days is not configured");
    }
}

double HistoryIndex::error_rate(const std::string& annotator_id, Application app, std::int64_t t,
                                int window_days, RateScope scope, ErrorSeverity severity) const {
    check_days(window_days);
    const Series* s = nullptr;
    if (scope == RateScope::Self) {
        auto it = by_annotator_.find(annotator_id);
        if (it == by_annotator_.end()) {
            return kMissing;
        }
        s = &it->second;
    } else {
        s = &by_application_[static_cast<std::size_t>(app)];
    }
    const std::int64_t from = t - window_days * kSecondsPerDay;
    const auto lo = static_cast<std::size_t>(std::lower_bound(s->times.begin(), s->times.end(), from) - s->times.begin());
    const auto hi = static_cast<std::size_t>(std::lower_bound(s->times.begin(), s->times.end(), t) - s->times.begin());
    if (hi <= lo) {
        return kMissing;
    }
    const auto& prefix = severity == ErrorSeverity::Any ? s->errors : s->majors;
    return static_cast<double>(prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
}

double HistoryIndex::rate_by_category(const std::string& annotator_id, std::int64_t t, CategoryField field,
                                      const std::string& value, int window_tasks) const {
    if (!contains(windows_.tasks, window_tasks)) {
        throw UsageError("task window of " + std::to_string(window_tasks) + " is not configured");
    }
    auto it = by_category_.find({annotator_id, static_cast<int>(field), value});
    if (it == by_category_.end()) {
        return kMissing;
    }
    const Series& s = it->second;
    const auto hi = static_cast<std::size_t>(std::lower_bound(s.times.begin(), s.times.end(), t) - s.times.begin());
    if (hi == 0) {
        return kMissing;
    }
    const std::size_t lo = hi > static_cast<std::size_t>(window_tasks) ? hi - static_cast<std::size_t>(window_tasks) : 0;
    const std::int64_t errors = s.errors[hi] - s.errors[lo];
    const auto count = static_cast<std::int64_t>(hi - lo);
    return static_cast<double>(count - errors) / static_cast<double>(count);
}

std::int64_t HistoryIndex::volume(const std::string& annotator_id, std::int64_t t, int window_days) const {
    check_days(window_days);
    auto it = by_annotator_.find(annotator_id);
    if (it == by_annotator_.end()) {
        return 0;
    }
    const auto& times = it->second.times;
    const std::int64_t from = t - window_days * kSecondsPerDay;
    return std::lower_bound(times.begin(), times.end(), t) - std::lower_bound(times.begin(), times.end(), from);
}

double rolling_error_rate(std::span<const AnnotationEvent> log, const std::string& annotator_id,
                          Application app, std::int64_t t, int window_days, RateScope scope,
                          ErrorSeverity severity) {
    return HistoryIndex(log).error_rate(annotator_id, app, t, window_days, scope, severity);
}

double rolling_rate_by_category(std::span<const AnnotationEvent> log, const std::string& annotator_id,
                                std::int64_t t, CategoryField field, const std::string& value, int window_tasks) {
    return HistoryIndex(log).rate_by_category(annotator_id, t, field, value, window_tasks);
}

TenureVolume tenure_and_volume(const HistoryIndex& index, std::span<const AnnotatorProfile> profiles,
                               const std::string& annotator_id, std::int64_t t) {
    auto it = std::find_if(profiles.begin(), profiles.end(),
                           [&](const AnnotatorProfile& p) { return p.annotator_id == annotator_id; });
    if (it == profiles.end()) {
        throw DataError("unknown annotator '" + annotator_id + "'");
    }
    TenureVolume tv;
    tv.tenure_full_days = std::max<std::int64_t>(0, (t - it->activation_date) / kSecondsPerDay);
    tv.tenure_updated_days = std::max<std::int64_t>(0, (t - it->join_date) / kSecondsPerDay);
    for (int d : index.windows().days) {
        tv.vol_last.push_back(index.volume(annotator_id, t, d));
    }
    return tv;
}

FeatureMatrix build_feature_matrix(std::span<const AnnotationEvent> log, std::span<const AnnotatorProfile> profiles,
                                   const WindowConfig& windows) {
    FeatureMatrix m;
    m.schema = default_schema(windows);
    const std::size_t n = log.size();
    m.columns.resize(m.schema.features.size());
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
        if (m.schema.features[c].kind == FeatureKind::Numeric) {
            m.columns[c].numeric.assign(n, kMissing);
        } else {
            m.columns[c].categorical.assign(n, std::string());
        }
    }
    m.task_ids.reserve(n);
    m.target.reserve(n);

    std::unordered_map<std::string_view, std::size_t> profile_of;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        profile_of.emplace(profiles[i].annotator_id, i);
    }

    const HistoryIndex index(log, windows);
    auto col = [&](std::string_view name) -> FeatureColumn& { return m.columns[m.schema.index_of(name)]; };

    // Resolve column positions once.
    struct DayCols {
        FeatureColumn *err, *err_all, *maj, *maj_all, *diff, *vol;
    };
    std::vector<DayCols> day_cols;
    for (int d : windows.days) {
        const std::string ds = std::to_string(d);
        day_cols.push_back({&col("error_" + ds), &col("error_" + ds + "_all"), &col("maj_error_" + ds),
                            &col("maj_error_" + ds + "_all"), &col("error_" + ds + "_diff"),
                            &col("vol_last_" + ds)});
    }
    std::vector<FeatureColumn*> media_cols;
    std::vector<FeatureColumn*> query_cols;
    for (int k : windows.tasks) {
        media_cols.push_back(&col("error_rolling_output_media_type_" + std::to_string(k)));
        query_cols.push_back(&col("error_rolling_input_query_type_user_" + std::to_string(k)));
    }
    auto& occurrences = col("input_occurrences").numeric;
    auto& conversion = col("input_conversion_rate").numeric;
    auto& embed = col("in_out_embedding_distance").numeric;
    auto& edit = col("in_out_edit_distance").numeric;
    auto& input_media = col("input_media_type").categorical;
    auto& output_media = col("output_media_type").categorical;
    auto& misspelled = col("input_misspelled").numeric;
    auto& language = col("input_language").categorical;
    auto& query_type = col("input_query_type").categorical;
    auto& storefront = col("storefront_name").categorical;
    auto& application = col("application").categorical;
    auto& tenure_full = col("tenure_full_days").numeric;
    auto& tenure_updated = col("tenure_updated_days").numeric;
    auto& qual_trials = col("qualification_trials").numeric;
    auto& qual_rate = col("qualification_agreement_rate").numeric;
    auto& nth = col("nth_task_in_session").numeric;
    auto& into_session = col("seconds_into_session").numeric;
    auto& answer = col("answer_value").categorical;
    auto& time_on_task = col("time_on_task").numeric;
    auto& comment = col("comment_length").numeric;

    const TrigramEmbedder embedder;
    for (std::size_t i = 0; i < n; ++i) {
        const AnnotationEvent& e = log[i];
        auto pit = profile_of.find(e.annotator_id);
        if (pit == profile_of.end()) {
            throw DataError("task '" + e.task_id + "': unknown annotator '" + e.annotator_id + "'");
        }
        const AnnotatorProfile& profile = profiles[pit->second];
        m.task_ids.push_back(e.task_id);
        m.target.push_back(derive_verdict(e).is_error ? 1 : 0);

        occurrences[i] = static_cast<double>(e.input_occurrences);
        conversion[i] = e.input_conversion_rate;
        embed[i] = embedder.distance(e.input_text, e.output_text);
        edit[i] = static_cast<double>(edit_distance(e.input_text, e.output_text));
        input_media[i] = e.input_media_type;
        output_media[i] = e.output_media_type;
        misspelled[i] = e.input_misspelled ? 1.0 : 0.0;
        language[i] = e.input_language;
        query_type[i] = e.input_query_type;
        storefront[i] = e.storefront;
        application[i] = std::string(to_string(e.application));

        for (std::size_t w = 0; w < windows.days.size(); ++w) {
            const int d = windows.days[w];
            const double self = index.error_rate(e.annotator_id, e.application, e.timestamp, d, RateScope::Self,
                                                 ErrorSeverity::Any);
            const double all = index.error_rate(e.annotator_id, e.application, e.timestamp, d, RateScope::All,
                                                ErrorSeverity::Any);
            day_cols[w].err->numeric[i] = self;
            day_cols[w].err_all->numeric[i] = all;
            day_cols[w].maj->numeric[i] = index.error_rate(e.annotator_id, e.application, e.timestamp, d,
                                                           RateScope::Self, ErrorSeverity::Major);
            day_cols[w].maj_all->numeric[i] = index.error_rate(e.annotator_id, e.application, e.timestamp, d,
                                                               RateScope::All, ErrorSeverity::Major);
            day_cols[w].diff->numeric[i] = (is_missing(self) || is_missing(all)) ? kMissing : self - all;
            day_cols[w].vol->numeric[i] = static_cast<double>(index.volume(e.annotator_id, e.timestamp, d));
        }
        tenure_full[i] = static_cast<double>(std::max<std::int64_t>(0, (e.timestamp - profile.activation_date) / kSecondsPerDay));
        tenure_updated[i] = static_cast<double>(std::max<std::int64_t>(0, (e.timestamp - profile.join_date) / kSecondsPerDay));
        qual_trials[i] = static_cast<double>(profile.qualification_trials);
        qual_rate[i] = profile.qualification_agreement_rate;
        for (std::size_t w = 0; w < windows.tasks.size(); ++w) {
            const int k = windows.tasks[w];
            media_cols[w]->numeric[i] =
                index.rate_by_category(e.annotator_id, e.timestamp, CategoryField::OutputMediaType, e.output_media_type, k);
            query_cols[w]->numeric[i] =
                index.rate_by_category(e.annotator_id, e.timestamp, CategoryField::InputQueryType, e.input_query_type, k);
        }

        nth[i] = static_cast<double>(e.nth_task_in_session);
        into_session[i] = static_cast<double>(e.seconds_into_session);
        answer[i] = std::string(to_string(e.annotator_label));
        time_on_task[i] = e.time_on_task;
        comment[i] = static_cast<double>(e.comment_length);
    }
    return m;
}

// ---------------------------------------------------------------------------

ordered_json schema_to_json(const FeatureSchema& schema) {
    ordered_json j;
    j["id_column"] = "task_id";
    j["target"] = "is_error";
    ordered_json features = ordered_json::array();
    for (const auto& f : schema.features) {
        features.push_back({{"name", f.name}, {"kind", kind_name(f.kind)}});
    }
    j["features"] = std::move(features);
    j["windows"] = {{"days", schema.windows.days}, {"tasks", schema.windows.tasks}};
    return j;
}

FeatureSchema schema_from_json(const nlohmann::json& j) {
    FeatureSchema s;
    try {
        for (const auto& f : j.at("features")) {
            s.features.push_back({f.at("name").get<std::string>(), parse_kind(f.at("kind").get<std::string>())});
        }
        j.at("windows").at("days").get_to(s.windows.days);
        j.at("windows").at("tasks").get_to(s.windows.tasks);
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("feature schema: ") + ex.what());
    }
    return s;
}

std::filesystem::path schema_path_for(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".schema.json");
    return p;
}

void write_feature_matrix(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                          const FeatureMatrix& matrix) {
    {
        std::ofstream out(schema_path, std::ios::binary);
        if (!out) {
            throw DataError("cannot write " + schema_path.string());
        }
        out << schema_to_json(matrix.schema).dump(1) << '\n';
    }
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + csv_path.string());
    }
    csv::Row row;
    row.push_back("task_id");
    for (const auto& f : matrix.schema.features) {
        row.push_back(f.name);
    }
    row.push_back("is_error");
    csv::write_row(out, row);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        row.clear();
        row.push_back(matrix.task_ids[r]);
        for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
            if (matrix.schema.features[c].kind == FeatureKind::Numeric) {
                const double v = matrix.columns[c].numeric[r];
                row.push_back(is_missing(v) ? std::string() : format_double(v));
            } else {
                row.push_back(matrix.columns[c].categorical[r]);
            }
        }
        row.push_back(std::to_string(matrix.target[r]));
        csv::write_row(out, row);
    }
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path) {
    FeatureMatrix m;
    {
        std::ifstream in(schema_path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open " + schema_path.string());
        }
        try {
            m.schema = schema_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(schema_path.string() + ": " + ex.what());
        }
    }
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + csv_path.string());
    }
    const std::size_t width = m.schema.features.size() + 2;
    csv::Row row;
    std::size_t line = 0;
    if (!csv::read_row(in, row, line) || row.size() != width || row.front() != "task_id" || row.back() != "is_error") {
        throw DataError(csv_path.string() + ": header does not match schema");
    }
    for (std::size_t c = 0; c < m.schema.features.size(); ++c) {
        if (row[c + 1] != m.schema.features[c].name) {
            throw DataError(csv_path.string() + ": column '" + row[c + 1] + "' does not match schema feature '" +
                            m.schema.features[c].name + "'");
        }
    }
    m.columns.resize(m.schema.features.size());
    while (csv::read_row(in, row, line)) {
        if (row.size() == 1 && row[0].empty()) {
            continue;
        }
        if (row.size() != width) {
            throw DataError(csv_path.string() + " line " + std::to_string(line) + ": wrong field count");
        }
        m.task_ids.push_back(row[0]);
        for (std::size_t c = 0; c < m.schema.features.size(); ++c) {
            const std::string& cell = row[c + 1];
            if (m.schema.features[c].kind == FeatureKind::Numeric) {
                double v = kMissing;
                if (!cell.empty()) {
                    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                        throw DataError(csv_path.string() + " line " + std::to_string(line) + ": bad number '" +
                                        cell + "'");
                    }
                }
                m.columns[c].numeric.push_back(v);
            } else {
                m.columns[c].categorical.push_back(cell);
            }
        }
        if (row.back() != "0" && row.back() != "1") {
            throw DataError(csv_path.string() + " line " + std::to_string(line) + ": is_error must be 0 or 1");
        }
        m.target.push_back(row.back() == "1" ? 1 : 0);
    }
    m.validate();
    return m;
}

}  // namespace aed
