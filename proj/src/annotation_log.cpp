#include "aed/annotation_log.hpp"

#include "aed/csv.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace aed {

using nlohmann::ordered_json;

namespace {

constexpr const char* kFields[] = {
    "task_id", "annotator_id", "application", "storefront", "timestamp", "session_id",
    "nth_task_in_session", "seconds_into_session", "input_text", "output_text",
    "input_media_type", "output_media_type", "input_language", "input_query_type",
    "input_misspelled", "input_occurrences", "input_conversion_rate", "annotator_label",
    "problem_flagged", "time_on_task", "comment_length", "audit_label",
};
constexpr std::size_t kFieldCount = std::size(kFields);

[[noreturn]] void fail_field(const std::string& task_id, const std::string& field, const std::string& what) {
    throw DataError("task '" + task_id + "': field '" + field + "' " + what);
}

void validate_event(const AnnotationEvent& e) {
    if (e.task_id.empty()) {
        throw DataError("event with empty task_id");
    }
    if (e.annotator_id.empty()) {
        fail_field(e.task_id, "annotator_id", "is empty");
    }
    if (e.session_id.empty()) {
        fail_field(e.task_id, "session_id", "is empty");
    }
    if (e.nth_task_in_session < 1) {
        fail_field(e.task_id, "nth_task_in_session", "must be >= 1");
    }
    if (e.seconds_into_session < 0) {
        fail_field(e.task_id, "seconds_into_session", "must be non-negative");
    }
    if (e.input_media_type != "keyboard" && e.input_media_type != "voice") {
        fail_field(e.task_id, "input_media_type", "must be keyboard or voice");
    }
    if (e.input_occurrences < 0) {
        fail_field(e.task_id, "input_occurrences", "must be non-negative");
    }
    if (!(e.input_conversion_rate >= 0.0 && e.input_conversion_rate <= 1.0)) {
        fail_field(e.task_id, "input_conversion_rate", "must lie in [0,1]");
    }
    if (!(std::isfinite(e.time_on_task) && e.time_on_task > 0.0)) {
        fail_field(e.task_id, "time_on_task", "must be positive and finite");
    }
    if (e.comment_length < 0) {
        fail_field(e.task_id, "comment_length", "must be non-negative");
    }
}

ordered_json to_json(const AnnotationEvent& e) {
    ordered_json j;
    j["task_id"] = e.task_id;
    j["annotator_id"] = e.annotator_id;
    j["application"] = std::string(to_string(e.application));
    j["storefront"] = e.storefront;
    j["timestamp"] = e.timestamp;
    j["session_id"] = e.session_id;
    j["nth_task_in_session"] = e.nth_task_in_session;
    j["seconds_into_session"] = e.seconds_into_session;
    j["input_text"] = e.input_text;
    j["output_text"] = e.output_text;
    j["input_media_type"] = e.input_media_type;
    j["output_media_type"] = e.output_media_type;
    j["input_language"] = e.input_language;
    j["input_query_type"] = e.input_query_type;
    j["input_misspelled"] = e.input_misspelled;
    j["input_occurrences"] = e.input_occurrences;
    j["input_conversion_rate"] = e.input_conversion_rate;
    j["annotator_label"] = std::string(to_string(e.annotator_label));
    j["problem_flagged"] = e.problem_flagged;
    j["time_on_task"] = e.time_on_task;
    j["comment_length"] = e.comment_length;
    j["audit_label"] = std::string(to_string(e.audit_label));
    return j;
}

AnnotationEvent from_json(const ordered_json& j) {
    AnnotationEvent e;
    j.at("task_id").get_to(e.task_id);
    j.at("annotator_id").get_to(e.annotator_id);
    e.application = parse_application(j.at("application").get<std::string>());
    j.at("storefront").get_to(e.storefront);
    j.at("timestamp").get_to(e.timestamp);
    j.at("session_id").get_to(e.session_id);
    j.at("nth_task_in_session").get_to(e.nth_task_in_session);
    j.at("seconds_into_session").get_to(e.seconds_into_session);
    j.at("input_text").get_to(e.input_text);
    j.at("output_text").get_to(e.output_text);
    j.at("input_media_type").get_to(e.input_media_type);
    j.at("output_media_type").get_to(e.output_media_type);
    j.at("input_language").get_to(e.input_language);
    j.at("input_query_type").get_to(e.input_query_type);
    j.at("input_misspelled").get_to(e.input_misspelled);
    j.at("input_occurrences").get_to(e.input_occurrences);
    j.at("input_conversion_rate").get_to(e.input_conversion_rate);
    e.annotator_label = parse_label(j.at("annotator_label").get<std::string>());
    j.at("problem_flagged").get_to(e.problem_flagged);
    j.at("time_on_task").get_to(e.time_on_task);
    j.at("comment_length").get_to(e.comment_length);
    e.audit_label = parse_label(j.at("audit_label").get<std::string>());
    return e;
}

csv::Row to_csv_row(const AnnotationEvent& e) {
    return {
        e.task_id,
        e.annotator_id,
        std::string(to_string(e.application)),
        e.storefront,
        std::to_string(e.timestamp),
        e.session_id,
        std::to_string(e.nth_task_in_session),
        std::to_string(e.seconds_into_session),
        e.input_text,
        e.output_text,
        e.input_media_type,
        e.output_media_type,
        e.input_language,
        e.input_query_type,
        e.input_misspelled ? "true" : "false",
        std::to_string(e.input_occurrences),
        format_double(e.input_conversion_rate),
        std::string(to_string(e.annotator_label)),
        e.problem_flagged ? "true" : "false",
        format_double(e.time_on_task),
        std::to_string(e.comment_length),
        std::string(to_string(e.audit_label)),
    };
}

template <typename T>
T parse_number(const std::string& text, const char* field) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw DataError(std::string("field '") + field + "': cannot parse '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& text, const char* field) {
    if (text == "true") {
        return true;
    }
    if (text == "false") {
        return false;
    }
    throw DataError(std::string("field '") + field + "': expected true/false, got '" + text + "'");
}

AnnotationEvent from_csv_row(const csv::Row& r) {
    AnnotationEvent e;
    e.task_id = r[0];
    e.annotator_id = r[1];
    e.application = parse_application(r[2]);
    e.storefront = r[3];
    e.timestamp = parse_number<std::int64_t>(r[4], kFields[4]);
    e.session_id = r[5];
    e.nth_task_in_session = parse_number<int>(r[6], kFields[6]);
    e.seconds_into_session = parse_number<std::int64_t>(r[7], kFields[7]);
    e.input_text = r[8];
    e.output_text = r[9];
    e.input_media_type = r[10];
    e.output_media_type = r[11];
    e.input_language = r[12];
    e.input_query_type = r[13];
    e.input_misspelled = parse_bool(r[14], kFields[14]);
    e.input_occurrences = parse_number<std::int64_t>(r[15], kFields[15]);
    e.input_conversion_rate = parse_number<double>(r[16], kFields[16]);
    e.annotator_label = parse_label(r[17]);
    e.problem_flagged = parse_bool(r[18], kFields[18]);
    e.time_on_task = parse_number<double>(r[19], kFields[19]);
    e.comment_length = parse_number<int>(r[20], kFields[20]);
    e.audit_label = parse_label(r[21]);
    return e;
}

}  // namespace

ErrorVerdict derive_verdict(const AnnotationEvent& event) {
    const int distance = ordinal_distance(event.annotator_label, event.audit_label);
    return ErrorVerdict{distance != 0, distance > 2};
}

LogFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? LogFormat::Csv : LogFormat::Jsonl;
}

void validate_log(std::span<const AnnotationEvent> events) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(events.size());
    std::map<std::string_view, std::vector<const AnnotationEvent*>> sessions;
    for (const AnnotationEvent& e : events) {
        validate_event(e);
        if (!seen.insert(e.task_id).second) {
            fail_field(e.task_id, "task_id", "is not unique");
        }
        sessions[e.session_id].push_back(&e);
    }
    for (auto& [session, members] : sessions) {
        std::stable_sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
            return std::tie(a->timestamp, a->nth_task_in_session) <
                   std::tie(b->timestamp, b->nth_task_in_session);
        });
        for (std::size_t i = 1; i < members.size(); ++i) {
            const AnnotationEvent& prev = *members[i - 1];
            const AnnotationEvent& cur = *members[i];
            if (cur.nth_task_in_session <= prev.nth_task_in_session) {
                fail_field(cur.task_id, "nth_task_in_session",
                           "is not strictly increasing within session '" + std::string(session) + "'");
            }
            if (cur.seconds_into_session < prev.seconds_into_session) {
                fail_field(cur.task_id, "seconds_into_session",
                           "decreases within session '" + std::string(session) + "'");
            }
        }
    }
}

std::vector<AnnotationEvent> parse_jsonl_log(std::istream& in) {
    std::vector<AnnotationEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            events.push_back(from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError("line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const DataError& ex) {
            throw DataError("line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    validate_log(events);
    return events;
}

std::vector<AnnotationEvent> parse_csv_log(std::istream& in) {
    std::vector<AnnotationEvent> events;
    csv::Row row;
    std::size_t line = 0;
    if (!csv::read_row(in, row, line)) {
        return events;
    }
    if (row.size() != kFieldCount || !std::equal(row.begin(), row.end(), std::begin(kFields))) {
        throw DataError("line 1: CSV header does not match the annotation log schema");
    }
    while (csv::read_row(in, row, line)) {
        if (row.size() == 1 && row[0].empty()) {
            continue;
        }
        if (row.size() != kFieldCount) {
            throw DataError("line " + std::to_string(line) + ": expected " + std::to_string(kFieldCount) +
                            " fields, got " + std::to_string(row.size()));
        }
        try {
            events.push_back(from_csv_row(row));
        } catch (const DataError& ex) {
            throw DataError("line " + std::to_string(line) + ": " + ex.what());
        }
    }
    validate_log(events);
    return events;
}

std::vector<AnnotationEvent> read_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open log " + path.string());
    }
    return format_for_path(path) == LogFormat::Csv ? parse_csv_log(in) : parse_jsonl_log(in);
}

void write_log(std::ostream& out, std::span<const AnnotationEvent> events, LogFormat format) {
    if (format == LogFormat::Jsonl) {
        for (const AnnotationEvent& e : events) {
            out << to_json(e).dump() << '\n';
        }
        return;
    }
    csv::write_row(out, csv::Row(std::begin(kFields), std::end(kFields)));
    for (const AnnotationEvent& e : events) {
        csv::write_row(out, to_csv_row(e));
    }
}

void write_log(const std::filesystem::path& path, std::span<const AnnotationEvent> events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write log " + path.string());
    }
    write_log(out, events, format_for_path(path));
}

DatasetSplit split_log(std::span<const AnnotationEvent> events, double test_fraction,
                       double validation_fraction, std::uint64_t seed) {
    const std::size_t n = events.size();
    if (n < 10) {
        throw DataError("split_log needs at least 10 events, got " + std::to_string(n));
    }
    if (!(test_fraction >= 0.0 && test_fraction < 1.0) ||
        !(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw UsageError("split fractions must lie in [0,1)");
    }
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    const auto n_val =
        static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n - n_test)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    // 0 = train, 1 = validation, 2 = test
    std::vector<std::uint8_t> bucket(n, 0);
    for (std::size_t i = 0; i < n_test; ++i) {
        bucket[order[i]] = 2;
    }
    for (std::size_t i = n_test; i < n_test + n_val; ++i) {
        bucket[order[i]] = 1;
    }

    DatasetSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        auto& target = bucket[i] == 2 ? split.test_ids : bucket[i] == 1 ? split.validation_ids : split.train_ids;
        target.push_back(events[i].task_id);
    }
    return split;
}

void write_split(const std::filesystem::path& path, const DatasetSplit& split) {
    ordered_json j;
    j["seed"] = split.seed;
    j["train_ids"] = split.train_ids;
    j["validation_ids"] = split.validation_ids;
    j["test_ids"] = split.test_ids;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write split " + path.string());
    }
    out << j.dump(1) << '\n';
}

DatasetSplit read_split(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open split " + path.string());
    }
    try {
        const ordered_json j = ordered_json::parse(in);
        DatasetSplit split;
        j.at("seed").get_to(split.seed);
        j.at("train_ids").get_to(split.train_ids);
        j.at("validation_ids").get_to(split.validation_ids);
        j.at("test_ids").get_to(split.test_ids);
        return split;
    } catch (const nlohmann::json::exception& ex) {
        throw DataError("split " + path.string() + ": " + ex.what());
    }
}

}  // namespace aed
