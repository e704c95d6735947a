#include "aed/synthgen.hpp"

#include "aed/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

namespace aed {

using nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 23> kStorefronts = {
    "us", "gb", "de", "fr", "jp", "ca", "au", "it", "es", "br", "mx", "nl",
    "se", "kr", "in", "ch", "at", "be", "dk", "no", "fi", "pl", "tw",
};
// Primary input language per storefront, indices into kLanguages.
constexpr std::array<int, 23> kStorefrontLanguage = {
    0, 0, 1, 2, 3, 0, 0, 4, 5, 6, 5, 7, 8, 9, 10, 1, 1, 7, 11, 12, 13, 14, 15,
};
constexpr std::array<const char*, 21> kLanguages = {
    "en", "de", "fr", "ja", "it", "es", "pt", "nl", "sv", "ko", "hi",
    "da", "nb", "fi", "pl", "zh", "ar", "ru", "tr", "he", "th",
};
constexpr std::array<const char*, 6> kOutputMediaTypes = {
    "song", "album", "artist", "playlist", "app", "video",
};
constexpr std::array<const char*, 5> kQueryTypes = {
    "navigational", "informational", "exploratory", "transactional", "ambiguous",
};
constexpr const char* kSyllables[] = {
    "ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "po", "da", "qui",
    "bel", "mar", "ton", "lin", "gra", "sho", "ver", "pla",
};

// Output media type weights per application.
constexpr std::array<std::array<double, 6>, 3> kMediaWeights = {{
    {0.45, 0.20, 0.20, 0.12, 0.01, 0.02},
    {0.02, 0.01, 0.02, 0.02, 0.90, 0.03},
    {0.05, 0.03, 0.05, 0.02, 0.05, 0.80},
}};
// True-label distribution (Unacceptable..Perfect) per application.
constexpr std::array<std::array<double, 5>, 3> kLabelWeights = {{
    {0.18, 0.17, 0.22, 0.20, 0.23},
    {0.22, 0.20, 0.23, 0.20, 0.15},
    {0.20, 0.18, 0.24, 0.20, 0.18},
}};

std::size_t app_index(Application app) { return static_cast<std::size_t>(app); }

// Separate, reproducible streams for population and log generation.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

std::string zero_pad(int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

std::vector<std::string> make_vocabulary(std::mt19937_64& rng, std::size_t size) {
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kSyllables) - 1);
    std::uniform_int_distribution<int> len(2, 3);
    std::vector<std::string> vocab;
    while (vocab.size() < size) {
        std::string word;
        for (int i = len(rng); i > 0; --i) {
            word += kSyllables[pick(rng)];
        }
        if (std::find(vocab.begin(), vocab.end(), word) == vocab.end()) {
            vocab.push_back(std::move(word));
        }
    }
    return vocab;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

// Single-character substitution inside a non-space position.
std::string misspell(std::string text, std::mt19937_64& rng) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != ' ') {
            positions.push_back(i);
        }
    }
    if (positions.empty()) {
        return text;
    }
    std::uniform_int_distribution<std::size_t> at(0, positions.size() - 1);
    std::uniform_int_distribution<int> letter(0, 25);
    const std::size_t pos = positions[at(rng)];
    char replacement = static_cast<char>('a' + letter(rng));
    if (replacement == text[pos]) {
        replacement = replacement == 'z' ? 'a' : static_cast<char>(replacement + 1);
    }
    text[pos] = replacement;
    return text;
}

RelevanceLabel displace(RelevanceLabel truth, std::mt19937_64& rng) {
    std::geometric_distribution<int> extra(0.55);
    const int k = 1 + extra(rng);
    const int lvl = level(truth);
    const int up_room = 5 - lvl;
    const int down_room = lvl - 1;
    bool up = up_room > 0;
    if (up_room > 0 && down_room > 0) {
        up = std::bernoulli_distribution(0.5)(rng);
    }
    const int step = std::min(k, up ? up_room : down_room);
    return label_from_level(up ? lvl + step : lvl - step);
}

double session_position_norm(int nth_task_in_session) {
    return std::min(1.0, static_cast<double>(nth_task_in_session - 1) / 40.0);
}

}  // namespace

void validate(const GenConfig& c) {
    if (c.n_annotators < 0 || c.n_tasks < 0) {
        throw UsageError("n_annotators and n_tasks must be non-negative");
    }
    if (c.n_days < 1) {
        throw UsageError("n_days must be >= 1");
    }
    if (!(c.target_error_rate > 0.0 && c.target_error_rate < 1.0)) {
        throw UsageError("target_error_rate must lie in (0,1)");
    }
    double share_sum = 0.0;
    for (double s : c.app_shares) {
        if (!(s >= 0.0)) {
            throw UsageError("application shares must be non-negative");
        }
        share_sum += s;
    }
    if (!(share_sum > 0.0)) {
        throw UsageError("application shares must not all be zero");
    }
}

ordered_json to_json(const GenConfig& c) {
    ordered_json j;
    j["n_annotators"] = c.n_annotators;
    j["n_tasks"] = c.n_tasks;
    j["start_date"] = c.start_date;
    j["n_days"] = c.n_days;
    j["target_error_rate"] = c.target_error_rate;
    j["calibrate_intercept"] = c.calibrate_intercept;
    j["beta"] = {{"intercept", c.beta.intercept},   {"skill", c.beta.skill}, {"difficulty", c.beta.difficulty},
                 {"fatigue", c.beta.fatigue},       {"rush", c.beta.rush}};
    j["app_offsets"] = c.app_offsets;
    j["app_shares"] = c.app_shares;
    j["seed"] = c.seed;
    return j;
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
    GenConfig c;
    try {
        c.n_annotators = j.value("n_annotators", c.n_annotators);
        c.n_tasks = j.value("n_tasks", c.n_tasks);
        c.start_date = j.value("start_date", c.start_date);
        c.n_days = j.value("n_days", c.n_days);
        c.target_error_rate = j.value("target_error_rate", c.target_error_rate);
        c.calibrate_intercept = j.value("calibrate_intercept", c.calibrate_intercept);
        if (j.contains("beta")) {
            const auto& b = j.at("beta");
            c.beta.intercept = b.value("intercept", c.beta.intercept);
            c.beta.skill = b.value("skill", c.beta.skill);
            c.beta.difficulty = b.value("difficulty", c.beta.difficulty);
            c.beta.fatigue = b.value("fatigue", c.beta.fatigue);
            c.beta.rush = b.value("rush", c.beta.rush);
        }
        if (j.contains("app_offsets")) {
            j.at("app_offsets").get_to(c.app_offsets);
        }
        if (j.contains("app_shares")) {
            j.at("app_shares").get_to(c.app_shares);
        }
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& ex) {
        throw UsageError(std::string("generator config: ") + ex.what());
    }
    validate(c);
    return c;
}

Population generate_population(const GenConfig& config) {
    validate(config);
    std::mt19937_64 rng = make_stream(config.seed, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Population pop;
    pop.annotators.reserve(static_cast<std::size_t>(config.n_annotators));
    for (int i = 0; i < config.n_annotators; ++i) {
        AnnotatorProfile a;
        a.annotator_id = "A" + zero_pad(i, 4);
        a.skill = normal(rng);
        const auto joined_days_before = std::uniform_int_distribution<int>(1, 540)(rng);
        a.join_date = config.start_date - joined_days_before * kSecondsPerDay -
                      std::uniform_int_distribution<std::int64_t>(0, kSecondsPerDay - 1)(rng);
        a.activation_date = a.join_date;
        if (unit(rng) < 0.25) {
            const double frac = 0.2 + 0.6 * unit(rng);
            a.activation_date =
                a.join_date + static_cast<std::int64_t>(frac * static_cast<double>(config.start_date - a.join_date));
        }
        std::geometric_distribution<int> failures(sigmoid(0.8 + 0.8 * a.skill));
        a.qualification_trials = 1 + std::min(failures(rng), 9);
        a.qualification_agreement_rate = round_to(sigmoid(0.9 + 0.9 * a.skill + 0.35 * normal(rng)), 1e-4);
        a.daily_volume_rate = round_to(std::exp(0.5 * normal(rng)), 1e-4);
        pop.annotators.push_back(std::move(a));
    }

    const std::vector<std::string> vocab = make_vocabulary(rng, 240);
    std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
    std::discrete_distribution<std::size_t> app_dist(config.app_shares.begin(), config.app_shares.end());
    std::vector<double> storefront_weights(kStorefronts.size());
    for (std::size_t i = 0; i < storefront_weights.size(); ++i) {
        storefront_weights[i] = 1.0 / std::pow(static_cast<double>(i + 1), 0.9);
    }
    std::discrete_distribution<std::size_t> storefront_dist(storefront_weights.begin(), storefront_weights.end());
    std::uniform_int_distribution<std::size_t> any_language(0, kLanguages.size() - 1);
    std::discrete_distribution<std::size_t> query_dist({0.35, 0.25, 0.2, 0.12, 0.08});

    pop.tasks.reserve(static_cast<std::size_t>(config.n_tasks));
    for (int j = 0; j < config.n_tasks; ++j) {
        TaskTemplate t;
        t.task_id = "T" + zero_pad(j, 7);
        t.application = kAllApplications[app_dist(rng)];
        const std::size_t app = app_index(t.application);
        const std::size_t sf = storefront_dist(rng);
        t.storefront = kStorefronts[sf];
        t.input_language = kLanguages[unit(rng) < 0.85 ? static_cast<std::size_t>(kStorefrontLanguage[sf])
                                                        : any_language(rng)];
        t.difficulty = normal(rng);
        const double voice_share = t.application == Application::MusicStreaming ? 0.25 : 0.12;
        t.input_media_type = unit(rng) < voice_share ? "voice" : "keyboard";
        std::discrete_distribution<std::size_t> media(kMediaWeights[app].begin(), kMediaWeights[app].end());
        t.output_media_type = kOutputMediaTypes[media(rng)];
        t.input_query_type = kQueryTypes[query_dist(rng)];
        t.input_occurrences =
            static_cast<std::int64_t>(std::floor(std::exp(5.5 - 0.9 * t.difficulty + 0.6 * normal(rng))));
        t.input_conversion_rate = round_to(sigmoid(-0.6 - 1.1 * t.difficulty + 0.35 * normal(rng)), 1e-4);
        std::discrete_distribution<int> label_dist(kLabelWeights[app].begin(), kLabelWeights[app].end());
        t.true_label = label_from_level(1 + label_dist(rng));

        std::vector<std::string> input;
        const int n_in = std::uniform_int_distribution<int>(1, 4)(rng);
        for (int k = 0; k < n_in; ++k) {
            input.push_back(vocab[word(rng)]);
        }
        // Higher relevance keeps more of the query in the output.
        const double keep = 0.15 + 0.18 * static_cast<double>(level(t.true_label) - 1);
        std::vector<std::string> output;
        for (const std::string& tok : input) {
            if (unit(rng) < keep) {
                output.push_back(tok);
            }
        }
        const int n_extra = std::uniform_int_distribution<int>(output.empty() ? 1 : 0, 3)(rng);
        for (int k = 0; k < n_extra; ++k) {
            output.push_back(vocab[word(rng)]);
        }
        t.input_text = join(input);
        t.output_text = join(output);
        t.input_misspelled = unit(rng) < sigmoid(-2.2 + 0.9 * t.difficulty);
        if (t.input_misspelled) {
            t.input_text = misspell(t.input_text, rng);
        }
        pop.tasks.push_back(std::move(t));
    }
    return pop;
}

double error_probability(double skill, double difficulty, double session_position_norm, double rush_factor,
                         const ErrorCoefficients& beta, double app_offset) {
    return sigmoid(beta.intercept + app_offset - beta.skill * skill + beta.difficulty * difficulty +
                   beta.fatigue * session_position_norm + beta.rush * rush_factor);
}

GeneratedLog generate_log(const Population& population, const GenConfig& config) {
    validate(config);
    GeneratedLog out;
    out.intercept = config.beta.intercept;
    if (population.tasks.empty()) {
        return out;
    }
    if (population.annotators.empty()) {
        throw DataError("generate_log: population has no annotators");
    }
    std::mt19937_64 rng = make_stream(config.seed, 2);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t n = population.tasks.size();
    std::vector<double> volume;
    volume.reserve(population.annotators.size());
    for (const auto& a : population.annotators) {
        volume.push_back(a.daily_volume_rate);
    }
    std::discrete_distribution<std::size_t> who(volume.begin(), volume.end());
    std::vector<std::size_t> per_annotator(population.annotators.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++per_annotator[who(rng)];
    }

    std::vector<std::size_t> task_order(n);
    std::iota(task_order.begin(), task_order.end(), 0);
    std::shuffle(task_order.begin(), task_order.end(), rng);

    struct Slot {
        std::size_t annotator;
        std::size_t task;
        int nth;
        double rush;
    };
    std::vector<Slot> slots;
    slots.reserve(n);
    out.events.reserve(n);

    std::size_t next_task = 0;
    std::geometric_distribution<int> session_extra(0.05);
    std::geometric_distribution<int> idle_gap(0.1);
    std::uniform_int_distribution<int> day(0, config.n_days - 1);
    std::uniform_int_distribution<std::int64_t> start_second(8 * 3600, 20 * 3600);

    for (std::size_t a = 0; a < population.annotators.size(); ++a) {
        const AnnotatorProfile& who_profile = population.annotators[a];
        std::size_t remaining = per_annotator[a];
        std::vector<std::size_t> lengths;
        while (remaining > 0) {
            const auto len = std::min<std::size_t>(remaining, 1 + static_cast<std::size_t>(session_extra(rng)));
            lengths.push_back(len);
            remaining -= len;
        }
        std::vector<std::int64_t> starts;
        for (std::size_t s = 0; s < lengths.size(); ++s) {
            starts.push_back(config.start_date + day(rng) * kSecondsPerDay + start_second(rng));
        }
        std::sort(starts.begin(), starts.end());
        std::int64_t busy_until = std::numeric_limits<std::int64_t>::min();
        for (std::size_t s = 0; s < lengths.size(); ++s) {
            const std::int64_t session_start = std::max(starts[s], busy_until + 600);
            const std::string session_id = who_profile.annotator_id + "-S" + zero_pad(static_cast<int>(s), 4);
            std::int64_t t = session_start;
            for (std::size_t k = 0; k < lengths[s]; ++k) {
                const TaskTemplate& task = population.tasks[task_order[next_task]];
                const double z = normal(rng);
                const double time_on_task =
                    std::max(1.0, round_to(std::exp(std::log(22.0) + 0.25 * task.difficulty + 0.55 * z), 0.1));
                AnnotationEvent e;
                e.task_id = task.task_id;
                e.annotator_id = who_profile.annotator_id;
                e.application = task.application;
                e.storefront = task.storefront;
                e.timestamp = t;
                e.session_id = session_id;
                e.nth_task_in_session = static_cast<int>(k) + 1;
                e.seconds_into_session = t - session_start;
                e.input_text = task.input_text;
                e.output_text = task.output_text;
                e.input_media_type = task.input_media_type;
                e.output_media_type = task.output_media_type;
                e.input_language = task.input_language;
                e.input_query_type = task.input_query_type;
                e.input_misspelled = task.input_misspelled;
                e.input_occurrences = task.input_occurrences;
                e.input_conversion_rate = task.input_conversion_rate;
                e.time_on_task = time_on_task;
                e.audit_label = task.true_label;
                e.annotator_label = task.true_label;
                const bool commented = unit(rng) < sigmoid(-2.0 + 0.4 * task.difficulty);
                e.comment_length = commented ? 1 + std::poisson_distribution<int>(5.0)(rng) : 0;
                e.problem_flagged = unit(rng) < 0.01;
                out.events.push_back(std::move(e));
                slots.push_back(Slot{a, task_order[next_task], static_cast<int>(k) + 1, -z});
                ++next_task;
                t += static_cast<std::int64_t>(std::ceil(time_on_task)) + idle_gap(rng);
            }
            busy_until = t;
        }
    }

    // Linear predictor without the intercept; common random numbers make the
    // realized error count monotone in the intercept.
    std::vector<double> linear(n);
    std::vector<double> draw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Slot& s = slots[i];
        const TaskTemplate& task = population.tasks[s.task];
        ErrorCoefficients no_intercept = config.beta;
        no_intercept.intercept = 0.0;
        linear[i] = logit(error_probability(population.annotators[s.annotator].skill, task.difficulty,
                                            session_position_norm(s.nth), s.rush, no_intercept,
                                            config.app_offsets[app_index(task.application)]));
        draw[i] = unit(rng);
    }
    auto realized_rate = [&](double intercept) {
        std::size_t errors = 0;
        for (std::size_t i = 0; i < n; ++i) {
            errors += draw[i] < sigmoid(intercept + linear[i]) ? 1 : 0;
        }
        return static_cast<double>(errors) / static_cast<double>(n);
    };

    if (config.calibrate_intercept) {
        const double target = config.target_error_rate;
        double lo = -30.0;
        double hi = 30.0;
        double best = lo;
        double best_gap = std::abs(realized_rate(lo) - target);
        for (int iter = 0; iter < 200 && best_gap > 1e-4; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double rate = realized_rate(mid);
            if (std::abs(rate - target) < best_gap) {
                best_gap = std::abs(rate - target);
                best = mid;
            }
            (rate < target ? lo : hi) = mid;
        }
        const double granularity = 0.5 / static_cast<double>(n);
        if (best_gap > std::max(0.01, granularity)) {
            throw DataError("error-rate calibration failed: closest realized rate is off by " +
                            format_double(best_gap));
        }
        out.intercept = best;
    }

    out.true_error_probability.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sigmoid(out.intercept + linear[i]);
        out.true_error_probability[i] = p;
        if (draw[i] < p) {
            out.events[i].annotator_label = displace(out.events[i].audit_label, rng);
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::tie(out.events[x].timestamp, out.events[x].task_id) <
               std::tie(out.events[y].timestamp, out.events[y].task_id);
    });
    GeneratedLog sorted;
    sorted.intercept = out.intercept;
    sorted.events.reserve(n);
    sorted.true_error_probability.reserve(n);
    for (std::size_t i : order) {
        sorted.events.push_back(std::move(out.events[i]));
        sorted.true_error_probability.push_back(out.true_error_probability[i]);
    }
    return sorted;
}

double oracle_auc(std::span<const AnnotationEvent> events, std::span<const double> probabilities) {
    if (events.size() != probabilities.size()) {
        throw DataError("oracle_auc: probabilities not aligned with events");
    }
    std::vector<int> labels;
    labels.reserve(events.size());
    for (const AnnotationEvent& e : events) {
        labels.push_back(derive_verdict(e).is_error ? 1 : 0);
    }
    return auc(probabilities, labels);
}

void write_profiles(const std::filesystem::path& path, std::span<const AnnotatorProfile> profiles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write profiles " + path.string());
    }
    for (const AnnotatorProfile& a : profiles) {
        ordered_json j;
        j["annotator_id"] = a.annotator_id;
        j["join_date"] = a.join_date;
        j["activation_date"] = a.activation_date;
        j["qualification_trials"] = a.qualification_trials;
        j["qualification_agreement_rate"] = a.qualification_agreement_rate;
        j["daily_volume_rate"] = a.daily_volume_rate;
        out << j.dump() << '\n';
    }
}

std::vector<AnnotatorProfile> read_profiles(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open profiles " + path.string());
    }
    std::vector<AnnotatorProfile> profiles;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const auto j = ordered_json::parse(line);
            AnnotatorProfile a;
            j.at("annotator_id").get_to(a.annotator_id);
            j.at("join_date").get_to(a.join_date);
            a.activation_date = j.value("activation_date", a.join_date);
            j.at("qualification_trials").get_to(a.qualification_trials);
            j.at("qualification_agreement_rate").get_to(a.qualification_agreement_rate);
            a.daily_volume_rate = j.value("daily_volume_rate", 1.0);
            if (a.qualification_trials < 1 || !(a.qualification_agreement_rate >= 0.0) ||
                a.qualification_agreement_rate > 1.0 || a.activation_date < a.join_date) {
                throw DataError("annotator '" + a.annotator_id + "' violates profile invariants");
            }
            profiles.push_back(std::move(a));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return profiles;
}

void write_hidden_probabilities(const std::filesystem::path& path, std::span<const AnnotationEvent> events,
                                std::span<const double> probabilities) {
    if (events.size() != probabilities.size()) {
        throw InvariantError("hidden probabilities not aligned with events");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        ordered_json j;
        j["task_id"] = events[i].task_id;
        j["true_error_probability"] = probabilities[i];
        out << j.dump() << '\n';
    }
}

std::vector<double> read_hidden_probabilities(const std::filesystem::path& path,
                                              std::span<const AnnotationEvent> events) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::unordered_map<std::string, double> by_id;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto j = ordered_json::parse(line);
        by_id[j.at("task_id").get<std::string>()] = j.at("true_error_probability").get<double>();
    }
    std::vector<double> out;
    out.reserve(events.size());
    for (const AnnotationEvent& e : events) {
        auto it = by_id.find(e.task_id);
        if (it == by_id.end()) {
            throw DataError("no hidden probability for task '" + e.task_id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

}  // namespace aed
