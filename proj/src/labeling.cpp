#include "polarimeter/labeling.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "polarimeter/parallel.hpp"
#include "polarimeter/tsv.hpp"

namespace polarimeter::labeling {

namespace fs = std::filesystem;

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::None: return "none";
        case Provenance::Seed: return "seed";
        case Provenance::Propagation: return "propagation";
        case Provenance::Classifier: return "classifier";
    }
    return "none";
}

namespace {

std::optional<Provenance> parse_provenance(std::string_view s) {
    if (s == "none") return Provenance::None;
    if (s == "seed") return Provenance::Seed;
    if (s == "propagation") return Provenance::Propagation;
    if (s == "classifier") return Provenance::Classifier;
    return std::nullopt;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

}  // namespace

Stance stance_of(const LabelMap& labels, const std::string& user_id) {
    const auto it = labels.find(user_id);
    return it == labels.end() ? Stance::Unlabeled : it->second.value;
}

void PropagationConfig::validate() const {
    if (supp_threshold < 1 || opp_threshold < 1) throw ConfigError("propagation thresholds must be >= 1");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
}

LabelMap parse_seeds(std::string_view content, const graph::ProfileMap* profiles) {
    std::unordered_map<std::string, std::string> by_handle;
    if (profiles)
        for (const auto& [id, p] : *profiles) by_handle.emplace(casefold(p.handle), id);

    LabelMap seeds;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_ws(line);
        if (fields.empty() || fields[0].front() == '#') continue;
        if (fields.size() < 2)
            throw ConfigError("seed file line " + std::to_string(line_no) + ": expected '<user> <stance>'");
        const auto stance = parse_stance(fields[1]);
        if (!stance || *stance == Stance::Unlabeled)
            throw ConfigError("seed file line " + std::to_string(line_no) + ": unknown stance '" +
                              std::string(fields[1]) + "'");

        std::string user(fields[0]);
        if (profiles && !profiles->count(user)) {
            std::string_view h = fields[0];
            if (!h.empty() && h.front() == '@') h.remove_prefix(1);
            if (auto it = by_handle.find(casefold(h)); it != by_handle.end()) user = it->second;
        }
        const auto label = StanceLabel::seed(*stance);
        auto [it, inserted] = seeds.emplace(user, label);
        if (!inserted && it->second.value != *stance)
            throw ConfigError("seed file line " + std::to_string(line_no) + ": conflicting stance for '" + user + "'");
    }
    return seeds;
}

LabelMap load_seeds(const fs::path& path, const graph::ProfileMap* profiles) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open seed file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_seeds(buf.str(), profiles);
}

PropagationResult propagate(const graph::ProfileMap& profiles, const graph::AudienceMap& audiences,
                            const LabelMap& initial, const PropagationConfig& config) {
    config.validate();

    std::vector<const graph::UserProfile*> users;
    std::unordered_map<std::string_view, std::uint32_t> user_index;
    users.reserve(profiles.size());
    for (const auto& [id, p] : profiles) {
        user_index.emplace(id, static_cast<std::uint32_t>(users.size()));
        users.push_back(&p);
    }

    std::unordered_map<std::string_view, std::uint32_t> tweet_index;
    std::vector<std::vector<std::uint32_t>> sharers;
    sharers.reserve(audiences.size());
    for (const auto& [id, aud] : audiences) {
        tweet_index.emplace(id, static_cast<std::uint32_t>(sharers.size()));
        auto& list = sharers.emplace_back();
        for (const auto& s : aud.sharers)
            if (auto it = user_index.find(s); it != user_index.end()) list.push_back(it->second);
    }

    std::vector<std::vector<std::uint32_t>> retweets(users.size());
    for (std::size_t u = 0; u < users.size(); ++u)
        for (const auto& t : users[u]->retweeted_tweet_ids)
            if (auto it = tweet_index.find(t); it != tweet_index.end()) retweets[u].push_back(it->second);

    std::vector<Stance> state(users.size(), Stance::Unlabeled);
    for (const auto& [id, label] : initial)
        if (auto it = user_index.find(id); it != user_index.end()) state[it->second] = label.value;

    PropagationResult result;
    result.labels = initial;

    std::vector<std::uint8_t> has_supp(sharers.size()), has_opp(sharers.size());
    std::vector<Stance> decided(users.size());
    for (std::uint32_t round = 1; round <= config.max_iterations; ++round) {
        for (std::size_t t = 0; t < sharers.size(); ++t) {
            has_supp[t] = has_opp[t] = 0;
            for (auto s : sharers[t]) {
                if (state[s] == Stance::Supp) has_supp[t] = 1;
                if (state[s] == Stance::Opp) has_opp[t] = 1;
            }
        }

        parallel_for(users.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t u = begin; u < end; ++u) {
                decided[u] = Stance::Unlabeled;
                if (state[u] != Stance::Unlabeled) continue;
                std::uint32_t supp = 0, opp = 0;
                for (auto t : retweets[u]) {
                    supp += has_supp[t];
                    opp += has_opp[t];
                }
                const bool to_supp = supp >= config.supp_threshold && opp == 0;
                const bool to_opp = opp >= config.opp_threshold && supp == 0;
                if (to_supp != to_opp) decided[u] = to_supp ? Stance::Supp : Stance::Opp;
            }
        });

        IterationTrace trace{static_cast<int>(round), 0, 0};
        for (std::size_t u = 0; u < users.size(); ++u) {
            if (decided[u] == Stance::Unlabeled) continue;
            state[u] = decided[u];
            result.labels[users[u]->user_id] = StanceLabel::propagated(decided[u], static_cast<int>(round));
            (decided[u] == Stance::Supp ? trace.added_supp : trace.added_opp)++;
        }
        result.trace.push_back(trace);
        if (trace.added() == 0) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::string serialize_labels(const LabelMap& labels) {
    std::string out = "user_id\tstance\tprovenance\titeration\n";
    for (const auto& [id, l] : labels) {
        out += id;
        out += '\t';
        out += stance_name(l.value);
        out += '\t';
        out += provenance_name(l.provenance);
        out += '\t';
        out += std::to_string(l.iteration);
        out += '\n';
    }
    return out;
}

void write_labels(const LabelMap& labels, const fs::path& path) { tsv::write_atomically(path, serialize_labels(labels)); }

LabelMap read_labels(const fs::path& path) {
    const auto lines = tsv::read_lines(path);
    LabelMap labels;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = tsv::split(lines[i]);
        std::optional<Stance> stance;
        std::optional<Provenance> prov;
        int iteration = 0;
        if (f.size() == 4) {
            stance = parse_stance(f[1]);
            prov = parse_provenance(f[2]);
            const auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), iteration);
            if (ec != std::errc{} || ptr != f[3].data() + f[3].size()) prov.reset();
        }
        if (!stance || !prov) throw std::runtime_error(path.string() + ": malformed label row " + std::to_string(i + 1));
        labels[std::string(f[0])] = StanceLabel{*stance, *prov, iteration};
    }
    return labels;
}

void write_trace(const std::vector<IterationTrace>& trace, const fs::path& path) {
    std::string out = "iteration\tadded_supp\tadded_opp\n";
    for (const auto& t : trace)
        out += std::to_string(t.iteration) + '\t' + std::to_string(t.added_supp) + '\t' + std::to_string(t.added_opp) + '\n';
    tsv::write_atomically(path, out);
}

}  // namespace polarimeter::labeling
