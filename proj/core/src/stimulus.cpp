#include "railmon/stimulus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "railmon/error.hpp"

namespace railmon {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

void StimulusTrace::push(double t_s, const StimulusSample& s) {
    if (!rows_.empty() && t_s < rows_.back().t_s) {
        throw Error(ErrorCode::ScenarioInvalid, fmt::format("stimulus time {} precedes {}", t_s, rows_.back().t_s));
    }
    rows_.push_back({t_s, s});
}

StimulusTrace StimulusTrace::parse_csv(std::string_view text) {
    StimulusTrace trace;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            cols.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols.size() != 6) {
            throw Error(ErrorCode::ScenarioInvalid,
                        fmt::format("stimulus csv line {}: expected 6 columns, got {}", line_no, cols.size()));
        }
        double v[6];
        bool numeric = true;
        for (std::size_t i = 0; i < 6; ++i) numeric = numeric && parse_double(cols[i], v[i]);
        if (!numeric) {
            if (trace.rows_.empty() && trim(cols[0]) == "t_s") continue;  // header
            throw Error(ErrorCode::ScenarioInvalid, fmt::format("stimulus csv line {}: non-numeric field", line_no));
        }
        trace.push(v[0], {v[1], v[2], v[3], v[4], v[5]});
    }
    return trace;
}

StimulusTrace StimulusTrace::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ScenarioInvalid, fmt::format("cannot open stimulus csv '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

StimulusSample StimulusTrace::sample_at(double t_s) const {
    if (rows_.empty()) return {};
    auto it = std::upper_bound(rows_.begin(), rows_.end(), t_s, [](double t, const Row& r) { return t < r.t_s; });
    if (it == rows_.begin()) return rows_.front().sample;
    return std::prev(it)->sample;
}

}  // namespace railmon
