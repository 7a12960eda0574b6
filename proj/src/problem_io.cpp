#include "npgi/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>

#include "npgi/errors.hpp"

namespace npgi {

namespace {

struct Token {
    std::string_view text;
    int column;
};

struct Line {
    int number;
    std::string_view raw;
    std::vector<Token> tokens;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        ++number;

        Line line{number, raw, {}};
        std::size_t first = raw.find_first_not_of(" \t");
        if (first != std::string_view::npos && raw[first] != '#') {
            std::size_t i = 0;
            while (i < raw.size()) {
                if (raw[i] == ' ' || raw[i] == '\t') {
                    ++i;
                } else if (raw[i] == ':') {
                    line.tokens.push_back({raw.substr(i, 1), static_cast<int>(i) + 1});
                    ++i;
                } else {
                    std::size_t j = i;
                    while (j < raw.size() && raw[j] != ' ' && raw[j] != '\t' && raw[j] != ':') ++j;
                    line.tokens.push_back({raw.substr(i, j - i), static_cast<int>(i) + 1});
                    i = j;
                }
            }
            lines.push_back(std::move(line));
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

class Cursor {
public:
    explicit Cursor(const Line& line) : line_(line) {}

    bool at_end() const { return pos_ >= line_.tokens.size(); }

    [[noreturn]] void fail(const std::string& msg) const {
        const int column = at_end() ? static_cast<int>(line_.raw.size()) + 1 : line_.tokens[pos_].column;
        throw ParseError(msg, line_.number, column);
    }

    [[noreturn]] void fail_at(const Token& tok, const std::string& msg) const {
        throw ParseError(msg, line_.number, tok.column);
    }

    const Token& peek() const {
        if (at_end()) fail("unexpected end of line");
        return line_.tokens[pos_];
    }

    const Token& next() {
        const Token& tok = peek();
        ++pos_;
        return tok;
    }

    void expect(std::string_view text) {
        const Token& tok = peek();
        if (tok.text != text) fail("expected '" + std::string(text) + "', found '" + std::string(tok.text) + "'");
        ++pos_;
    }

    void expect_end() const {
        if (!at_end()) fail("unexpected trailing token '" + std::string(line_.tokens[pos_].text) + "'");
    }

    int integer() {
        const Token& tok = next();
        int value = 0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
            fail_at(tok, "expected an integer, found '" + std::string(tok.text) + "'");
        }
        return value;
    }

    double real() {
        const Token& tok = next();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || !std::isfinite(value)) {
            fail_at(tok, "expected a finite number, found '" + std::string(tok.text) + "'");
        }
        return value;
    }

    /// An index in [0, bound) or '*' (all values).
    std::vector<int> index_or_star(int bound, const std::string& what) {
        const Token& tok = peek();
        if (tok.text == "*") {
            ++pos_;
            std::vector<int> all(bound);
            for (int k = 0; k < bound; ++k) all[k] = k;
            return all;
        }
        const int value = integer();
        if (value < 0 || value >= bound) {
            fail_at(tok, what + " index " + std::to_string(value) + " out of range [0, " + std::to_string(bound) + ")");
        }
        return {value};
    }

    /// One local index (or '*') per agent, expanded to flat joint indices.
    std::vector<int> joint(const JointSpace& space, const std::string& what) {
        std::vector<int> flats{0};
        for (int i = 0; i < space.agents(); ++i) {
            const auto locals = index_or_star(space.radix(i), what + " of agent " + std::to_string(i));
            std::vector<int> expanded;
            expanded.reserve(flats.size() * locals.size());
            for (int f : flats) {
                for (int l : locals) expanded.push_back(f + l * space.stride(i));
            }
            flats = std::move(expanded);
        }
        return flats;
    }

    /// Verbatim remainder of the line starting at the current token.
    std::string rest() {
        const Token& tok = peek();
        std::string_view tail = line_.raw.substr(tok.column - 1);
        const auto last = tail.find_last_not_of(" \t");
        pos_ = line_.tokens.size();
        return std::string(tail.substr(0, last + 1));
    }

    const Line& line() const { return line_; }

private:
    const Line& line_;
    std::size_t pos_ = 0;
};

bool is_header_key(std::string_view key) {
    return key == "agents" || key == "states" || key == "actions" || key == "observations" || key == "horizon" ||
           key == "start";
}

enum class StepKind { Unset, Linear, Belief };

struct StepBuilder {
    StepKind kind = StepKind::Unset;
    int first_line = 0;
    std::vector<double> linear;
    BeliefReward belief;
};

class ProblemParser {
public:
    explicit ProblemParser(std::string_view text) : lines_(split_lines(text)) {}

    Problem parse() {
        if (lines_.empty()) throw ParseError("empty problem file", 1, 1);
        read_header();
        p_.allocate();
        read_start();
        steps_.assign(p_.horizon, StepBuilder{});
        for (const Line& line : lines_) {
            if (is_header_key(line.tokens.front().text)) continue;
            body_line(line);
        }
        for (int t = 0; t < p_.horizon; ++t) {
            auto& step = steps_[t];
            if (step.kind == StepKind::Belief) {
                p_.step_rewards[t] = std::move(step.belief);
            } else if (step.kind == StepKind::Linear) {
                p_.step_rewards[t] = LinearReward{std::move(step.linear)};
            }
        }
        return std::move(p_);
    }

private:
    void read_header() {
        std::map<std::string_view, const Line*> header;
        for (const Line& line : lines_) {
            const Token& key = line.tokens.front();
            if (!is_header_key(key.text)) continue;
            if (header.contains(key.text)) {
                throw ParseError("duplicate header key '" + std::string(key.text) + ":'", line.number, key.column);
            }
            header[key.text] = &line;
        }
        auto require = [&](std::string_view key) -> Cursor {
            auto it = header.find(key);
            if (it == header.end()) {
                const int line = lines_.empty() ? 1 : lines_.front().number;
                throw ParseError("missing header key '" + std::string(key) + ":'", line, 1);
            }
            Cursor c(*it->second);
            c.next();
            c.expect(":");
            return c;
        };

        {
            Cursor c = require("agents");
            p_.agents = positive(c, "agents");
            c.expect_end();
        }
        {
            Cursor c = require("states");
            p_.states = positive(c, "states");
            c.expect_end();
        }
        {
            Cursor c = require("actions");
            p_.actions.clear();
            for (int i = 0; i < p_.agents; ++i) p_.actions.push_back(positive(c, "actions"));
            c.expect_end();
        }
        {
            Cursor c = require("observations");
            p_.observations.clear();
            for (int i = 0; i < p_.agents; ++i) p_.observations.push_back(positive(c, "observations"));
            c.expect_end();
        }
        {
            Cursor c = require("horizon");
            p_.horizon = positive(c, "horizon");
            c.expect_end();
        }
        if (static_cast<double>(p_.joint_actions()) * p_.states * std::max(p_.states, p_.joint_observations()) >
            5e8) {
            throw ParseError("problem dimensions too large for dense tables", header["states"]->number, 1);
        }
        start_ = header["start"];
        if (start_ == nullptr) require("start");
    }

    static int positive(Cursor& c, const std::string& key) {
        const Token& tok = c.peek();
        const int value = c.integer();
        if (value < 1) c.fail_at(tok, "'" + key + "' must be a positive integer");
        return value;
    }

    void body_line(const Line& line) {
        Cursor c(line);
        const Token& key = c.next();
        if (key.text == "label") {
            label_line(c);
            return;
        }
        c.expect(":");
        if (key.text == "T") {
            transition_line(c);
        } else if (key.text == "O") {
            observation_line(c);
        } else if (key.text == "R") {
            reward_line(c);
        } else if (key.text == "Rfinal") {
            final_line(c);
        } else {
            c.fail_at(key, "unknown key '" + std::string(key.text) + "'");
        }
    }

    void transition_line(Cursor& c) {
        const auto actions = c.joint(p_.action_space(), "action");
        c.expect(":");
        const auto from = c.index_or_star(p_.states, "state");
        c.expect(":");
        const auto to = c.index_or_star(p_.states, "state");
        const double prob = c.real();
        c.expect_end();
        for (int a : actions)
            for (int s : from)
                for (int n : to) p_.transition_at(a, s, n) = prob;
    }

    void observation_line(Cursor& c) {
        const auto actions = c.joint(p_.action_space(), "action");
        c.expect(":");
        const auto next = c.index_or_star(p_.states, "state");
        c.expect(":");
        const auto obs = c.joint(p_.observation_space(), "observation");
        const double prob = c.real();
        c.expect_end();
        for (int a : actions)
            for (int n : next)
                for (int z : obs) p_.observation_at(a, n, z) = prob;
    }

    std::vector<int> steps_for(Cursor& c, StepKind kind, const std::string& variant) {
        const auto ts = c.index_or_star(p_.horizon, "time step");
        for (int t : ts) {
            auto& step = steps_[t];
            if (step.kind == StepKind::Unset) {
                step.kind = kind;
                step.first_line = c.line().number;
                if (kind == StepKind::Linear) {
                    step.linear.assign(static_cast<std::size_t>(p_.joint_actions()) * p_.states, 0.0);
                } else {
                    step.belief.cost.assign(p_.joint_actions(), 0.0);
                }
            } else if (step.kind != kind) {
                c.fail("reward variant '" + variant + "' at t=" + std::to_string(t) +
                       " conflicts with the variant declared on line " + std::to_string(step.first_line));
            }
        }
        return ts;
    }

    void reward_line(Cursor& c) {
        const Token& variant = c.next();
        if (variant.text == "linear") {
            const auto ts = steps_for(c, StepKind::Linear, "linear");
            c.expect(":");
            const auto actions = c.joint(p_.action_space(), "action");
            c.expect(":");
            const auto states = c.index_or_star(p_.states, "state");
            const double value = c.real();
            c.expect_end();
            for (int t : ts)
                for (int a : actions)
                    for (int s : states) steps_[t].linear[static_cast<std::size_t>(a) * p_.states + s] = value;
        } else if (variant.text == "belief") {
            const auto ts = steps_for(c, StepKind::Belief, "belief");
            const Token& name = c.next();
            BeliefFunctional f{};
            if (name.text == "negentropy") {
                f = BeliefFunctional::NegEntropy;
            } else if (name.text == "zero") {
                f = BeliefFunctional::Zero;
            } else {
                c.fail_at(name, "unknown belief functional '" + std::string(name.text) + "'");
            }
            c.expect_end();
            for (int t : ts) steps_[t].belief.functional = f;
        } else if (variant.text == "cost") {
            const auto ts = steps_for(c, StepKind::Belief, "cost");
            c.expect(":");
            const auto actions = c.joint(p_.action_space(), "action");
            const double value = c.real();
            c.expect_end();
            for (int t : ts)
                for (int a : actions) steps_[t].belief.cost[a] = value;
        } else {
            c.fail_at(variant, "unknown reward variant '" + std::string(variant.text) + "'");
        }
    }

    void final_line(Cursor& c) {
        const Token& kind = c.next();
        if (kind.text == "negentropy") {
            p_.final_reward = {FinalReward::Kind::NegEntropy, {}};
        } else if (kind.text == "zero") {
            p_.final_reward = {FinalReward::Kind::Zero, {}};
        } else if (kind.text == "linear") {
            FinalReward r{FinalReward::Kind::Linear, {}};
            for (int s = 0; s < p_.states; ++s) r.table.push_back(c.real());
            p_.final_reward = std::move(r);
        } else {
            c.fail_at(kind, "unknown final reward variant '" + std::string(kind.text) + "'");
        }
        c.expect_end();
    }

    void label_line(Cursor& c) {
        const Token& what = c.next();
        if (what.text == "state") {
            const auto s = c.index_or_star(p_.states, "state");
            if (s.size() != 1) c.fail("labels cannot use '*'");
            auto& v = p_.labels.states;
            if (v.empty()) v.assign(p_.states, "");
            v[s[0]] = c.rest();
        } else if (what.text == "action" || what.text == "observation") {
            const bool is_action = what.text == "action";
            const auto agent = c.index_or_star(p_.agents, "agent");
            const auto& sizes = is_action ? p_.actions : p_.observations;
            auto& table = is_action ? p_.labels.actions : p_.labels.observations;
            if (agent.size() != 1) c.fail("labels cannot use '*'");
            const auto k = c.index_or_star(sizes[agent[0]], std::string(what.text));
            if (k.size() != 1) c.fail("labels cannot use '*'");
            if (table.empty()) {
                table.resize(p_.agents);
                for (int i = 0; i < p_.agents; ++i) table[i].assign(sizes[i], "");
            }
            table[agent[0]][k[0]] = c.rest();
        } else {
            c.fail_at(what, "unknown label kind '" + std::string(what.text) + "'");
        }
    }

    void read_start() {
        Cursor c(*start_);
        c.next();
        c.expect(":");
        for (int s = 0; s < p_.states; ++s) p_.initial_belief[s] = c.real();
        c.expect_end();
    }

    std::vector<Line> lines_;
    Problem p_;
    std::vector<StepBuilder> steps_;
    const Line* start_ = nullptr;
};

void append_joint(std::string& out, const JointSpace& space, int flat) {
    for (int i = 0; i < space.agents(); ++i) {
        out += std::to_string(space.component(flat, i));
        out += ' ';
    }
}

}  // namespace

std::string format_real(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

Problem parse_problem_unchecked(std::string_view text) { return ProblemParser(text).parse(); }

Problem parse_problem(std::string_view text) {
    Problem p = ProblemParser(text).parse();
    if (auto report = validate(p); !report.ok()) {
        std::string msg = "invalid problem:";
        for (const auto& issue : report.issues) msg += "\n  " + issue;
        throw InvalidProblem(msg);
    }
    return p;
}

Problem parse_problem(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_problem(text);
}

std::string serialize_problem(const Problem& p) {
    const JointSpace actions = p.action_space();
    const JointSpace observations = p.observation_space();
    const int na = actions.size();
    const int nz = observations.size();
    const int ns = p.states;

    std::string out;
    out += "agents: " + std::to_string(p.agents) + "\n";
    out += "states: " + std::to_string(ns) + "\n";
    out += "actions:";
    for (int a : p.actions) out += " " + std::to_string(a);
    out += "\nobservations:";
    for (int z : p.observations) out += " " + std::to_string(z);
    out += "\nhorizon: " + std::to_string(p.horizon) + "\n";
    out += "start:";
    for (double b : p.initial_belief) out += " " + format_real(b);
    out += "\n";

    for (std::size_t s = 0; s < p.labels.states.size(); ++s) {
        if (!p.labels.states[s].empty()) out += "label state " + std::to_string(s) + " " + p.labels.states[s] + "\n";
    }
    for (std::size_t i = 0; i < p.labels.actions.size(); ++i) {
        for (std::size_t k = 0; k < p.labels.actions[i].size(); ++k) {
            if (p.labels.actions[i][k].empty()) continue;
            out += "label action " + std::to_string(i) + " " + std::to_string(k) + " " + p.labels.actions[i][k] + "\n";
        }
    }
    for (std::size_t i = 0; i < p.labels.observations.size(); ++i) {
        for (std::size_t k = 0; k < p.labels.observations[i].size(); ++k) {
            if (p.labels.observations[i][k].empty()) continue;
            out += "label observation " + std::to_string(i) + " " + std::to_string(k) + " " +
                   p.labels.observations[i][k] + "\n";
        }
    }

    for (int a = 0; a < na; ++a) {
        for (int s = 0; s < ns; ++s) {
            for (int n = 0; n < ns; ++n) {
                const double v = p.transition_at(a, s, n);
                if (v == 0.0) continue;
                out += "T: ";
                append_joint(out, actions, a);
                out += ": " + std::to_string(s) + " : " + std::to_string(n) + " " + format_real(v) + "\n";
            }
        }
    }
    for (int a = 0; a < na; ++a) {
        for (int n = 0; n < ns; ++n) {
            for (int z = 0; z < nz; ++z) {
                const double v = p.observation_at(a, n, z);
                if (v == 0.0) continue;
                out += "O: ";
                append_joint(out, actions, a);
                out += ": " + std::to_string(n) + " : ";
                append_joint(out, observations, z);
                out += format_real(v) + "\n";
            }
        }
    }

    for (std::size_t t = 0; t < p.step_rewards.size(); ++t) {
        const std::string ts = std::to_string(t);
        if (const auto* lin = std::get_if<LinearReward>(&p.step_rewards[t])) {
            for (int a = 0; a < na; ++a) {
                for (int s = 0; s < ns; ++s) {
                    const double v = lin->table[static_cast<std::size_t>(a) * ns + s];
                    if (v == 0.0) continue;
                    out += "R: linear " + ts + " : ";
                    append_joint(out, actions, a);
                    out += ": " + std::to_string(s) + " " + format_real(v) + "\n";
                }
            }
        } else {
            const auto& bel = std::get<BeliefReward>(p.step_rewards[t]);
            out += "R: belief " + ts + (bel.functional == BeliefFunctional::NegEntropy ? " negentropy\n" : " zero\n");
            for (int a = 0; a < na; ++a) {
                if (bel.cost[a] == 0.0) continue;
                out += "R: cost " + ts + " : ";
                append_joint(out, actions, a);
                out += format_real(bel.cost[a]) + "\n";
            }
        }
    }

    switch (p.final_reward.kind) {
    case FinalReward::Kind::Zero:
        out += "Rfinal: zero\n";
        break;
    case FinalReward::Kind::NegEntropy:
        out += "Rfinal: negentropy\n";
        break;
    case FinalReward::Kind::Linear:
        out += "Rfinal: linear";
        for (double v : p.final_reward.table) out += " " + format_real(v);
        out += "\n";
        break;
    }
    return out;
}

}  // namespace npgi
