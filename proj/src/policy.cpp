#include "npgi/policy.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

#include "npgi/errors.hpp"

namespace npgi {

void check_policy(const Model& model, const JointPolicy& policy) {
    const auto& p = model.problem();
    if (policy.agent_count() != p.agents) {
        throw InvalidPolicy("policy has " + std::to_string(policy.agent_count()) + " agents, problem has " +
                            std::to_string(p.agents));
    }
    for (int i = 0; i < p.agents; ++i) {
        const auto& local = policy.agents[i];
        const std::string who = "agent " + std::to_string(i);
        if (local.horizon() != p.horizon) {
            throw InvalidPolicy(who + " policy has " + std::to_string(local.horizon()) + " layers, horizon is " +
                                std::to_string(p.horizon));
        }
        if (local.width(0) != 1) throw InvalidPolicy(who + " must have exactly one start node");
        for (int t = 0; t < p.horizon; ++t) {
            if (local.width(t) == 0) throw InvalidPolicy(who + " layer " + std::to_string(t) + " is empty");
            for (int k = 0; k < local.width(t); ++k) {
                const auto& node = local.node(t, k);
                const std::string where = who + " node (" + std::to_string(t) + ", " + std::to_string(k) + ")";
                if (node.action < 0 || node.action >= p.actions[i]) throw InvalidPolicy(where + " has an invalid action");
                if (t == p.horizon - 1) {
                    if (!node.next.empty()) throw InvalidPolicy(where + " is in the last layer but has successors");
                    continue;
                }
                if (static_cast<int>(node.next.size()) != p.observations[i]) {
                    throw InvalidPolicy(where + " needs one successor per observation");
                }
                for (int n : node.next) {
                    if (n < 0 || n >= local.width(t + 1)) throw InvalidPolicy(where + " has a successor out of range");
                }
            }
        }
    }
}

std::optional<int> ends_at(const Model& model, const JointPolicy& policy, const JointHistory& h) {
    if (h.length() >= policy.horizon()) throw std::invalid_argument("history too long for the policy layers");
    const JointSpace& actions = model.action_space();
    const JointSpace& observations = model.observation_space();

    std::vector<int> nodes(policy.agent_count(), 0);
    for (int k = 0; k < h.length(); ++k) {
        for (int i = 0; i < policy.agent_count(); ++i) {
            const auto& node = policy.agents[i].node(k, nodes[i]);
            if (node.action != actions.component(h.actions[k], i)) return std::nullopt;
            nodes[i] = node.next[observations.component(h.observations[k], i)];
        }
    }
    return policy.layer_space(h.length()).encode(nodes);
}

std::optional<int> find_duplicate(const LocalPolicy& policy, int t, int k) {
    const auto& layer = policy.layers[t];
    for (int j = 0; j < static_cast<int>(layer.size()); ++j) {
        if (j != k && layer[j] == layer[k]) return j;
    }
    return std::nullopt;
}

namespace {

void sample_node(PolicyNode& node, int actions, int next_width, Rng& rng) {
    node.action = std::uniform_int_distribution<int>(0, actions - 1)(rng);
    if (next_width > 0) {
        std::uniform_int_distribution<int> pick(0, next_width - 1);
        for (int& n : node.next) n = pick(rng);
    }
}

/// Number of structurally distinct nodes a layer can hold, saturated.
long long layer_capacity(int actions, int observations, int next_width) {
    constexpr long long kSaturate = std::numeric_limits<int>::max();
    long long cap = actions;
    if (next_width == 0) return cap;
    for (int z = 0; z < observations && cap < kSaturate; ++z) cap *= next_width;
    return std::min(cap, kSaturate);
}

/// Lexicographically first node not already present among layer[0..k).
PolicyNode first_unused(const std::vector<PolicyNode>& layer, int k, int observations, int next_width) {
    PolicyNode cand{0, std::vector<int>(next_width > 0 ? observations : 0, 0)};
    for (;;) {
        if (std::none_of(layer.begin(), layer.begin() + k, [&](const PolicyNode& n) { return n == cand; })) return cand;
        int digit = static_cast<int>(cand.next.size()) - 1;
        for (; digit >= 0; --digit) {
            if (++cand.next[digit] < next_width) break;
            cand.next[digit] = 0;
        }
        if (digit < 0) ++cand.action;  // capacity bounds the caller, so this stays in range
    }
}

}  // namespace

bool randomize_node(LocalPolicy& policy, int t, int k, int actions, Rng& rng, int max_attempts) {
    const int next_width = t + 1 < policy.horizon() ? policy.width(t + 1) : 0;
    auto& node = policy.node(t, k);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        sample_node(node, actions, next_width, rng);
        if (!find_duplicate(policy, t, k)) return true;
    }
    return false;
}

JointPolicy init_random_policy(const Model& model, int width, Rng& rng) {
    if (width < 1) throw std::invalid_argument("policy width must be at least 1");
    const auto& p = model.problem();
    JointPolicy policy;
    policy.agents.resize(p.agents);
    for (int i = 0; i < p.agents; ++i) {
        const int na = p.actions[i];
        const int nz = p.observations[i];

        std::vector<int> widths(p.horizon, 1);
        for (int t = p.horizon - 1; t >= 1; --t) {
            const int next_width = t + 1 < p.horizon ? widths[t + 1] : 0;
            widths[t] = static_cast<int>(std::min<long long>(width, layer_capacity(na, nz, next_width)));
        }

        auto& local = policy.agents[i];
        local.layers.resize(p.horizon);
        for (int t = 0; t < p.horizon; ++t) {
            const int next_width = t + 1 < p.horizon ? widths[t + 1] : 0;
            auto& layer = local.layers[t];
            layer.assign(widths[t], PolicyNode{0, std::vector<int>(next_width > 0 ? nz : 0, 0)});
            for (int k = 0; k < widths[t]; ++k) {
                bool distinct = false;
                for (int attempt = 0; attempt < 1000 && !distinct; ++attempt) {
                    sample_node(layer[k], na, next_width, rng);
                    distinct = std::none_of(layer.begin(), layer.begin() + k,
                                            [&](const PolicyNode& n) { return n == layer[k]; });
                }
                if (!distinct) layer[k] = first_unused(layer, k, nz, next_width);
            }
        }
    }
    return policy;
}

JointPolicy open_loop_policy(const Model& model, const std::vector<int>& joint_actions) {
    const auto& p = model.problem();
    if (static_cast<int>(joint_actions.size()) != p.horizon) {
        throw std::invalid_argument("open-loop policy needs one joint action per step");
    }
    JointPolicy policy;
    policy.agents.resize(p.agents);
    for (int i = 0; i < p.agents; ++i) {
        auto& local = policy.agents[i];
        local.layers.resize(p.horizon);
        for (int t = 0; t < p.horizon; ++t) {
            PolicyNode node;
            node.action = model.action_space().component(joint_actions[t], i);
            if (t + 1 < p.horizon) node.next.assign(p.observations[i], 0);
            local.layers[t].push_back(std::move(node));
        }
    }
    return policy;
}

std::string serialize_policy(const JointPolicy& policy) {
    std::ostringstream out;
    out << "agents: " << policy.agent_count() << "\n";
    out << "horizon: " << policy.horizon() << "\n";
    out << "observations:";
    for (const auto& local : policy.agents) {
        int nz = 0;
        for (const auto& layer : local.layers)
            for (const auto& node : layer) nz = std::max(nz, static_cast<int>(node.next.size()));
        out << " " << nz;
    }
    out << "\n";
    for (int i = 0; i < policy.agent_count(); ++i) {
        out << "agent " << i << "\n";
        const auto& local = policy.agents[i];
        for (int t = 0; t < local.horizon(); ++t) {
            for (int k = 0; k < local.width(t); ++k) {
                const auto& node = local.node(t, k);
                out << "node " << t << " " << k << " action=" << node.action << "\n";
                for (std::size_t z = 0; z < node.next.size(); ++z) {
                    out << "edge " << t << " " << k << " obs=" << z << " -> " << node.next[z] << "\n";
                }
            }
        }
    }
    return out.str();
}

namespace {

int parse_int(std::string_view text, int line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
        throw ParseError("expected a non-negative integer, found '" + std::string(text) + "'", line, 1);
    }
    return value;
}

int parse_keyed(const std::string& token, std::string_view key, int line) {
    if (token.rfind(key, 0) != 0) throw ParseError("expected '" + std::string(key) + "<n>'", line, 1);
    return parse_int(std::string_view(token).substr(key.size()), line);
}

}  // namespace

JointPolicy parse_policy(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    int agents = -1;
    int horizon = -1;
    std::vector<int> observations;
    int current = -1;

    struct Slot {
        std::optional<int> action;
        std::vector<std::optional<int>> next;
    };
    std::vector<std::vector<std::vector<Slot>>> slots;  // [agent][t][k]

    auto slot = [&](int t, int k, int line) -> Slot& {
        if (current < 0) throw ParseError("node before any 'agent' line", line, 1);
        if (t >= horizon) throw ParseError("layer " + std::to_string(t) + " beyond horizon", line, 1);
        auto& layer = slots[current][t];
        if (k >= static_cast<int>(layer.size())) layer.resize(k + 1);
        return layer[k];
    };

    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream ls(raw);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        std::vector<std::string> rest;
        for (std::string tok; ls >> tok;) rest.push_back(tok);

        if (key == "agents:" || key == "horizon:") {
            if (rest.size() != 1) throw ParseError("expected one value after '" + key + "'", line_no, 1);
            (key == "agents:" ? agents : horizon) = parse_int(rest[0], line_no);
        } else if (key == "observations:") {
            for (const auto& tok : rest) observations.push_back(parse_int(tok, line_no));
        } else if (key == "agent") {
            if (agents < 1 || horizon < 1) throw ParseError("'agents:' and 'horizon:' must precede agents", line_no, 1);
            if (slots.empty()) slots.assign(agents, std::vector<std::vector<Slot>>(horizon));
            if (rest.size() != 1) throw ParseError("expected 'agent <index>'", line_no, 1);
            current = parse_int(rest[0], line_no);
            if (current >= agents) throw ParseError("agent index out of range", line_no, 1);
        } else if (key == "node") {
            if (rest.size() != 3) throw ParseError("expected 'node <t> <idx> action=<a>'", line_no, 1);
            Slot& s = slot(parse_int(rest[0], line_no), parse_int(rest[1], line_no), line_no);
            if (s.action) throw ParseError("node defined twice", line_no, 1);
            s.action = parse_keyed(rest[2], "action=", line_no);
        } else if (key == "edge") {
            if (rest.size() != 5 || rest[3] != "->") throw ParseError("expected 'edge <t> <idx> obs=<z> -> <idx>'", line_no, 1);
            Slot& s = slot(parse_int(rest[0], line_no), parse_int(rest[1], line_no), line_no);
            const int z = parse_keyed(rest[2], "obs=", line_no);
            if (z >= static_cast<int>(s.next.size())) s.next.resize(z + 1);
            s.next[z] = parse_int(rest[4], line_no);
        } else {
            throw ParseError("unknown key '" + key + "'", line_no, 1);
        }
    }
    if (slots.empty()) throw ParseError("policy file defines no agents", std::max(line_no, 1), 1);
    if (static_cast<int>(observations.size()) != agents) {
        throw ParseError("'observations:' must list one count per agent", 1, 1);
    }

    JointPolicy policy;
    policy.agents.resize(agents);
    for (int i = 0; i < agents; ++i) {
        auto& local = policy.agents[i];
        local.layers.resize(horizon);
        for (int t = 0; t < horizon; ++t) {
            for (std::size_t k = 0; k < slots[i][t].size(); ++k) {
                const Slot& s = slots[i][t][k];
                const std::string where =
                    "agent " + std::to_string(i) + " node (" + std::to_string(t) + ", " + std::to_string(k) + ")";
                if (!s.action) throw ParseError(where + " has no action", line_no, 1);
                PolicyNode node{*s.action, {}};
                if (t + 1 < horizon) {
                    if (static_cast<int>(s.next.size()) != observations[i]) {
                        throw ParseError(where + " needs one edge per observation", line_no, 1);
                    }
                    for (const auto& n : s.next) {
                        if (!n) throw ParseError(where + " is missing an edge", line_no, 1);
                        node.next.push_back(*n);
                    }
                } else if (!s.next.empty()) {
                    throw ParseError(where + " is in the last layer but has edges", line_no, 1);
                }
                local.layers[t].push_back(std::move(node));
            }
        }
    }
    return policy;
}

}  // namespace npgi
